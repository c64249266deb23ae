"""Constraint stabilization: conserve constraints stage by stage until nothing new appears.

Each stage solves  V T_b + lam^a Z_a T_b = 0  for as many multipliers as the
rank of M = (Z_a T_b) over F_I allows, substitutes them back into the drift
and the remaining fields, and collects the numerators of V' T_b that are not
already in the constraint ideal as the next constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import ConstraintIdeal, RatFunc, poly_literal, to_literal
from .errors import IrregularConstraints, NoAbnormalLocus, StageOverflow
from .geometry import VectorField, apply_field, combine
from .linear import FieldMatrix, MinorSelection, determinant, generic_rank, solve_linear
from .reduction import SystemSpec, check_regular, normalize_constraint


@dataclass
class StageRecord:
    stage: int
    M: FieldMatrix
    minor: MinorSelection
    determined: dict  # family -> RatFunc in the remaining multipliers
    undetermined: tuple
    new_constraints: tuple
    parents: tuple  # index (into the stage's constraint list) of the constraint each new one came from
    stage_drift: VectorField
    stage_fields: tuple
    W_coeffs: dict = field(default_factory=dict)  # (field, row) -> cofactors of the trivial B entries
    certificate: tuple = ()

    def summary(self):
        return {
            "stage": self.stage,
            "M": self.M.literal(),
            "rank": self.minor.size,
            "minor": {"rows": list(self.minor.rows), "cols": list(self.minor.cols),
                      "det": to_literal(self.minor.det) if self.minor.det is not None else None},
            "determined": {k: to_literal(v) for k, v in self.determined.items()},
            "undetermined": list(self.undetermined),
            "new_constraints": [poly_literal(t) for t in self.new_constraints],
            "stage_drift": self.stage_drift.as_dict(),
            "stage_fields": [z.as_dict() for z in self.stage_fields],
        }


@dataclass
class CompleteNormalForm:
    spec: SystemSpec  # complete constraints, complete drift, tangential fields
    primary: SystemSpec
    stages: list
    tangential: tuple  # T|| (recombined numerators)
    transverse: tuple  # T_perp
    transverse_core: tuple  # rows of an invertible minor of (Z_primary T)
    transverse_fields: tuple  # Z_perp: primary fields at the minor's columns
    multipliers: dict  # primary family -> expression in the undetermined ones
    structure_coeffs: dict
    classification_minor: MinorSelection | None = None

    @property
    def ideal(self):
        return self.spec.ideal

    @property
    def drift(self):
        return self.spec.drift

    @property
    def tangential_fields(self):
        return self.spec.char_fields

    def certificate(self):
        polys = list(self.spec.certificate)
        for st in self.stages:
            for p in st.certificate:
                if p not in polys:
                    polys.append(p)
        return polys


def _field_matrix(fields, constraints, ideal):
    rows = tuple(tuple(ideal.normal_form(apply_field(z, RatFunc(t))) for z in fields) for t in constraints)
    return FieldMatrix(rows, ideal, len(fields))


def _subs_linear(f, values, reg):
    """Substitute lam_0 variables (appearing linearly in the numerator) by RatFuncs."""
    num, den = f.num, f.den
    rest = num
    acc = None
    for fam, val in values.items():
        g = reg.gen(f"{fam}_0")
        c = num.diff(g)
        if not c:
            continue
        rest = rest - c * g
        term = RatFunc(c) * val
        acc = term if acc is None else acc + term
    out = RatFunc(rest)
    if acc is not None:
        out = out + acc
    return out / RatFunc(den)


def stage_step(s, ideal=None, stage=0, regularize=None):
    reg = s.reg
    ideal = ideal or s.ideal
    T = list(s.constraints)
    Z = list(s.char_fields)
    M = _field_matrix(Z, T, ideal)
    rank, minor = generic_rank(M)
    cert = list(minor.certificate())
    A, B = list(minor.cols), list(minor.rows)
    free = [a for a in range(len(Z)) if a not in A]
    determined = {}
    drift, fields = s.drift, [Z[a] for a in free]
    W = {}
    if rank:
        D = M.submatrix(B, A)
        VT = [apply_field(s.drift, RatFunc(T[b])) for b in B]
        sol_v = solve_linear(D, VT)
        c_fields = []
        for a1 in free:
            col = [M.rows[b][a1] for b in B]
            c_fields.append(solve_linear(D, col).particular)
        # lam^A = -D^{-1}(V T_B + lam^{a1} Z_{a1} T_B)
        for k, a in enumerate(A):
            val = -sol_v.particular[k]
            for j, a1 in enumerate(free):
                val = val - c_fields[j][k] * reg.var(f"{s.families[a1]}_0")
            determined[s.families[a]] = val
        ZA = [Z[a] for a in A]
        drift = s.drift - combine(sol_v.particular, ZA, reg)
        fields = [Z[a1] - combine(c_fields[j], ZA, reg) for j, a1 in enumerate(free)]
        for x in list(sol_v.particular) + [e for c in c_fields for e in c]:
            if not x.den.is_ground and x.den not in cert:
                cert.append(x.den)
        # B = Z' T must be trivial; keep cofactor witnesses for the report
        for j, z in enumerate(fields):
            for b, t in enumerate(T):
                val = apply_field(z, RatFunc(t))
                if not ideal.is_trivial(val):
                    raise AssertionError("non-trivial B entry after multiplier elimination")
                if val.num and len(T) <= 4:
                    W[(j, b)] = ideal.lift(val.num)
    new, parents = [], []
    work = ConstraintIdeal(reg, T)
    for b, t in enumerate(T):
        cand = apply_field(drift, RatFunc(t))
        if not cand.den.is_ground and cand.den not in cert:
            cert.append(cand.den)
        num = work.reduce(cand.num)
        if not num:
            continue
        num = normalize_constraint(num, reg, regularize)
        if work.contains(num):
            continue
        new.append(num)
        parents.append(b)
        work = work.extended([num])
    return StageRecord(stage, M, minor, determined, tuple(s.families[a] for a in free), tuple(new),
                       tuple(parents), drift, tuple(fields), W, tuple(cert))


def stabilize(s, max_stage=None, regularize=None):
    reg = s.reg
    limit = reg.n + 1 if max_stage is None else max_stage
    T0 = tuple(check_regular(s.constraints, reg)) if s.constraints else ()
    cur = s.replace(constraints=T0)
    records = []
    origin = list(range(len(T0)))  # stage-global index of each current constraint
    lineage = {}  # global index -> parent global index
    all_T = list(T0)
    while True:
        if len(records) >= limit:
            raise StageOverflow(f"stabilization did not terminate within {limit} stages")
        rec = stage_step(cur, cur.ideal, len(records), regularize)
        records.append(rec)
        cur_T = list(cur.constraints)
        if not rec.new_constraints:
            cur = cur.replace(drift=rec.stage_drift, char_fields=rec.stage_fields,
                              families=rec.undetermined)
            break
        for t, par in zip(rec.new_constraints, rec.parents):
            lineage[len(all_T)] = origin[par]
            origin.append(len(all_T))
            all_T.append(t)
        cur_T.extend(rec.new_constraints)
        try:
            cur_T = check_regular(cur_T, reg)
        except IrregularConstraints as exc:
            raise IrregularConstraints(f"stage {len(records)}: " + str(exc), exc.offending) from None
        cur = SystemSpec(reg, rec.stage_drift, rec.stage_fields, tuple(cur_T), rec.undetermined,
                         cur.certificate + tuple(p for p in rec.certificate if p not in cur.certificate), s.name)
    return _assemble(s, cur, records, all_T, lineage)


def _assemble(primary, final, records, all_T, lineage):
    reg = primary.reg
    ideal = final.ideal
    Tbar = list(final.constraints)
    # compose the determined multipliers back to the primary families
    resolved = {}
    for rec in reversed(records):
        for fam, val in rec.determined.items():
            resolved[fam] = _subs_linear(val, dict(resolved), reg) if resolved else val
    multipliers = {fam: ideal.normal_form(resolved[fam]) if fam in resolved else reg.var(f"{fam}_0")
                   for fam in primary.families}

    # classification against the primary characteristic fields
    Mbar = _field_matrix(primary.char_fields, Tbar, ideal) if primary.char_fields and Tbar else None
    core_rows, core_cols, cls_minor = [], [], None
    tangential, transverse = [], []
    if Mbar is not None:
        rank, cls_minor = generic_rank(Mbar)
        core_rows, core_cols = list(cls_minor.rows), list(cls_minor.cols)
    rows_T = {i: t for i, t in enumerate(Tbar)}
    # Tbar is the pruned list; map back to the lineage indices by polynomial identity
    index_of = {}
    for gi, t in enumerate(all_T):
        for i, tb in rows_T.items():
            if tb == t and i not in index_of:
                index_of[i] = gi
    promoted = set(core_rows)
    changed = True
    while changed:
        changed = False
        for i in range(len(Tbar)):
            if i in promoted:
                continue
            gi = index_of.get(i)
            for j in promoted.copy():
                gj = index_of.get(j)
                while gj is not None and gj in lineage:
                    gj = lineage[gj]
                    if gj == gi:
                        promoted.add(i)
                        changed = True
                        break
    if Mbar is not None and core_rows:
        D = Mbar.submatrix(core_rows, core_cols)
        Dt = D.transpose()
        for i in range(len(Tbar)):
            if i in promoted:
                continue
            rhs = [Mbar.rows[i][c] for c in core_cols]
            coeff = solve_linear(Dt, rhs).particular
            comb = RatFunc(Tbar[i])
            for k, b in enumerate(core_rows):
                comb = comb - coeff[k] * RatFunc(Tbar[b])
            tangential.append(comb.num)
    else:
        tangential = [Tbar[i] for i in range(len(Tbar)) if i not in promoted]
    transverse = [Tbar[i] for i in sorted(promoted)]
    Zperp = tuple(primary.char_fields[c] for c in core_cols)
    structure = _structure_coeffs(final, ideal)
    return CompleteNormalForm(final, primary, records, tuple(tangential), tuple(transverse),
                              tuple(Tbar[i] for i in core_rows), Zperp, multipliers, structure, cls_minor)


def _structure_coeffs(final, ideal):
    """Cofactors F with  V T_a = F_a^b T_b  and  Z_al T_a = F_{al a}^b T_b."""
    out = {}
    T = list(final.constraints)
    if not T or len(T) > 6:
        return out
    for a, t in enumerate(T):
        val = apply_field(final.drift, RatFunc(t))
        if not ideal.is_trivial(val):
            raise AssertionError("complete drift does not preserve the constraint surface")
        if val.num:
            out[("V", a)] = ideal.lift(val.num)
        for al, z in enumerate(final.char_fields):
            val = apply_field(z, RatFunc(t))
            if val.num:
                out[(al, a)] = ideal.lift(val.num)
    return out


def branch_points(rec):
    """Non-constant minors of a stage: candidates for an abnormal branch."""
    if rec.minor.det is None or rec.minor.det.is_const():
        return []
    return [rec.minor.det.num]


def minor_polynomial(rec, rows, cols):
    D = rec.M.submatrix(rows, cols)
    det = determinant(D)
    return det.num if det is not None else None


def abnormal_branch(s, minor_locus):
    """Restrict s to the locus where the given minors vanish."""
    reg = s.reg
    locus = [reg.lift(p) for p in minor_locus]
    if not locus or all(p.is_ground and p for p in locus):
        raise NoAbnormalLocus("no abnormal locus: the selected minors are non-vanishing constants")
    locus = [p for p in locus if not (p.is_ground and p)]
    T = list(s.constraints) + [normalize_constraint(p, reg) for p in locus if p]
    T = check_regular(T, reg)
    ConstraintIdeal(reg, T)
    return s.replace(constraints=tuple(T), name=(s.name + " [abnormal branch]").strip())
