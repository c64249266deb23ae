"""Involutive normal form, observables and weak Hamiltonian structures.

All relations are decided over F_I: a quantity "vanishes" when it is trivial
modulo the constraint ideal, and a field lies in a span when it does so at a
generic point of the constraint surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from sympy import QQ

from .algebra import RatFunc, as_ratfunc, poly_literal, to_literal
from .errors import GaugeNFError
from .geometry import PolyVector, VectorField, apply_field, lie_bracket, schouten, wedge
from .linear import EchelonSpace, FieldMatrix, determinant, solve_linear, span_membership
from .reduction import SystemSpec, default_families


class NotObservable(GaugeNFError):
    """The function is not gauge invariant on the constraint surface."""


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observable:
    reg: object
    rep: RatFunc

    def __post_init__(self):
        rep = as_ratfunc(self.rep, self.reg)
        if self.reg.max_jet(rep) >= 0:
            raise ValueError("an observable must not depend on the multipliers or their jets")
        object.__setattr__(self, "rep", rep)

    @classmethod
    def parse(cls, reg, text):
        return cls(reg, reg.parse(text))

    def lift(self, reg):
        return self if reg is self.reg else Observable(reg, reg.lift(self.rep))

    def canonical(self, ideal):
        """Normal form of the class modulo the constraint ideal."""
        return ideal.normal_form(self.lift(ideal.reg).rep)

    def same_class(self, other, ideal):
        return ideal.is_trivial(self.lift(ideal.reg).rep - other.lift(ideal.reg).rep)

    def __add__(self, other):
        return Observable(self.reg, self.rep + other.lift(self.reg).rep)

    def __mul__(self, other):
        return Observable(self.reg, self.rep * other.lift(self.reg).rep)

    def __str__(self):
        return to_literal(self.rep)


def _gauge_basis(g):
    return list(g.basis) if hasattr(g, "basis") else list(g)


def is_observable(O, c, g):
    """True iff Z O is trivial for every field Z of the gauge distribution."""
    spec = c.spec if hasattr(c, "spec") else c
    ideal = spec.ideal
    rep = O.lift(spec.reg).rep
    for z in _gauge_basis(g):
        z = z.lift(spec.reg)
        if not ideal.is_trivial(apply_field(z, rep)):
            return False
    return True


def observable_evolution(O, c, g=None):
    """Class of V O.  With ``g`` the observable precondition is checked first."""
    spec = c.spec if hasattr(c, "spec") else c
    if g is not None and not is_observable(O, c, g):
        raise NotObservable(f"{O} is not gauge invariant on the constraint surface")
    rep = O.lift(spec.reg).rep
    return Observable(spec.reg, spec.ideal.normal_form(apply_field(spec.drift, rep)))


# ---------------------------------------------------------------------------
# involutive normal form
# ---------------------------------------------------------------------------


def _specialize(f, subs):
    num = f.num.subs(subs) if subs else f.num
    den = f.den.subs(subs) if subs else f.den
    if not den:
        return None
    return RatFunc(num, den)


def clear_jets(fields, ideal, points=None):
    """Jet-free fields with the same F_I-span, or (fields, flagged) when none were found.

    Jet variables are specialized at rational points; the specializations are
    collected until they span the original distribution.
    """
    if not fields:
        return [], []
    reg = fields[0].reg
    jets = [reg.gen(f"{fam}_{k}") for fam in reg.families for k in range(reg.jet_order + 1)]
    if all(reg.max_jet(c) < 0 for z in fields for c in z.comps):
        return list(fields), []
    npts = points or len(fields) + 3
    space = EchelonSpace(reg.n, ideal)
    out = []
    for t in range(1, npts + 1):
        subs = [(x, QQ(i + 2, t + 1) if (i + t) % 2 else -QQ(t, i + 2)) for i, x in enumerate(jets)]
        for z in fields:
            comps = [_specialize(c, subs) for c in z.comps]
            if any(c is None for c in comps):
                continue
            if space.add(tuple(comps)):
                out.append(VectorField(reg, tuple(comps)))
        if len(out) == len(fields):
            break
    ok = len(out) == len(fields) and all(span_membership(z.comps, [w.comps for w in out], ideal) is not None
                                         for z in fields)
    if not ok:
        flagged = [i for i, z in enumerate(fields) if any(reg.max_jet(c) >= 0 for c in z.comps)]
        return list(fields), flagged
    return out, []


def involutive_form(c, g, flags=None):
    """Spec with the complete constraints and drift and the gauge distribution as characteristic fields.

    ``flags``, when a list, receives the indices of fields whose jet dependence
    could not be removed.
    """
    spec = c.spec
    reg = spec.reg
    fields, flagged = clear_jets([z.lift(reg) for z in _gauge_basis(g)], spec.ideal)
    if flags is not None:
        flags.extend(flagged)
    taken = set(reg.phase) | {e.name for e in reg.ext}
    fams = tuple(default_families(len(fields), taken)) if fields else ()
    new_reg = reg.with_families(fams).with_jet_order(max(reg.jet_order, 1))
    if flagged:
        # keep the jets the flagged fields depend on
        extra = tuple(f for f in reg.families if f not in fams)
        new_reg = reg.with_families(fams + extra).with_jet_order(max(reg.jet_order, 1))
    return SystemSpec(new_reg, spec.drift.lift(new_reg), tuple(z.lift(new_reg) for z in fields),
                      tuple(new_reg.lift(t) for t in spec.constraints), fams,
                      tuple(new_reg.lift(p) for p in spec.certificate), (spec.name + " [involutive]").strip())


# ---------------------------------------------------------------------------
# involution relations
# ---------------------------------------------------------------------------


@dataclass
class InvolutionReport:
    ok: bool
    A: dict = field(default_factory=dict)  # (alpha, a) -> cofactors of Z_alpha T_a
    B: dict = field(default_factory=dict)  # (alpha, beta) -> coefficients on Z
    C: dict = field(default_factory=dict)  # (alpha, beta) -> per-component cofactors
    D: dict = field(default_factory=dict)  # a -> cofactors of V T_a
    E: dict = field(default_factory=dict)  # alpha -> coefficients on Z
    F: dict = field(default_factory=dict)
    failure: str | None = None

    def __bool__(self):
        return self.ok


def _cofactors(f, ideal):
    """Rational cofactors h with f = sum_a h_a T_a, or None."""
    if not ideal.is_trivial(f):
        return None
    cof = ideal.lift(f.num)
    if cof is None:
        # membership holds only after clearing; fall back to the normal form witness
        return None
    return [RatFunc(h) / RatFunc(f.den) for h in cof]


def _in_span_mod(v, basis, ideal):
    """(coefficients, per-component cofactors) with v = coeffs.basis + T.cof, or None."""
    reg = v.reg
    coeffs = span_membership(v.comps, [b.comps for b in basis], ideal) if basis else ()
    if coeffs is None:
        return None
    rest = list(v.comps)
    for a, b in zip(coeffs, basis):
        rest = [x - a * y for x, y in zip(rest, b.comps)]
    cofs = []
    for x in rest:
        if not ideal.is_trivial(x):
            return None
        cofs.append(_cofactors(x, ideal) if x.num else [reg.zero() for _ in ideal.generators])
    return tuple(coeffs), cofs


def check_involution(s):
    """Solve the involution relations of s; the first failing relation is reported by name."""
    ideal = s.ideal
    Z = list(s.char_fields)
    names = [f"Z{k + 1}" for k in range(len(Z))]
    rep = InvolutionReport(True)
    for a, t in enumerate(s.constraints):
        f = apply_field(s.drift, RatFunc(t))
        if not ideal.is_trivial(f):
            rep.ok, rep.failure = False, f"V T{a + 1} = {to_literal(f)} is not trivial"
            return rep
        rep.D[a] = _cofactors(f, ideal) if f.num else None
        for al, z in enumerate(Z):
            f = apply_field(z, RatFunc(t))
            if not ideal.is_trivial(f):
                rep.ok, rep.failure = False, f"{names[al]} T{a + 1} = {to_literal(f)} is not trivial"
                return rep
            rep.A[(al, a)] = _cofactors(f, ideal) if f.num else None
    for al in range(len(Z)):
        for be in range(al + 1, len(Z)):
            br = lie_bracket(Z[al], Z[be])
            sol = _in_span_mod(br, Z, ideal)
            if sol is None:
                rep.ok, rep.failure = False, f"[{names[al]}, {names[be]}] = {br!r} is not in the span"
                return rep
            rep.B[(al, be)], rep.C[(al, be)] = sol
    for al, z in enumerate(Z):
        br = lie_bracket(z, s.drift)
        sol = _in_span_mod(br, Z, ideal)
        if sol is None:
            rep.ok, rep.failure = False, f"[{names[al]}, V] = {br!r} is not in the span"
            return rep
        rep.E[al], rep.F[al] = sol
    return rep


# ---------------------------------------------------------------------------
# weak Poisson structure
# ---------------------------------------------------------------------------


@dataclass
class WeakStructureReport:
    P: PolyVector
    witnesses: dict = field(default_factory=dict)  # relation -> {"G": {alpha: PolyVector}, "H": {a: PolyVector}}
    failures: list = field(default_factory=list)  # (relation, detail)
    residuals: dict = field(default_factory=dict)  # relation -> True when the witness substitutes back to 0

    @property
    def ok(self):
        return not self.failures

    def __bool__(self):
        return self.ok

    def summary(self):
        out = {"ok": self.ok, "failures": [list(f) for f in self.failures], "relations": {}}
        for name, w in self.witnesses.items():
            out["relations"][name] = {
                "G": {str(k): repr(v) for k, v in w["G"].items()},
                "H": {str(k): repr(v) for k, v in w["H"].items()},
                "exact": self.residuals.get(name, False),
            }
        return out


class _Frame:
    """Z completed by coordinate vectors to a frame over F_I, with its inverse."""

    def __init__(self, s):
        reg, ideal = s.reg, s.ideal
        self.reg, self.ideal = reg, ideal
        self.Z = list(s.char_fields)
        space = EchelonSpace(reg.n, ideal)
        vecs = []
        for z in self.Z:
            if not space.add(z.comps):
                raise ValueError("characteristic fields are dependent over F_I")
            vecs.append(z)
        for i in range(reg.n):
            e = VectorField.coordinate(reg, i)
            if space.add(e.comps):
                vecs.append(e)
        self.fields = vecs
        self.r = len(self.Z)
        cols = [v.comps for v in vecs]
        M = FieldMatrix(tuple(tuple(c[i] for c in cols) for i in range(reg.n)), ideal, reg.n)
        inv_cols = []
        for i in range(reg.n):
            rhs = [reg.one() if k == i else reg.zero() for k in range(reg.n)]
            inv_cols.append(solve_linear(M, rhs).particular)
        # row J of the inverse: inv[J][i]
        self.inv = [[inv_cols[i][J] for i in range(reg.n)] for J in range(reg.n)]

    def coefficient(self, X, J):
        """Coefficient of X on the frame wedge f_J (J sorted frame indices)."""
        acc = self.reg.zero()
        for I, x in X.comps:
            if len(J) == 1:
                acc = acc + x * self.inv[J[0]][I[0]]
            else:
                sub = FieldMatrix(tuple(tuple(self.inv[a][b] for b in I) for a in J), None, len(I))
                acc = acc + x * determinant(sub)
        return acc

    def wedge_of(self, J):
        out = PolyVector.scalar(self.reg, 1)
        for j in J:
            out = wedge(out, PolyVector.from_field(self.fields[j]))
        return out


def _decompose(X, frame, ideal, name):
    """Witnesses G (degree k-1) and H (degree k) with X = sum G^al ^ Z_al - sum T^a H_a, or a failure."""
    reg = frame.reg
    k = X.degree
    G = {}
    for J in combinations(range(reg.n), k):
        zs = [j for j in J if j < frame.r]
        cJ = frame.coefficient(X, J)
        if not zs:
            if not ideal.is_trivial(cJ):
                labels = "^".join(f"f{j + 1}" for j in J)
                return None, f"{name}: component on {labels} is {to_literal(ideal.normal_form(cJ))}, not trivial"
            continue
        if cJ.is_zero():
            continue
        al = zs[0]
        pos = J.index(al)
        rest = J[:pos] + J[pos + 1:]
        sign = -1 if (k - 1 - pos) % 2 else 1
        term = frame.wedge_of(rest).scale(cJ * sign)
        G[al] = G[al] + term if al in G else term
    resid = X
    for al, Gal in G.items():
        resid = resid - wedge(Gal, PolyVector.from_field(frame.Z[al]))
    H = {}
    for K, v in resid.comps:
        if not ideal.is_trivial(v):
            return None, f"{name}: remainder component {K} is {to_literal(ideal.normal_form(v))}, not trivial"
        cof = _cofactors(v, ideal)
        if cof is None:
            return None, f"{name}: remainder component {K} has no polynomial cofactors"
        for a, h in enumerate(cof):
            if h:
                piece = PolyVector(reg, k, {K: -h})
                H[a] = H[a] + piece if a in H else piece
    return {"G": G, "H": H}, None


def _check_witness(X, w, frame, constraints):
    reg = frame.reg
    total = X
    for al, Gal in w["G"].items():
        total = total - wedge(Gal, PolyVector.from_field(frame.Z[al]))
    for a, Ha in w["H"].items():
        total = total + Ha.scale(RatFunc(constraints[a]))
    return total.is_zero()


def verify_weak_poisson(P, s):
    """Decompose the weak Hamiltonian relations for (T, Z, V, P) over F_I."""
    reg = s.reg
    P = PolyVector(reg, 2, {K: reg.lift(c) for K, c in P.comps}) if P.reg is not reg else P
    rep = WeakStructureReport(P)
    inv = check_involution(s)
    if not inv:
        rep.failures.append(("invol", inv.failure))
        return rep
    ideal = s.ideal
    frame = _Frame(s)
    T = [RatFunc(t) for t in s.constraints]
    V = PolyVector.from_field(s.drift)
    rels = [("weakJ:[P,P]", schouten(P, P)), ("weakJ:[V,P]", schouten(V, P))]
    rels += [(f"weakP:[T{a + 1},P]", schouten(PolyVector.scalar(reg, t), P)) for a, t in enumerate(T)]
    rels += [(f"weakP:[Z{al + 1},P]", schouten(PolyVector.from_field(z), P)) for al, z in enumerate(s.char_fields)]
    for name, X in rels:
        if X.is_zero():
            rep.witnesses[name] = {"G": {}, "H": {}}
            rep.residuals[name] = True
            continue
        w, err = _decompose(X, frame, ideal, name)
        if w is None:
            rep.failures.append((name, err))
            continue
        rep.witnesses[name] = w
        rep.residuals[name] = _check_witness(X, w, frame, [t for t in s.constraints])
        if not rep.residuals[name]:
            rep.failures.append((name, "witness does not substitute back to zero"))
    return rep


def observable_catalog(c, g, candidates=None):
    """Phase coordinates (or given candidates) that are observables, as literals."""
    spec = c.spec
    reg = spec.reg
    cands = candidates or [reg.var(x) for x in reg.phase]
    out = []
    for f in cands:
        O = Observable(reg, f)
        if spec.ideal.is_trivial(O.rep):
            continue
        if is_observable(O, c, g):
            out.append(poly_literal(O.rep.num) if O.rep.den == 1 else to_literal(O.rep))
    return out
