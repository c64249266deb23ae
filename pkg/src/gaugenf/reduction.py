"""Building a system in primary normal form  x' = V + lam^a Z_a,  T(x) = 0.

Inputs can be higher-order ODEs (depressed to first order), inhomogeneous
Pfaffian systems, or Hamiltonian data (Poisson bivector, Hamiltonian,
primary constraints).  Regularity of constraint sets is checked here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

from .algebra import ConstraintIdeal, RatFunc, VarRegistry, poly_literal, primitive_constraint
from .errors import (
    DynamicallyInconsistent,
    IrregularConstraints,
    SingularTransformation,
)
from .geometry import DOperator, PolyVector, VectorField, schouten
from .linear import FieldMatrix, determinant, generic_rank, solve_linear


@dataclass(frozen=True)
class PfaffianSpec:
    """theta . x' = rhs  together with algebraic constraints."""

    reg: VarRegistry
    theta: tuple  # N rows of n RatFunc
    rhs: tuple  # N RatFunc
    constraints: tuple = ()

    def __post_init__(self):
        theta = tuple(tuple(self.reg.lift(e) if not isinstance(e, (int, str)) else self.reg.const(e) for e in row)
                      for row in self.theta)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "rhs", tuple(self.reg.lift(e) for e in self.rhs))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if any(len(r) != self.reg.n for r in theta):
            raise ValueError(f"Pfaffian rows must have {self.reg.n} entries")
        if len(theta) != len(self.rhs):
            raise ValueError("number of Pfaffian rows and right-hand sides differ")


@dataclass(frozen=True)
class SystemSpec:
    reg: VarRegistry
    drift: VectorField
    char_fields: tuple
    constraints: tuple
    families: tuple
    certificate: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "char_fields", tuple(self.char_fields))
        object.__setattr__(self, "constraints", tuple(c for c in self.constraints if c))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "certificate", tuple(self.certificate))
        if len(self.families) != len(self.char_fields):
            raise ValueError("one multiplier family per characteristic field is required")
        missing = [f for f in self.families if f not in self.reg.families]
        if missing:
            raise ValueError(f"multiplier families {missing} not declared in the registry")

    @property
    def n(self):
        return self.reg.n

    @cached_property
    def ideal(self):
        return ConstraintIdeal(self.reg, self.constraints)

    @cached_property
    def dop(self):
        return DOperator(self.drift, self.char_fields, self.families)

    def d_op(self, w):
        return self.dop(w)

    def with_jet_order(self, k):
        if k == self.reg.jet_order:
            return self
        reg = self.reg.with_jet_order(k)
        return self.lift(reg)

    def lift(self, reg):
        return SystemSpec(reg, self.drift.lift(reg), tuple(z.lift(reg) for z in self.char_fields),
                          tuple(reg.lift(t) for t in self.constraints), self.families,
                          tuple(reg.lift(c) for c in self.certificate), self.name)

    def replace(self, **kw):
        return replace(self, **kw)

    def check_independent(self):
        """Characteristic fields must be linearly independent over F_I."""
        if not self.char_fields:
            return True
        M = FieldMatrix(tuple(tuple(z.comps[i] for z in self.char_fields) for i in range(self.n)),
                        self.ideal, len(self.char_fields))
        return generic_rank(M)[0] == len(self.char_fields)


def default_families(m, taken=()):
    base = "lam"
    names = [base] if m == 1 else [f"{base}{a + 1}" for a in range(m)]
    while any(n in taken for n in names) or any(f"{n}_0" in taken for n in names):
        base = "_" + base
        names = [base] if m == 1 else [f"{base}{a + 1}" for a in range(m)]
    return names


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------


def prune_dependent(constraints, reg):
    """Drop generators lying in the ideal of the ones kept before them."""
    kept = []
    for T in constraints:
        if not T:
            continue
        if kept and ConstraintIdeal(reg, kept).contains(T):
            continue
        kept.append(T)
    return kept


def jacobian(constraints, reg):
    return FieldMatrix(tuple(tuple(RatFunc(reg.partial_poly(T, i)) for i in range(reg.n)) for T in constraints),
                       None, reg.n)


def check_regular(constraints, reg):
    """Prune dependent generators and require a full-rank Jacobian on the zero locus.

    The zero test for Jacobian entries is radical membership, so that e.g.
    p^2 (whose gradient 2p vanishes on p^2 = 0) is rejected.
    """
    kept = prune_dependent(list(constraints), reg)
    if not kept:
        return kept
    ideal = ConstraintIdeal(reg, kept)
    J = [[reg.partial_poly(T, i) for i in range(reg.n)] for T in kept]
    rank, pivot_rows = _radical_rank(J, ideal)
    if rank < len(kept):
        bad = [poly_literal(kept[i]) for i in range(len(kept)) if i not in pivot_rows]
        raise IrregularConstraints(
            "irregular constraint set: Jacobian rank " + str(rank) + " < " + str(len(kept))
            + "; offending generator(s): " + ", ".join(bad)
            + " (supply a regular representative, e.g. via a [regularize] section)", bad)
    return kept


def _radical_rank(J, ideal):
    """Fraction-free elimination where 'zero' means 'in the radical of the ideal'."""
    rows = [list(r) for r in J]
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    cache = {}

    def vanishes(p):
        if not p:
            return True
        key = p
        if key not in cache:
            cache[key] = ideal.radical_contains(p)
        return cache[key]

    used_r, used_c = set(), set()
    for _ in range(min(nr, nc)):
        best = None
        for i in range(nr):
            if i in used_r:
                continue
            for j in range(nc):
                if j in used_c or not rows[i][j]:
                    continue
                e = ideal.reduce(rows[i][j])
                rows[i][j] = e
                if vanishes(e):
                    continue
                best = (i, j)
                break
            if best:
                break
        if best is None:
            break
        r, c = best
        used_r.add(r)
        used_c.add(c)
        piv = rows[r][c]
        for i in range(nr):
            if i in used_r:
                continue
            a = rows[i][c]
            if a:
                rows[i] = [ideal.reduce(piv * e - a * rows[r][k]) for k, e in enumerate(rows[i])]
    return len(used_r), used_r


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def depress(equations, unknowns, reg_phase_extra=(), ext=()):
    """Depress polynomial ODEs to a Pfaffian system.

    ``unknowns`` maps each unknown to its chain of names [y, y', y'', ...]
    (length = order + 1); ``equations`` are polynomial literals in those
    names.  An order-1 unknown whose equation is explicit in its derivative
    (c*y' - g with constant c, g free of y') is kept as a Pfaffian row
    without a chain variable.
    """
    chains = {y: list(names) for y, names in unknowns.items()}
    probe_vars = [v for names in chains.values() for v in names] + list(reg_phase_extra)
    probe = VarRegistry(probe_vars, ext=ext)
    eqs = [probe.parse_poly(e) for e in equations]
    explicit = {}
    remaining = list(range(len(eqs)))
    for y, names in chains.items():
        if len(names) != 2:
            continue
        top = probe.gen(names[1])
        for k in remaining:
            p = eqs[k]
            coeff = p.diff(top)
            if coeff and coeff.is_ground and not (p - coeff * top).diff(top):
                explicit[y] = (k, coeff.LC, p - coeff * top)
                remaining.remove(k)
                break
    phase = []
    for y, names in chains.items():
        phase.extend(names[:1] if y in explicit else names)
    phase.extend(reg_phase_extra)
    reg = VarRegistry(phase, ext=ext)
    rows, rhs = [], []
    for y, names in chains.items():
        if y in explicit:
            _, c, g = explicit[y]
            row = [reg.zero()] * reg.n
            row[reg.index(names[0])] = reg.one()
            rows.append(tuple(row))
            rhs.append(RatFunc(reg.lift(-g)) / reg.const(_frac(c)))
            continue
        for j in range(len(names) - 1):
            row = [reg.zero()] * reg.n
            row[reg.index(names[j])] = reg.one()
            rows.append(tuple(row))
            rhs.append(reg.var(names[j + 1]))
    constraints = tuple(reg.lift(eqs[k]) for k in remaining)
    return PfaffianSpec(reg, tuple(rows), tuple(rhs), constraints)


def _frac(c):
    from fractions import Fraction
    return Fraction(int(c.numerator), int(c.denominator))


def pfaffian_to_primary(p, families=None, name=""):
    reg = p.reg
    constraints = tuple(check_regular(p.constraints, reg)) if p.constraints else ()
    ideal = ConstraintIdeal(reg, constraints)
    M = FieldMatrix(p.theta, ideal if constraints else None, reg.n)
    sol = solve_linear(M, list(p.rhs), ring=reg.ring)
    if sol is None:
        raise DynamicallyInconsistent("dynamically inconsistent Pfaffian system: theta . V = rhs has no solution over F_I")
    m = len(sol.nullspace)
    if families is None:
        families = default_families(m, reg.names)
    if len(families) != m:
        raise ValueError(f"{len(families)} multiplier names given, nullspace has dimension {m}")
    reg2 = VarRegistry(reg.phase, tuple(families), reg.ext, max(reg.jet_order, 1))
    drift = VectorField(reg2, tuple(reg2.lift(c) for c in sol.particular))
    fields = tuple(VectorField(reg2, tuple(reg2.lift(c) for c in v)) for v in sol.nullspace)
    cert = tuple(reg2.lift(c.den) for c in sol.particular if not c.den.is_ground)
    return SystemSpec(reg2, drift, fields, tuple(reg2.lift(t) for t in constraints), tuple(families),
                      _dedupe(cert), name)


def _dedupe(polys):
    out = []
    for p in polys:
        if p not in out:
            out.append(p)
    return tuple(out)


def from_hamiltonian(P, H, primaries, families=None, name="", check_jacobi=True):
    """Drift V = [P, H] and Z_a = [P, T_a] (so V^i = {x^i, H}, Z^i_a = {x^i, T_a})."""
    reg = P.reg
    if check_jacobi:
        J = schouten(P, P)
        if not J.is_zero():
            raise ValueError("Poisson bivector fails the Jacobi identity: [P,P] = " + repr(J))
    primaries = list(primaries)
    if primaries:
        check_regular(primaries, reg)
    if families is None:
        families = default_families(len(primaries), reg.names)
    reg2 = VarRegistry(reg.phase, tuple(families), reg.ext, max(reg.jet_order, 1))
    P2 = PolyVector(reg2, 2, {K: reg2.lift(c) for K, c in P.comps})
    V = schouten(P2, PolyVector.scalar(reg2, reg2.lift(H))).to_field()
    Z = tuple(schouten(P2, PolyVector.scalar(reg2, reg2.lift(T))).to_field() for T in primaries)
    spec = SystemSpec(reg2, V, Z, tuple(reg2.lift(T) for T in primaries), tuple(families), (), name)
    if Z and not spec.check_independent():
        raise IrregularConstraints("Hamiltonian fields of the primary constraints are dependent over F_I",
                                   [poly_literal(T) for T in primaries])
    return spec


def apply_equivalence(s, S=None, W=None, X=None):
    """T -> S T,  V -> V + T_a W^a,  Z_al -> Z_al + T_a X^a_al."""
    reg = s.reg
    T = list(s.constraints)
    k = len(T)
    ideal = s.ideal
    cert = list(s.certificate)
    if S is not None:
        S = [[reg.lift(e) if not isinstance(e, (int,)) else reg.const(e) for e in row] for row in S]
        if len(S) != k or any(len(r) != k for r in S):
            raise ValueError("S must be a square matrix matching the constraint count")
        det = determinant(FieldMatrix(tuple(tuple(r) for r in S), None, k)) if k else None
        if det is not None and (det.is_zero() or ideal.contains(det.num)):
            raise SingularTransformation("equivalence matrix S is singular over F_I")
        newT = []
        for row in S:
            acc = reg.zero()
            for a, t in zip(row, T):
                acc = acc + a * RatFunc(t)
            if not acc.den.is_ground:
                cert.append(acc.den)
            newT.append(acc.num)
        T = newT
    V = s.drift
    if W is not None:
        for t, w in zip(s.constraints, W):
            V = V + w.scale(RatFunc(t))
    Z = list(s.char_fields)
    if X is not None:
        for a, row in enumerate(X):
            t = RatFunc(s.constraints[a])
            Z = [z + x.scale(t) for z, x in zip(Z, row)]
    return SystemSpec(reg, V, tuple(Z), tuple(T), s.families, _dedupe(cert), s.name)


def normalize_constraint(p, reg, regularize=None):
    """Primitive representative, then the user's regularization map if it applies."""
    q = primitive_constraint(p, reg)
    if regularize:
        for src, dst in regularize.items():
            if primitive_constraint(reg.lift(src), reg) == q:
                return primitive_constraint(reg.lift(dst), reg)
    return q
