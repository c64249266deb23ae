"""Gauge distribution, degree filtration and explicit gauge generators.

Notation.  Z = (Z_1..Z_m) are the tangential fields of the complete form,
D is the evolution operator of the complete system, S_p = span{D^j Z_a : j < p}
and Z_p = {a : a.D^p Z in S_p}.  For w = a.Z of degree p the relation

    D^p w + D^{p-1} w_1 + ... + D w_{p-1} + w_p = 0,   w_k = a_k.Z

is solved level by level.  a_k is unique modulo Z_{p-k}; the lowest-degree
polynomial solution is taken when one exists (deterministic elimination over
QQ, high jets pivoted first), otherwise the rational solution reduced against
the reduced-echelon basis of Z_{p-k}.  The generator is

    dx   = sum_{n<p}  R_(p-n-1) eps^(n),   R_(n) = D R_(n-1) + W_(n),  W_(n) = U_(n).Z
    dlam = sum_{n<=p} U_(p-n)   eps^(n),   U_(0) = a, U_(k) = a_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .algebra import RatFunc, poly_literal, to_literal
from .errors import (
    DenominatorClearingError,
    FiltrationOverflow,
    JetBudgetExceeded,
    StaleCertificate,
)
from .geometry import VectorField, apply_field, combine, lie_bracket
from .linear import EchelonSpace, FieldMatrix, left_kernel, rank_of_vectors, solve_linear, span_membership


# ---------------------------------------------------------------------------
# small helpers on coefficient vectors
# ---------------------------------------------------------------------------


def _nf(f, ideal):
    return f if ideal is None or ideal.is_zero_ideal() else ideal.normal_form(f)


def _is_zero(f, ideal):
    if f.is_zero():
        return True
    return ideal is not None and not ideal.is_zero_ideal() and ideal.is_trivial(f)


def rref(vectors, ideal=None):
    """Reduced row echelon form (leftmost pivots, pivot entries 1) over F / F_I."""
    rows = [[_nf(e, ideal) for e in v] for v in vectors]
    if not rows:
        return [], []
    ncol = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncol):
        piv = None
        for i in range(r, len(rows)):
            if not _is_zero(rows[i][c], ideal):
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [_nf(e * inv, ideal) for e in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [_nf(e - f * g, ideal) for e, g in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return [tuple(row) for row in rows[:r]], pivots


def reduce_against(a, basis, pivots, ideal=None):
    """Canonical coset representative of a modulo span(basis) (basis in RREF)."""
    a = list(a)
    for b, c in zip(basis, pivots):
        f = a[c]
        if not f.is_zero():
            a = [_nf(x - f * y, ideal) for x, y in zip(a, b)]
    return tuple(_nf(x, ideal) for x in a)


def _vec(field_):
    return field_.comps


def _field(reg, comps):
    return VectorField(reg, tuple(comps))


# ---------------------------------------------------------------------------
# Lie flag
# ---------------------------------------------------------------------------


def lie_closure(fields, ideal=None, drift=None, max_depth=None):
    """Bracket-saturate a distribution over F_I.

    Returns (basis, growth vector, depth).  With ``drift`` the iterated
    ad_drift images are included as well (gauge distribution).
    """
    if not fields:
        return [], (), 0
    reg = fields[0].reg
    space = EchelonSpace(reg.n, ideal)
    basis = []
    for z in fields:
        if space.add(_vec(z)):
            basis.append(z)
    growth = [len(basis)]
    frontier = list(basis)
    depth_cap = max_depth or reg.n + 1
    while len(basis) < reg.n and len(growth) <= depth_cap:
        new = []
        for u in frontier:
            cands = [lie_bracket(z, u) for z in basis if z is not u]
            if drift is not None:
                cands.append(lie_bracket(drift, u))
            for c in cands:
                c = c.normal_form(ideal)
                if c.is_zero(ideal):
                    continue
                if space.add(_vec(c)):
                    new.append(c)
        if not new:
            break
        basis.extend(new)
        frontier = new
        growth.append(len(basis))
    return basis, tuple(growth), len(growth)


# ---------------------------------------------------------------------------
# degree filtration
# ---------------------------------------------------------------------------


@dataclass
class Level:
    p: int
    S: list  # independent spanning list of S_p = span{D^j Z : j < p}
    DpZ: list  # D^p Z_a
    basis: list  # RREF basis of Z_p (coefficient vectors of length m)
    pivots: list
    N: list = field(default_factory=list)  # polynomial rows spanning the annihilator of S_p
    ND: list = field(default_factory=list)  # N . D^p Z, one row per annihilator


@dataclass
class Filtration:
    spec: object  # complete-form SystemSpec lifted to the working jet order
    levels: list
    indices: tuple  # delta_1..delta_N
    graded: list  # (p, coefficient vector) basis of the graded pieces
    span_dims: tuple  # dim S_1, dim S_2, ...

    @property
    def m(self):
        return len(self.spec.char_fields)

    @property
    def depth(self):
        return len(self.indices)

    def dims(self):
        return tuple(len(l.basis) for l in self.levels)

    def degree_of(self, a):
        for lvl in self.levels:
            if not lvl.basis and lvl.p == 0:
                continue
            r = reduce_against(a, lvl.basis, lvl.pivots, self.spec.ideal)
            if all(_is_zero(x, self.spec.ideal) for x in r):
                return lvl.p
        return None

    def d_span(self):
        """Spanning list of Z_D = span{D^m Z} (equals S_N)."""
        return self.levels[-1].S + [v for v in self.levels[-1].DpZ]

    def lift(self, J):
        reg = self.spec.reg.with_jet_order(J)
        spec = self.spec.lift(reg)

        def lv(vs):
            return [tuple(reg.lift(e) for e in v) for v in vs]

        levels = [Level(l.p, lv(l.S), lv(l.DpZ), lv(l.basis), list(l.pivots), lv(l.N), lv(l.ND))
                  for l in self.levels]
        graded = [(p, tuple(reg.lift(e) for e in a)) for p, a in self.graded]
        return Filtration(spec, levels, self.indices, graded, self.span_dims)


def _with_budget(fn, spec, J0, cap):
    J = J0
    while True:
        try:
            return fn(spec.with_jet_order(J))
        except JetBudgetExceeded:
            if J >= cap:
                raise FiltrationOverflow(f"jet budget {J} exhausted") from None
            J = min(cap, 2 * J)


def degree_filtration(c, max_degree=None):
    """Filtration Z_0 < Z_1 < ... < Z_N = Z of the tangential distribution with indices delta_p."""
    spec = c.spec if hasattr(c, "spec") else c
    n = spec.reg.n
    m = len(spec.char_fields)
    bound = max_degree if max_degree is not None else max(1, n - m + 1)
    return _with_budget(lambda s: _filtration(s, bound), spec, max(spec.reg.jet_order, bound, 2), 4 * bound + 8)


def _dot(y, v, ideal):
    acc = None
    for a, b in zip(y, v):
        if a and b:
            acc = a * b if acc is None else acc + a * b
    return _nf(acc, ideal) if acc is not None else RatFunc(y[0].num.ring.zero)


def _primitive(v, ring):
    """Scale a coefficient vector to coprime polynomial entries."""
    den = ring.one
    for e in v:
        if not e.den.is_ground:
            den = den.lcm(e.den)
    nums = [(e * RatFunc(den)).num for e in v]
    g = ring.zero
    for q in nums:
        if q:
            g = q if not g else g.gcd(q)
    if g and not g.is_ground:
        nums = [q.exquo(g) for q in nums]
    return tuple(RatFunc(q) for q in nums)


def _annihilator_update(N, new, ideal, ring):
    """Rows spanning {y : y.S = 0} after appending ``new`` to S, from the rows N for the old S."""
    if not new or not N:
        return N
    Q = FieldMatrix(tuple(tuple(_dot(y, v, ideal) for v in new) for y in N), ideal, len(new))
    out = []
    for c in left_kernel(Q):
        y = [None] * len(N[0])
        for ci, row in zip(c, N):
            if ci:
                for k, e in enumerate(row):
                    if e:
                        y[k] = ci * e if y[k] is None else y[k] + ci * e
        y = tuple(_nf(e, ideal) if e is not None else RatFunc(ring.zero) for e in y)
        out.append(_primitive(y, ring))
    return out


def _graded_reps(spec, prev_basis, basis, pivots, new_rows, p):
    """Representatives of Z_p / Z_{p-1}.

    Preference order: at degree 1 the new reduced-echelon rows when they are
    jet free (the fields themselves), then the jet vectors X_k = lam_k, then
    the new echelon rows scaled to polynomials.
    """
    reg, ideal = spec.reg, spec.ideal
    need = len(new_rows)
    cands = []
    if p == 1 and all(reg.max_jet(e) < 0 for v in new_rows for e in v):
        cands.extend(new_rows)
    for k in range(min(reg.jet_order, p) + 1):
        cands.append(tuple(reg.var(f"{fam}_{k}") for fam in spec.families))
    cands.extend(_primitive(v, reg.ring) for v in new_rows)
    chosen = []
    rank = len(prev_basis)
    for c in cands:
        if len(chosen) == need:
            break
        if not all(_is_zero(x, ideal) for x in reduce_against(c, basis, pivots, ideal)):
            continue
        r = rank_of_vectors(list(prev_basis) + chosen + [c], ideal)
        if r > rank:
            chosen.append(c)
            rank = r
    return chosen


def _filtration(spec, bound):
    reg = spec.reg
    ideal = spec.ideal
    Z = list(spec.char_fields)
    m = len(Z)
    if m == 0:
        return Filtration(spec, [], (), [], ())
    dop = spec.dop
    one, zero = reg.one(), reg.zero()
    N = [tuple(one if i == j else zero for j in range(reg.n)) for i in range(reg.n)]
    S = []
    Sspace = EchelonSpace(reg.n, ideal)
    levels = []
    span_dims = []
    prev_dim = 0
    indices = []
    graded = []
    prev_piv, prev_basis = [], []
    p = 0
    while True:
        if p > bound:
            raise FiltrationOverflow(f"degree filtration did not close within degree {bound}")
        DpZ = [tuple(_nf(e, ideal) for e in dop.power(z, p).comps) for z in Z]
        ND = [tuple(_dot(y, v, ideal) for v in DpZ) for y in N]
        if p == 0:
            basis, pivots = [], []
        else:
            sol = solve_linear(FieldMatrix(tuple(ND), ideal, m), [zero] * len(ND), ring=reg.ring)
            basis, pivots = rref(list(sol.nullspace), ideal)
        levels.append(Level(p, list(S), DpZ, basis, pivots, list(N), ND))
        if p > 0:
            d = len(basis)
            indices.append(d - prev_dim)
            new_piv = [k for k, c in enumerate(pivots) if c not in prev_piv]
            for a in _graded_reps(spec, prev_basis, basis, pivots, [basis[k] for k in new_piv], p):
                graded.append((p, a))
            prev_dim = d
            prev_piv = pivots
            prev_basis = basis
            if d == m:
                break
        new = []
        for v in DpZ:
            if Sspace.add(v):
                S.append(v)
                new.append(v)
        N = _annihilator_update(N, new, ideal, reg.ring)
        span_dims.append(len(S))
        p += 1
    return Filtration(spec, levels, tuple(indices), graded, tuple(span_dims))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass
class GaugeGenerator:
    order: int
    U: tuple  # U_(0..p), coefficient vectors over the tangential fields
    R: tuple  # R_(0..p-1)
    relation: tuple  # w_1..w_p as coefficient vectors
    delta_x: tuple  # A_n, coefficient field of eps^(n), n = 0..p-1
    delta_lam: tuple  # B_n, coefficient vector of eps^(n), n = 0..p
    param: str = "eps"
    factor: RatFunc | None = None  # eps -> factor * eps used for denominator clearing
    trivial: bool = False
    families: tuple = ()

    @property
    def leading(self):
        return self.U[0]

    def summary(self):
        reg = self.R[0].reg if self.R else None
        return {
            "parameter": self.param,
            "order": self.order,
            "trivial": self.trivial,
            "delta_x": {f"{self.param}^({n})": A.as_dict() for n, A in enumerate(self.delta_x)},
            "delta_lam": {f"{self.param}^({n})": {fam: to_literal(b) for fam, b in zip(self.families, B) if b}
                          for n, B in enumerate(self.delta_lam)},
            "factor": to_literal(self.factor) if self.factor is not None else "1",
            "U": [[to_literal(e) for e in u] for u in self.U],
        }


def _scalar_derivs(dop, a, j, ideal):
    """[a, Da, ..., D^j a] componentwise."""
    out = [tuple(a)]
    for _ in range(j):
        out.append(tuple(_nf(dop.scalar(x), ideal) if x else x for x in out[-1]))
    return out


def _d_power_combo(dop, a, j, Z, ideal, derivs=None):
    """Components of D^j(a.Z) = sum_i C(j,i) (D^i a).(D^(j-i) Z); only scalars get differentiated."""
    reg = dop.reg
    derivs = derivs or _scalar_derivs(dop, a, j, ideal)
    out = [reg.zero() for _ in range(reg.n)]
    for i in range(j + 1):
        c = comb(j, i)
        for x, z in zip(derivs[i], Z):
            if not x:
                continue
            f = dop.power(z, j - i)
            x = x * c
            for k, e in enumerate(f.comps):
                if e:
                    out[k] = out[k] + x * e
    return tuple(_nf(e, ideal) for e in out)


def _jet_orders(reg):
    orders = [-1] * len(reg.names)
    for fam in reg.families:
        for k in range(reg.jet_order + 1):
            orders[reg.index(f"{fam}_{k}")] = k
    return orders


def _ansatz_monomials(reg, d):
    """Exponent tuples of total degree <= d, highest jets first (so low-jet unknowns end up free)."""
    nv = len(reg.names)
    orders = _jet_orders(reg)
    monos = [(0,) * nv]
    layer = [()]
    for _ in range(d):
        layer = [t + (i,) for t in layer for i in range(t[-1] if t else 0, nv)]
        for t in layer:
            e = [0] * nv
            for i in t:
                e[i] += 1
            monos.append(tuple(e))
    monos = list(dict.fromkeys(monos))

    def key(e):
        js = sorted((orders[i] for i, x in enumerate(e) for _ in range(x)), reverse=True)
        return tuple(-j for j in js) + (len(js),), tuple(-x for x in e)
    return sorted(monos, key=key)


_ANSATZ_LIMIT = 1500


def _poly_solve(filt, j, r, degree):
    """Polynomial a of degree <= ``degree`` with N_j.(a.D^j Z + r) = 0, via exact QQ elimination.

    Unknowns are ordered highest jet first and free unknowns are set to zero,
    which makes the choice deterministic.  Returns None when no such a exists.
    """
    spec = filt.spec
    reg, ideal = spec.reg, spec.ideal
    lvl = filt.levels[j]
    m = filt.m
    if any(not e.den.is_ground for row in lvl.ND for e in row) or any(not e.den.is_ground for e in r):
        return None
    rhs = [-_dot(y, r, ideal) for y in lvl.N]
    if any(not e.den.is_ground for e in rhs):
        return None
    monos = _ansatz_monomials(reg, degree)
    if len(monos) * m > _ANSATZ_LIMIT:
        return None
    ring = reg.ring
    quotient = ideal is not None and not ideal.is_zero_ideal()
    eq_index = {}
    cols = {}
    ncol = 0
    for mu in monos:
        mono = ring.from_dict({mu: 1})
        for a in range(m):
            col = {}
            for row, ndrow in enumerate(lvl.ND):
                q = ndrow[a].num
                if not q:
                    continue
                q = q * mono
                if quotient:
                    q = ideal.reduce(q)
                for mon, c in q.items():
                    key = (row, mon)
                    e = eq_index.setdefault(key, len(eq_index))
                    col[e] = c
            cols[ncol] = col
            ncol += 1
    b = {}
    for row, e in enumerate(rhs):
        for mon, c in e.num.items():
            key = (row, mon)
            if key not in eq_index:
                eq_index[key] = len(eq_index)
            b[eq_index[key]] = c
    nrow = len(eq_index)
    if nrow == 0:
        return tuple(reg.zero() for _ in range(m))
    rows = {}
    for cidx, col in cols.items():
        for e, c in col.items():
            rows.setdefault(e, {})[cidx] = c
    for e, c in b.items():
        rows.setdefault(e, {})[ncol] = c
    dm = DomainMatrix(rows, (nrow, ncol + 1), QQ)
    red, pivots = dm.rref()
    if pivots and pivots[-1] == ncol:
        return None
    red = red.to_sdm()
    x = {}
    for i, pc in enumerate(pivots):
        v = red.get(i, {}).get(ncol)
        if v:
            x[pc] = v
    comps = [{} for _ in range(m)]
    for cidx, v in x.items():
        mu, a = monos[cidx // m], cidx % m
        comps[a][mu] = v
    return tuple(RatFunc(ring.from_dict(c)) if c else reg.zero() for c in comps)


def _solve_level(filt, j, r):
    """Particular a with a.D^j Z = -r modulo S_j.

    A low-degree polynomial solution is preferred; otherwise the rational
    solution reduced modulo Z_j is returned.
    """
    for d in (0, 1, 2):
        a = _poly_solve(filt, j, r, d)
        if a is not None:
            return a
    return _solve_level_rational(filt, j, r)


def _solve_level_rational(filt, j, r):
    """Particular a with a.D^j Z = -r modulo S_j, reduced modulo Z_j."""
    spec = filt.spec
    reg, ideal = spec.reg, spec.ideal
    lvl = filt.levels[j]
    m = filt.m
    # a.D^j Z + r lies in S_j iff every annihilator of S_j kills it
    rhs = [-_dot(y, r, ideal) for y in lvl.N]
    sol = solve_linear(FieldMatrix(tuple(lvl.ND), ideal, m), rhs, ring=reg.ring)
    if sol is None:
        raise StaleCertificate(f"relation cannot be continued at level {j}: degree certificate is stale")
    a = sol.particular[:m]
    return reduce_against(a, lvl.basis, lvl.pivots, ideal)


def synthesize_generator(a, filt, param="eps", clear=True, relation=None):
    """Gauge generator for w = a.Z.  ``relation`` optionally fixes w_1..w_p instead of solving for them."""
    a = tuple(filt.spec.reg.lift(x) if not isinstance(x, int) else filt.spec.reg.const(x) for x in a)
    p = filt.degree_of(a)
    if p is None:
        raise StaleCertificate("coefficient vector is not in the tangential distribution's filtration")

    def run(f):
        aa = tuple(f.spec.reg.lift(x) for x in a)
        rel = None if relation is None else [tuple(f.spec.reg.lift(x) for x in v) for v in relation]
        return _synthesize(aa, p, f, param, clear, rel)

    f = filt
    J = filt.spec.reg.jet_order
    K = max([filt.spec.reg.max_jet(x) for x in a] + [0])
    need = K + 2 * p + 2
    while True:
        if f.spec.reg.jet_order < need:
            f = f.lift(need)
        try:
            return run(f)
        except JetBudgetExceeded:
            need = 2 * max(need, J)
            if need > 8 * (K + 2 * p + 2) + 16:
                raise


def _synthesize(a, p, filt, param, clear, relation):
    spec = filt.spec
    reg, ideal = spec.reg, spec.ideal
    Z = list(spec.char_fields)
    dop = spec.dop
    U = [a]
    if relation is not None:
        U.extend(relation)
        if len(relation) != p:
            raise ValueError(f"relation must have {p} terms")
    else:
        r = _d_power_combo(dop, a, p, Z, ideal)
        for k in range(1, p + 1):
            j = p - k
            ak = _solve_level(filt, j, r)
            U.append(ak)
            r = tuple(_nf(x + y, ideal) for x, y in zip(r, _d_power_combo(dop, ak, j, Z, ideal)))
        if not all(_is_zero(x, ideal) for x in r):
            raise AssertionError("relation residual does not vanish")
    # R_(n) = sum_m D^m W_(n-m), expanded by Leibniz over the cached D^k Z
    dU = [_scalar_derivs(dop, u, p - k, ideal) for k, u in enumerate(U)]
    R = []
    for n in range(p):
        acc = [reg.zero() for _ in range(reg.n)]
        for m_ in range(n + 1):
            v = _d_power_combo(dop, U[n - m_], m_, Z, ideal, dU[n - m_][:m_ + 1])
            acc = [x + y for x, y in zip(acc, v)]
        R.append(VectorField(reg, tuple(_nf(e, ideal) for e in acc)))
    A = [R[p - n - 1] for n in range(p)]
    B = [U[p - n] for n in range(p + 1)]
    g = GaugeGenerator(p, tuple(U), tuple(R), tuple(U[1:]), tuple(A), tuple(B), param, None, False, spec.families)
    g.trivial = all(r.is_zero(ideal) for r in R) and all(_is_zero(x, ideal) for u in U for x in u)
    if clear:
        g = clear_denominators(g, spec)
    return g


def clear_denominators(g, spec, max_power=None):
    """Reparametrize eps -> L^N eps (L the common denominator) so all coefficients are polynomial."""
    reg, ideal = spec.reg, spec.ideal
    dens = reg.ring.one
    for A in g.delta_x:
        for c in A.comps:
            if not c.den.is_ground:
                dens = dens.lcm(c.den)
    for B in g.delta_lam:
        for c in B:
            if not c.den.is_ground:
                dens = dens.lcm(c.den)
    if dens.is_ground:
        return g
    if ideal.contains(dens):
        raise DenominatorClearingError("common denominator lies in the constraint ideal: " + poly_literal(dens))
    L = RatFunc(dens)
    p = g.order
    top = max_power or (2 * p + 6)
    dop = spec.dop
    for N in range(1, top + 1):
        f = L ** N
        fd = [f]
        for _ in range(p + 1):
            fd.append(-dop.scalar(fd[-1]))
        A = []
        for k in range(p):
            acc = VectorField.zero(reg)
            for n in range(k, p):
                acc = acc + g.delta_x[n].scale(fd[n - k] * comb(n, k))
            A.append(acc)
        B = []
        for k in range(p + 1):
            acc = [reg.zero() for _ in g.delta_lam[0]]
            for n in range(k, p + 1):
                coef = fd[n - k] * comb(n, k)
                acc = [x + coef * y for x, y in zip(acc, g.delta_lam[n])]
            B.append(tuple(acc))
        if all(c.den.is_ground for F in A for c in F.comps) and all(c.den.is_ground for b in B for c in b):
            return GaugeGenerator(g.order, g.U, g.R, g.relation, tuple(A), tuple(B), g.param, f, g.trivial,
                                  g.families)
    raise DenominatorClearingError(f"could not clear denominators with powers of {poly_literal(dens)} up to {top}")


def assemble_generator(a, relation, filt, param="eps"):
    """Generator from an externally supplied relation (w_1..w_p), no solving, no clearing."""
    return synthesize_generator(a, filt, param=param, clear=False, relation=relation)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class SymmetryReport:
    ok: bool
    residuals: list = field(default_factory=list)  # (label, literal)

    def __bool__(self):
        return self.ok


def verify_symmetry(g, c):
    """Substitute the transformation into d/dt x - V - lam Z on-shell and check triviality.

    Coefficient of eps^(n):  dA_n/dt + A_{n-1} - (A_n . d)(V + lam Z) - B_n . Z,
    with the total derivative taken along the equations of motion.
    """
    spec = c.spec if hasattr(c, "spec") else c
    reg = g.delta_x[0].reg if g.delta_x else spec.reg
    if reg != spec.reg:
        spec = spec.lift(reg)
    ideal = spec.ideal
    Z = list(spec.char_fields)
    lam = [reg.var(f"{fam}_0") for fam in spec.families]
    X0 = spec.drift + combine(lam, Z, reg)
    p = g.order
    out = []
    for n in range(p + 1):
        A = g.delta_x[n] if n < p else VectorField.zero(reg)
        comps = []
        for i in range(reg.n):
            dA = reg.jet_shift(A.comps[i]) + apply_field(X0, A.comps[i])
            val = dA - apply_field(A, X0.comps[i])
            if n >= 1:
                val = val + g.delta_x[n - 1].comps[i]
            for b, z in zip(g.delta_lam[n], Z):
                if b:
                    val = val - b * z.comps[i]
            comps.append(val)
        res = VectorField(reg, tuple(comps))
        if not res.is_zero(ideal):
            out.append((f"{g.param}^({n}) in equations of motion", repr(res.normal_form(ideal))))
    for n, A in enumerate(g.delta_x):
        for t in spec.constraints:
            v = apply_field(A, RatFunc(t))
            if not ideal.is_trivial(v):
                out.append((f"{g.param}^({n}) in delta {poly_literal(t)}", to_literal(ideal.normal_form(v))))
    return SymmetryReport(not out, out)


def check_prop2(g, ideal):
    """R_(0..p-1) must be independent over F_I."""
    if g.order == 0:
        return True
    reg = g.R[0].reg
    if ideal is not None and ideal.reg != reg:
        ideal = ideal.with_registry(reg)
    return rank_of_vectors([r.comps for r in g.R], ideal) == g.order


# ---------------------------------------------------------------------------
# gauge distribution
# ---------------------------------------------------------------------------


@dataclass
class GaugeDistribution:
    basis: list
    growth: tuple  # Lie flag of the tangential distribution
    depth: int
    filtration: Filtration
    closure_witnesses: list  # coefficients expressing each basis field in the D-span
    generators: list = field(default_factory=list)
    prop3: bool = True

    @property
    def dim(self):
        return len(self.basis)

    @property
    def indices(self):
        return self.filtration.indices


def gauge_distribution(c, synthesize=True, clear=True):
    spec = c.spec if hasattr(c, "spec") else c
    ideal = spec.ideal
    Z = list(spec.char_fields)
    basis, _, _ = lie_closure(Z, ideal, drift=spec.drift)
    _, growth, depth = lie_closure(Z, ideal)
    filt = degree_filtration(spec, max_degree=max(1, len(basis) - len(Z) + 1))
    witnesses, prop3 = prop3_check(basis, filt)
    gd = GaugeDistribution(basis, growth, depth, filt, witnesses, [], prop3)
    if synthesize:
        gens = []
        for k, (p, a) in enumerate(filt.graded):
            g = synthesize_generator(a, filt, param=f"eps{k + 1}", clear=clear)
            gens.append(g)
        gd.generators = [g for g in gens if not g.trivial]
        gd.trivial_generators = [g for g in gens if g.trivial]
    return gd


def prop3_check(basis, filt):
    """Every gauge-distribution field lies in span{D^m Z} and the dimensions agree."""
    if not basis:
        return [], filt.m == 0 or not filt.levels
    spec = filt.spec
    reg = spec.reg
    dspan = EchelonSpace(reg.n, spec.ideal)
    for v in filt.d_span():
        dspan.add(v)
    witnesses = []
    ok = True
    for b in basis:
        coeffs = span_membership(tuple(reg.lift(e) for e in b.comps), dspan.vectors, spec.ideal)
        witnesses.append(coeffs)
        ok = ok and coeffs is not None
    return witnesses, ok and len(dspan) == len(basis)
