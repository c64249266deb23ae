"""Vector fields, polyvectors and the evolution operator D on lambda-dependent fields.

Sign convention for the Schouten bracket.  A polyvector is written as a
polynomial in odd variables xi_i (xi_i <-> d/dx^i) and

    [P, Q] = sum_i (P d<-/dxi_i)(d/dx^i Q) - (d/dx^i P)(d->/dxi_i Q)

with right (d<-) and left (d->) odd derivatives.  Consequences used across the
package: [X, f] = X f, [f, X] = -X f, [X, Y] is the Lie bracket, and
[d_q ^ d_p, q] = -d_p.  Hamiltonian fields are V = [P, H], Z_a = [P, T_a].
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import RatFunc, as_ratfunc, to_literal


@dataclass(frozen=True)
class VectorField:
    reg: object
    comps: tuple

    def __post_init__(self):
        comps = tuple(as_ratfunc(c, self.reg) for c in self.comps)
        if len(comps) != self.reg.n:
            raise ValueError(f"vector field has {len(comps)} components, registry has {self.reg.n} phase variables")
        object.__setattr__(self, "comps", comps)

    @classmethod
    def zero(cls, reg):
        return cls(reg, tuple(reg.zero() for _ in range(reg.n)))

    @classmethod
    def coordinate(cls, reg, i):
        return cls(reg, tuple(reg.one() if j == i else reg.zero() for j in range(reg.n)))

    @classmethod
    def parse(cls, reg, mapping):
        """Build from {phase_var: literal}; missing components are zero."""
        unknown = [k for k in mapping if k not in reg.phase]
        if unknown:
            raise KeyError(f"unknown phase variable(s) {unknown} in vector field")
        return cls(reg, tuple(reg.parse(str(mapping[x])) if x in mapping else reg.zero() for x in reg.phase))

    def __add__(self, other):
        return VectorField(self.reg, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other):
        return VectorField(self.reg, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self):
        return VectorField(self.reg, tuple(-a for a in self.comps))

    def scale(self, f):
        f = as_ratfunc(f, self.reg)
        return VectorField(self.reg, tuple(f * a for a in self.comps))

    def __rmul__(self, f):
        return self.scale(f)

    def is_zero(self, ideal=None):
        if ideal is None:
            return all(c.is_zero() for c in self.comps)
        return all(ideal.is_trivial(c) for c in self.comps)

    def normal_form(self, ideal):
        if ideal is None or ideal.is_zero_ideal():
            return self
        return VectorField(self.reg, tuple(ideal.normal_form(c) for c in self.comps))

    def lift(self, reg):
        if reg == self.reg:
            return self
        return VectorField(reg, tuple(reg.lift(c) for c in self.comps))

    def as_dict(self):
        return {x: to_literal(c) for x, c in zip(self.reg.phase, self.comps) if not c.is_zero()}

    def __repr__(self):
        terms = [f"({to_literal(c)})*d_{x}" for x, c in zip(self.reg.phase, self.comps) if not c.is_zero()]
        return "VectorField(" + (" + ".join(terms) or "0") + ")"


def apply_field(X, f):
    f = as_ratfunc(f, X.reg)
    out = X.reg.zero()
    for i, c in enumerate(X.comps):
        if c:
            d = X.reg.partial(f, i)
            if d:
                out = out + c * d
    return out


def lie_bracket(X, Y):
    return VectorField(X.reg, tuple(apply_field(X, b) - apply_field(Y, a) for a, b in zip(X.comps, Y.comps)))


def jet_shift(f, reg):
    return reg.jet_shift(f)


def jet_shift_field(w):
    return VectorField(w.reg, tuple(w.reg.jet_shift(c) for c in w.comps))


def combine(coeffs, fields, reg):
    """sum_a coeffs[a] * fields[a]."""
    out = [reg.zero() for _ in range(reg.n)]
    for a, F in zip(coeffs, fields):
        if a:
            for i, c in enumerate(F.comps):
                if c:
                    out[i] = out[i] + a * c
    return VectorField(reg, tuple(out))


class DOperator:
    """D w = -d w - [V + lam^a_0 Z_a, w], memoized on (w, power)."""

    def __init__(self, drift, fields, families):
        self.reg = drift.reg
        self.drift = drift
        self.fields = tuple(fields)
        self.families = tuple(families)
        lam0 = [self.reg.var(f"{fam}_0") for fam in self.families]
        self.total = drift + combine(lam0, self.fields, self.reg)
        self._memo = {}

    def scalar(self, a):
        a = as_ratfunc(a, self.reg)
        return -self.reg.jet_shift(a) - apply_field(self.total, a)

    def __call__(self, w):
        key = (w, 1)
        hit = self._memo.get(key)
        if hit is None:
            hit = -jet_shift_field(w) - lie_bracket(self.total, w)
            self._memo[key] = hit
        return hit

    def power(self, w, m):
        if m == 0:
            return w
        key = (w, m)
        hit = self._memo.get(key)
        if hit is None:
            hit = self(self.power(w, m - 1))
            self._memo[key] = hit
        return hit

    def lam_field(self, k):
        """X_k = lam^a_k Z_a."""
        lam = [self.reg.var(f"{fam}_{k}") for fam in self.families]
        return combine(lam, self.fields, self.reg)


def d_operator(w, sys):
    return sys.d_op(w)


# ---------------------------------------------------------------------------
# polyvectors
# ---------------------------------------------------------------------------


def _merge(A, B):
    """xi_A xi_B = sign * xi_C, or None when A and B share an index."""
    if set(A) & set(B):
        return None
    inv = 0
    for a in A:
        for b in B:
            if a > b:
                inv += 1
    return (-1) ** inv, tuple(sorted(A + B))


@dataclass(frozen=True)
class PolyVector:
    reg: object
    degree: int
    comps: tuple  # sorted tuple of (index tuple, RatFunc), zero entries dropped

    def __post_init__(self):
        if not 0 <= self.degree <= 3:
            raise ValueError("polyvector degree must be 0..3")
        merged = {}
        for K, c in (self.comps.items() if isinstance(self.comps, dict) else self.comps):
            K = tuple(K)
            if len(K) != self.degree:
                raise ValueError(f"index {K} does not match degree {self.degree}")
            if len(set(K)) < len(K):
                continue
            order = sorted(range(len(K)), key=lambda t: K[t])
            sign = _perm_parity(order)
            Ks = tuple(sorted(K))
            c = as_ratfunc(c, self.reg)
            merged[Ks] = merged.get(Ks, self.reg.zero()) + (c if sign > 0 else -c)
        object.__setattr__(self, "comps", tuple(sorted((K, c) for K, c in merged.items() if c)))

    @classmethod
    def scalar(cls, reg, f):
        return cls(reg, 0, {(): as_ratfunc(f, reg)})

    @classmethod
    def from_field(cls, X):
        return cls(X.reg, 1, {(i,): c for i, c in enumerate(X.comps) if c})

    @classmethod
    def bivector(cls, reg, entries):
        """entries: iterable of (i, j, coefficient) meaning coefficient * d_i ^ d_j."""
        comps = {}
        for i, j, c in entries:
            if i == j:
                continue
            c = as_ratfunc(c, reg)
            K, s = ((i, j), 1) if i < j else ((j, i), -1)
            comps[K] = comps.get(K, reg.zero()) + (c if s > 0 else -c)
        return cls(reg, 2, comps)

    def get(self, K):
        for k, c in self.comps:
            if k == K:
                return c
        return self.reg.zero()

    def as_dict(self):
        return dict(self.comps)

    def to_field(self):
        if self.degree != 1:
            raise ValueError("not a vector field")
        d = self.as_dict()
        return VectorField(self.reg, tuple(d.get((i,), self.reg.zero()) for i in range(self.reg.n)))

    def to_scalar(self):
        if self.degree != 0:
            raise ValueError("not a scalar")
        return self.get(())

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        d = self.as_dict()
        for K, c in other.comps:
            d[K] = d.get(K, self.reg.zero()) + c
        return PolyVector(self.reg, self.degree, d)

    def __neg__(self):
        return PolyVector(self.reg, self.degree, {K: -c for K, c in self.comps})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        f = as_ratfunc(f, self.reg)
        return PolyVector(self.reg, self.degree, {K: f * c for K, c in self.comps})

    def is_zero(self, ideal=None):
        if ideal is None:
            return not self.comps
        return all(ideal.is_trivial(c) for _, c in self.comps)

    def __repr__(self):
        names = self.reg.phase
        terms = []
        for K, c in self.comps:
            basis = "^".join(f"d_{names[k]}" for k in K) or "1"
            terms.append(f"({to_literal(c)})*{basis}")
        return f"PolyVector[{self.degree}](" + (" + ".join(terms) or "0") + ")"


def _perm_parity(order):
    inv = 0
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                inv += 1
    return -1 if inv % 2 else 1


def wedge(P, Q):
    if P.degree + Q.degree > 3:
        raise ValueError("wedge product degree exceeds 3")
    out = {}
    for A, a in P.comps:
        for B, b in Q.comps:
            m = _merge(A, B)
            if m is None:
                continue
            s, C = m
            v = a * b
            out[C] = out.get(C, P.reg.zero()) + (v if s > 0 else -v)
    return PolyVector(P.reg, P.degree + Q.degree, out)


def _odd_derivative(P, i, right):
    """Odd derivative d/dxi_i from the right or from the left."""
    out = {}
    d = P.degree
    for K, c in P.comps:
        if i not in K:
            continue
        pos = K.index(i)
        s = (-1) ** (d - 1 - pos) if right else (-1) ** pos
        rest = K[:pos] + K[pos + 1:]
        out[rest] = out.get(rest, P.reg.zero()) + (c if s > 0 else -c)
    return PolyVector(P.reg, d - 1, out)


def _even_derivative(P, i):
    return PolyVector(P.reg, P.degree, {K: P.reg.partial(c, i) for K, c in P.comps})


def schouten(P, Q):
    """Graded Schouten-Nijenhuis bracket; see the module docstring for signs."""
    deg = P.degree + Q.degree - 1
    if P.degree + Q.degree > 4:
        raise ValueError(f"unsupported Schouten degrees ({P.degree}, {Q.degree})")
    reg = P.reg
    if deg < 0:
        return PolyVector(reg, 0, {})
    total = PolyVector(reg, deg, {})
    for i in range(reg.n):
        if P.degree:
            dP = _odd_derivative(P, i, right=True)
            if dP.comps:
                dQ = _even_derivative(Q, i)
                if dQ.comps:
                    total = total + wedge(dP, dQ)
        if Q.degree:
            dQ = _odd_derivative(Q, i, right=False)
            if dQ.comps:
                dP = _even_derivative(P, i)
                if dP.comps:
                    total = total - wedge(dP, dQ)
    return total


def jacobiator(P):
    """Independent coordinate formula for [P, P] of a bivector: J^{ijk} = 2 * cyclic sum P^{il} d_l P^{jk}."""
    reg = P.reg
    n = reg.n
    comp = {}
    for K, c in P.comps:
        i, j = K
        comp[(i, j)] = c
        comp[(j, i)] = -c
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                acc = reg.zero()
                for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
                    for l in range(n):
                        pal = comp.get((a, l))
                        if pal is None:
                            continue
                        pbc = comp.get((b, cc))
                        if pbc is None:
                            continue
                        acc = acc + pal * reg.partial(pbc, l)
                if acc:
                    out[(i, j, k)] = acc * 2
    return PolyVector(reg, 3, out)
