"""Exact linear algebra over the rational-function field and over F_I.

Everything goes through one fraction-free Gauss-Jordan routine.  Rows are
first scaled to polynomials; in ring mode each step divides exactly by the
previous pivot (Bareiss), in quotient mode the division is skipped and every
entry is reduced modulo the ideal instead, which keeps F_I semantics since
all pivots are non-members.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import RatFunc, poly_literal


def total_degree(p):
    if not p:
        return -1
    return max(sum(m) for m in p.monoms())


@dataclass(frozen=True)
class MinorSelection:
    rows: tuple
    cols: tuple
    det: RatFunc | None = None

    @property
    def size(self):
        return len(self.rows)

    def certificate(self):
        """Polynomials that must not vanish for the selection to stay valid."""
        if self.det is None or self.det.is_const():
            return ()
        return (self.det.num,)


@dataclass(frozen=True)
class FieldMatrix:
    rows: tuple
    ideal: object = None
    ncols: int = field(default=-1)

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if self.ncols < 0:
            object.__setattr__(self, "ncols", len(rows[0]) if rows else 0)
        if any(len(r) != self.ncols for r in rows):
            raise ValueError("ragged matrix")

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self):
        return FieldMatrix(tuple(zip(*self.rows)) if self.rows else (), self.ideal,
                           self.nrows if self.rows else 0)

    def submatrix(self, rows, cols):
        return FieldMatrix(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), self.ideal, len(cols))

    def literal(self):
        return [[str(e) for e in r] for r in self.rows]


def _is_zero(p, ideal):
    if not p:
        return True
    return ideal is not None and ideal.contains(p)


def _clear_row(row, ring):
    """Scale a row of RatFuncs to polynomials; returns (poly row, scale)."""
    L = ring.one
    for e in row:
        if e.den != 1:
            L = L.lcm(e.den)
    if L == 1:
        return [e.num for e in row], L
    return [e.num * L.exquo(e.den) if e else ring.zero for e in row], L


def _eliminate(prow, npiv, ideal, jordan):
    """Fraction-free elimination in place on polynomial rows.

    Pivots are searched among the first ``npiv`` columns: minimal numerator
    total degree, ties by lowest (row, col).  Returns the pivot list
    [(row, col), ...] in selection order.
    """
    nr = len(prow)
    quotient = ideal is not None and not ideal.is_zero_ideal()
    if quotient:
        for r in prow:
            for j, e in enumerate(r):
                r[j] = ideal.reduce(e)
    used_r, used_c = set(), set()
    pivots = []
    prev = None
    while True:
        best = None
        for i in range(nr):
            if i in used_r:
                continue
            row = prow[i]
            for j in range(npiv):
                if j in used_c:
                    continue
                e = row[j]
                if not e:
                    continue
                key = (total_degree(e), i, j)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        _, r, c = best
        piv = prow[r][c]
        pivots.append((r, c))
        used_r.add(r)
        used_c.add(c)
        targets = [i for i in range(nr) if i != r and (jordan or i not in used_r)]
        for i in targets:
            row = prow[i]
            a = row[c]
            if not a:
                if not quotient:
                    # keep Bareiss' invariant: every non-pivot row carries the same scale
                    if prev is None:
                        row[:] = [piv * e for e in row]
                    else:
                        row[:] = [(piv * e).exquo(prev) if e else e for e in row]
                continue
            prow_r = prow[r]
            new = []
            for j, e in enumerate(row):
                v = piv * e - a * prow_r[j]
                if quotient:
                    v = ideal.reduce(v)
                elif prev is not None and v:
                    v = v.exquo(prev)
                new.append(v)
            row[:] = new
        prev = None if quotient else piv
        if len(pivots) == min(nr, npiv):
            break
    return pivots


def _prepare(M, extra=None):
    ring = _ring_of(M, extra)
    rows = []
    scales = []
    for i, r in enumerate(M.rows):
        full = list(r) + ([extra[i]] if extra is not None else [])
        full = [e if isinstance(e, RatFunc) else RatFunc(e) for e in full]
        p, L = _clear_row(full, ring)
        rows.append(p)
        scales.append(L)
    return rows, scales


def _ring_of(M, extra=None):
    for r in M.rows:
        for e in r:
            return e.ring
    if extra:
        e = extra[0]
        return e.ring
    raise ValueError("empty matrix has no ring")


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def determinant(M):
    """Exact determinant over the rational-function field (ring mode)."""
    n = M.nrows
    if n != M.ncols:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return None
    ring = _ring_of(M)
    rows, scales = _prepare(FieldMatrix(M.rows, None, M.ncols))
    pivots = _eliminate(rows, n, None, jordan=False)
    if len(pivots) < n:
        return RatFunc(ring.zero)
    r_order = [r for r, _ in pivots]
    c_order = [c for _, c in pivots]
    sign = _perm_sign(r_order) * _perm_sign(c_order)
    last_r, last_c = pivots[-1]
    det = rows[last_r][last_c]
    den = ring.one
    for L in scales:
        den *= L
    return RatFunc(det * sign, den)


def generic_rank(M):
    """Rank over F (or F_I) with a certified maximal minor."""
    if M.nrows == 0 or M.ncols == 0:
        return 0, MinorSelection((), ())
    rows, _ = _prepare(M)
    pivots = _eliminate(rows, M.ncols, M.ideal, jordan=False)
    if not pivots:
        return 0, MinorSelection((), ())
    rsel = tuple(sorted(r for r, _ in pivots))
    csel = tuple(sorted(c for _, c in pivots))
    det = determinant(M.submatrix(rsel, csel))
    if M.ideal is not None and det is not None and M.ideal.contains(det.num):
        raise AssertionError("selected minor lies in the ideal: " + poly_literal(det.num))
    return len(pivots), MinorSelection(rsel, csel, det)


@dataclass(frozen=True)
class LinearSolution:
    particular: tuple
    nullspace: tuple
    rank: int
    pivots: tuple


def _normalize(f, ideal):
    if ideal is None or ideal.is_zero_ideal():
        return f
    return ideal.normal_form(f)


def solve_linear(M, b, ring=None):
    """Particular solution and nullspace basis of M x = b, or None when inconsistent."""
    if len(b) != M.nrows:
        raise ValueError("dimension mismatch between matrix and right-hand side")
    ideal = M.ideal
    n = M.ncols
    if ring is None:
        ring = _ring_of(M, list(b))
    if M.nrows == 0:
        zero, one = RatFunc(ring.zero), RatFunc(ring.one)
        null = [tuple(one if i == j else zero for i in range(n)) for j in range(n)]
        return LinearSolution(tuple([zero] * n), tuple(null), 0, ())
    rows, _ = _prepare(M, list(b))
    pivots = _eliminate(rows, n, ideal, jordan=True)
    piv_rows = {r for r, _ in pivots}
    for i, row in enumerate(rows):
        if i not in piv_rows and not _is_zero(row[n], ideal):
            return None
    zero = RatFunc(ring.zero)
    one = RatFunc(ring.one)
    x = [zero] * n
    for r, c in pivots:
        x[c] = _normalize(RatFunc(rows[r][n], rows[r][c]), ideal)
    pivot_cols = [c for _, c in pivots]
    free = [j for j in range(n) if j not in pivot_cols]
    null = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for r, c in pivots:
            if rows[r][f]:
                v[c] = _normalize(RatFunc(-rows[r][f], rows[r][c]), ideal)
        null.append(tuple(v))
    return LinearSolution(tuple(x), tuple(null), len(pivots), tuple(pivots))


def nullspace(M):
    ring = _ring_of(M)
    sol = solve_linear(M, [RatFunc(ring.zero)] * M.nrows)
    return list(sol.nullspace)


def left_kernel(M):
    return nullspace(M.transpose())


def span_membership(v, basis, ideal=None):
    """Coefficients a with v = sum a_i basis_i over F / F_I, or None."""
    if not basis:
        return () if all(_is_zero(e.num, ideal) for e in v) else None
    dim = len(v)
    cols = FieldMatrix(tuple(tuple(b[i] for b in basis) for i in range(dim)), ideal, len(basis))
    sol = solve_linear(cols, list(v))
    if sol is None:
        return None
    return sol.particular


class EchelonSpace:
    """Growing subspace of F^n (or F_I^n) kept as an independent spanning list.

    Independence is maintained incrementally with a rank test per insertion;
    used for filtration bookkeeping where spans grow one vector at a time.
    """

    def __init__(self, dim, ideal=None):
        self.dim = dim
        self.ideal = ideal
        self.vectors = []

    def __len__(self):
        return len(self.vectors)

    def contains(self, v):
        return span_membership(v, self.vectors, self.ideal) is not None

    def add(self, v):
        """Insert v if independent; returns True if the span grew."""
        if all(_is_zero(e.num, self.ideal) for e in v):
            return False
        if self.vectors and self.contains(v):
            return False
        self.vectors.append(tuple(v))
        return True


def rank_of_vectors(vectors, ideal=None):
    if not vectors:
        return 0
    dim = len(vectors[0])
    M = FieldMatrix(tuple(tuple(v[i] for v in vectors) for i in range(dim)), ideal, len(vectors))
    return generic_rank(M)[0]
