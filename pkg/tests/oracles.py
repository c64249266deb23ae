"""Independent reference computations built directly on sympy/numpy.

Nothing here calls into the package beyond reading raw polynomial data, so the
tests compare two separate code paths.
"""

from __future__ import annotations

import numpy as np
import sympy as sp


def expr(f, reg):
    """sympy expression of a RatFunc/PolyElement with ext vars substituted by exp()."""
    num, den = (f.num, f.den) if hasattr(f, "num") else (f, f.ring.one)
    e = num.as_expr() / den.as_expr()
    subs = {}
    for x in reg.ext:
        subs[sp.Symbol(x.name)] = sp.exp(sp.sympify(x.exponent.replace("^", "**")))
    return e.subs(subs) if subs else e


def phase_symbols(reg):
    return [sp.Symbol(x) for x in reg.phase]


def jet_symbol(fam, k):
    return sp.Symbol(f"{fam}_{k}")


def field_exprs(X):
    return [expr(c, X.reg) for c in X.comps]


def bracket(X, Y, xs):
    """[X, Y]^i = X(Y^i) - Y(X^i) by symbolic differentiation."""
    return [sp.simplify(sum(X[j] * sp.diff(Y[i], xs[j]) - Y[j] * sp.diff(X[i], xs[j]) for j in range(len(xs))))
            for i in range(len(xs))]


def total_derivative(e, families, order):
    """d/dt acting only on jets: lam_k -> lam_{k+1}."""
    return sum(sp.diff(e, jet_symbol(f, k)) * jet_symbol(f, k + 1) for f in families for k in range(order + 1))


def d_operator(w, drift, fields, families, xs, order):
    """Dw = -d w - [V + lam_0 Z, w], all as sympy component lists."""
    lam0 = [jet_symbol(f, 0) for f in families]
    X0 = [drift[i] + sum(l * z[i] for l, z in zip(lam0, fields)) for i in range(len(xs))]
    br = bracket(X0, w, xs)
    return [sp.expand(-total_derivative(w[i], families, order) - br[i]) for i in range(len(xs))]


def groebner_reduce(f, gens, symbols):
    """Remainder of f modulo the grevlex Groebner basis of gens (sympy)."""
    if not gens:
        return sp.expand(f)
    G = sp.groebner(gens, *symbols, order="grevlex")
    return G.reduce(sp.expand(f))[1]


def numeric_rank(rows, tol=1e-9):
    A = np.array(rows, dtype=float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def evaluate(e, symbols, point):
    return complex(e.subs(dict(zip(symbols, point)))).real


def ext_symbols(reg):
    return [sp.Symbol(e.name) for e in reg.ext]


def partial(e, reg, i):
    """d/dx^i with ext vars kept as symbols: d u/d x = (d exponent/d x) u."""
    x = sp.Symbol(reg.phase[i])
    out = sp.diff(e, x)
    for ev in reg.ext:
        u = sp.Symbol(ev.name)
        out += sp.diff(e, u) * sp.diff(sp.sympify(ev.exponent.replace("^", "**")), x) * u
    return out


def raw(f):
    """sympy expression keeping ext vars as plain symbols."""
    return f.num.as_expr() / f.den.as_expr()
