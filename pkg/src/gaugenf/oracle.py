"""Numerical cross-checks on integrated trajectories.

Everything here is floating point and deliberately independent of the exact
machinery: symbolic objects are compiled with ``sympy.lambdify`` and the
checks only compare numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline
from scipy.special import eval_hermite

from .algebra import as_ratfunc
from .errors import NonFiniteState, ProjectionDiverged
from .geometry import VectorField, apply_field, combine

# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------


def _symbols(reg):
    return [sp.Symbol(n) for n in reg.names]


def _ext_subs(reg):
    subs = {}
    for e in reg.ext:
        expo = sp.sympify(e.exponent.replace("^", "**"), locals={x: sp.Symbol(x) for x in reg.phase})
        subs[sp.Symbol(e.name)] = sp.exp(expo)
    return subs


def _expr(f, reg):
    f = as_ratfunc(f, reg)
    syms = _symbols(reg)
    num = f.num.as_expr(*syms)
    den = f.den.as_expr(*syms)
    return num / den


class Compiled:
    """Numeric callable for a list of rational functions: f(x, jets) -> array.

    ``jets[k][a]`` is the k-th derivative of the multiplier of ``families[a]``;
    jets of families not listed (already determined ones) are set to zero.
    """

    def __init__(self, funcs, reg, families=None):
        self.reg = reg
        self.n = reg.n
        self.families = tuple(reg.families if families is None else families)
        subs = _ext_subs(reg)
        for fam in reg.families:
            if fam not in self.families:
                for k in range(reg.jet_order + 1):
                    subs[sp.Symbol(f"{fam}_{k}")] = 0
        exprs = [_expr(f, reg).subs(subs) for f in funcs]
        phase = [sp.Symbol(x) for x in reg.phase]
        jets = [sp.Symbol(f"{fam}_{k}") for k in range(reg.jet_order + 1) for fam in self.families]
        self._fn = sp.lambdify([phase, jets], exprs, modules="numpy")
        self.size = len(exprs)

    def __call__(self, x, jets):
        nf = len(self.families)
        flat = [jets[k][a] if k < len(jets) else 0.0 for k in range(self.reg.jet_order + 1) for a in range(nf)]
        return np.asarray(self._fn(list(x), flat), dtype=float).reshape(self.size)


def compile_field(X, families=None):
    return Compiled(list(X.comps), X.reg, families)


def compile_scalars(fs, reg, families=None):
    return Compiled(list(fs), reg, families)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


class SplineSampler:
    """Seeded cubic splines through random knots in [-1, 1], one per multiplier family.

    Derivatives above the third vanish (piecewise cubic).
    """

    def __init__(self, m, seed=0, horizon=1.0, knots=8):
        self.m, self.seed, self.horizon = m, seed, horizon
        rng = np.random.default_rng(seed)
        ts = np.linspace(0.0, horizon, knots)
        self._splines = [CubicSpline(ts, rng.uniform(-1.0, 1.0, size=knots)) for _ in range(m)]

    def jets(self, t, order):
        out = []
        for k in range(order + 1):
            if k > 3:
                out.append(np.zeros(self.m))
            else:
                out.append(np.array([float(s(t, k)) for s in self._splines]))
        return out


class ConstantSampler:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        self.m = len(self.values)
        self.seed = None

    def jets(self, t, order):
        return [self.values.copy()] + [np.zeros(self.m) for _ in range(order)]


class BumpParameter:
    """eps(t) = amplitude * exp(-((t - center)/width)^2) with exact derivatives."""

    def __init__(self, amplitude, center, width):
        self.amplitude, self.center, self.width = amplitude, center, width

    def derivative(self, t, n):
        u = (t - self.center) / self.width
        return self.amplitude * (-1) ** n * eval_hermite(n, u) * np.exp(-u * u) / self.width ** n

    @classmethod
    def normalized(cls, size, center, width, orders):
        """Bump whose largest derivative of order <= orders has sup-norm ~ size."""
        u = np.linspace(-4.0, 4.0, 801)
        peak = max(np.max(np.abs(eval_hermite(n, u) * np.exp(-u * u))) / width ** n for n in range(orders + 1))
        return cls(size / peak, center, width)


# ---------------------------------------------------------------------------
# projection and integration
# ---------------------------------------------------------------------------


def project_to_surface(x0, constraints, reg, tol=1e-12, max_iter=50):
    """Minimum-norm Gauss-Newton steps onto {T = 0}."""
    x = np.asarray(x0, dtype=float).copy()
    if not constraints:
        return x
    T = compile_scalars(constraints, reg, ())
    J = compile_scalars([reg.partial(as_ratfunc(t, reg), i) for t in constraints for i in range(reg.n)], reg, ())
    jets = []
    for _ in range(max_iter):
        val = T(x, jets)
        if np.max(np.abs(val)) < tol:
            return x
        jac = J(x, jets).reshape(len(constraints), reg.n)
        step, *_ = np.linalg.lstsq(jac, val, rcond=None)
        x = x - step
    if np.max(np.abs(T(x, jets))) < tol:
        return x
    raise ProjectionDiverged(f"projection did not reach |T| < {tol} within {max_iter} iterations")


@dataclass
class Trajectory:
    spec: object
    t: np.ndarray
    x: np.ndarray
    sampler: object
    h: float
    meta: dict = field(default_factory=dict)

    def jets(self, i, order):
        return self.sampler.jets(self.t[i], order)


def _velocity(spec):
    lam = [spec.reg.var(f"{fam}_0") for fam in spec.families]
    return compile_field(spec.drift + combine(lam, spec.char_fields, spec.reg), spec.families)


def integrate(s, sampler, x0, horizon=1.0, h=1e-3, surface_tol=1e-10):
    """Classical RK4 for x' = V(x) + lam(t) Z(x) on a uniform grid."""
    reg = s.reg
    x0 = np.asarray(x0, dtype=float)
    if len(x0) != reg.n:
        raise ValueError(f"initial state has dimension {len(x0)}, expected {reg.n}")
    if s.constraints:
        T = compile_scalars(list(s.constraints), reg, ())
        viol = np.max(np.abs(T(x0, [])))
        if viol > surface_tol:
            raise ValueError(f"initial state is off the constraint surface (|T| = {viol:.3g})")
    F = _velocity(s)
    order = reg.jet_order
    steps = int(round(horizon / h))
    ts = np.linspace(0.0, steps * h, steps + 1)
    xs = np.empty((steps + 1, reg.n))
    xs[0] = x0
    x = x0.copy()

    def f(t, y):
        return F(y, sampler.jets(t, order))

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            t = ts[i]
            k1 = f(t, x)
            k2 = f(t + h / 2, x + h / 2 * k1)
            k3 = f(t + h / 2, x + h / 2 * k2)
            k4 = f(t + h, x + h * k3)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(f"non-finite state at t = {ts[i + 1]:.6g}")
            xs[i + 1] = x
    return Trajectory(s, ts, xs, sampler, h, {"seed": getattr(sampler, "seed", None)})


def constraint_drift_check(tr, constraints=None):
    """max_t max_a |T_a(x(t))| (0 for an unconstrained system)."""
    spec = tr.spec
    cons = list(spec.constraints if constraints is None else constraints)
    if not cons:
        return 0.0
    T = compile_scalars(cons, spec.reg, ())
    return float(max(np.max(np.abs(T(x, []))) for x in tr.x))


# ---------------------------------------------------------------------------
# gauge invariance
# ---------------------------------------------------------------------------


def _total_derivative(f, spec):
    """d/dt f along x' = V + lam Z with lam_k' = lam_{k+1}."""
    reg = spec.reg
    lam = [reg.var(f"{fam}_0") for fam in spec.families]
    X0 = spec.drift + combine(lam, spec.char_fields, reg)
    return reg.jet_shift(f) + apply_field(X0, f)


def _generator_numerics(g, spec):
    reg = g.delta_x[0].reg if g.delta_x else spec.reg
    if reg is not spec.reg:
        spec = spec.lift(reg)
    fams = spec.families
    A = [compile_field(a, fams) for a in g.delta_x]
    dA = [compile_scalars([_total_derivative(c, spec) for c in a.comps], reg, fams) for a in g.delta_x]
    B = [compile_scalars(list(b), reg, fams) for b in g.delta_lam]
    return spec, A, dA, B


def gauge_residual(g, tr, amplitude, spec=None, stride=1):
    """max residual of the transformed path in the equations of motion plus max constraint violation.

    ``amplitude`` bounds the largest of eps, eps', ..., eps^(p+1) so generators of different
    orders are probed at comparable strength.
    """
    spec = spec or tr.spec
    spec, A, dA, B = _generator_numerics(g, spec)
    reg = spec.reg
    m = len(spec.families)
    F = compile_field(spec.drift, spec.families)
    Zs = [compile_field(z, spec.families) for z in spec.char_fields]
    T = compile_scalars(list(spec.constraints), reg, ()) if spec.constraints else None
    lam_field = _velocity(spec)
    p = g.order
    t0, t1 = tr.t[0], tr.t[-1]
    eps = BumpParameter.normalized(amplitude, 0.5 * (t0 + t1), 0.15 * (t1 - t0), p + 1)
    order = reg.jet_order
    worst_eq, worst_c = 0.0, 0.0
    for i in range(0, len(tr.t), stride):
        t = tr.t[i]
        x = tr.x[i]
        jets = tr.sampler.jets(t, order)
        e = [eps.derivative(t, n) for n in range(p + 2)]
        xdot = lam_field(x, jets)
        dx = np.zeros(reg.n)
        ddx = np.zeros(reg.n)
        for n in range(p):
            dx += A[n](x, jets) * e[n]
            ddx += dA[n](x, jets) * e[n] + A[n](x, jets) * e[n + 1]
        dlam = np.zeros(m)
        for n in range(p + 1):
            dlam += B[n](x, jets) * e[n]
        xp = x + dx
        lam_new = jets[0] + dlam
        rhs = F(xp, jets) + sum(lam_new[a] * Zs[a](xp, jets) for a in range(m))
        worst_eq = max(worst_eq, float(np.max(np.abs(xdot + ddx - rhs))))
        if T is not None:
            worst_c = max(worst_c, float(np.max(np.abs(T(xp, jets)))))
    return worst_eq + worst_c


@dataclass
class ScalingResult:
    r_full: float
    r_half: float

    @property
    def ratio(self):
        return self.r_full / self.r_half if self.r_half > 0 else float("inf")

    def passed(self, lo=3.5, hi=4.5, exact=1e-12):
        # a residual at roundoff level means the transformation is an exact symmetry
        if self.r_full <= exact:
            return True
        return lo <= self.ratio <= hi


def gauge_residual_scaling(g, tr, amplitude=1e-5, spec=None, stride=1):
    """(r(eps), r(eps/2)); an exact first-order symmetry leaves a quadratic remainder, ratio ~ 4."""
    return ScalingResult(gauge_residual(g, tr, amplitude, spec, stride),
                         gauge_residual(g, tr, amplitude / 2, spec, stride))


def observable_causality_check(O, s, samplers, x0, horizon=1.0, h=1e-3):
    """max_t |O(x1(t)) - O(x2(t))| for two multiplier histories from the same initial state."""
    reg = s.reg
    f = compile_scalars([O.lift(reg).rep], reg, ())
    trs = [integrate(s, smp, x0, horizon, h) for smp in samplers]
    dev = 0.0
    for xa, xb in zip(trs[0].x, trs[1].x):
        dev = max(dev, abs(float(f(xa, [])[0] - f(xb, [])[0])))
    return dev


def corrupt_generator(g, row=None, index=0, amount=1):
    """Copy of g with one multiplier coefficient shifted (negative control).

    The default row is the coefficient of the highest derivative of eps.
    """
    from dataclasses import replace

    B = [list(b) for b in g.delta_lam]
    row = len(B) - 1 if row is None else row
    B[row][index] = B[row][index] + amount
    return replace(g, delta_lam=tuple(tuple(b) for b in B))


def max_error(tr, exact):
    """max_t |x(t) - exact(t)| for a callable exact(t) -> state."""
    return float(max(np.max(np.abs(x - exact(t))) for t, x in zip(tr.t, tr.x)))


__all__ = [
    "BumpParameter", "Compiled", "ConstantSampler", "ScalingResult", "SplineSampler", "Trajectory",
    "compile_field", "compile_scalars", "constraint_drift_check", "corrupt_generator", "gauge_residual",
    "gauge_residual_scaling", "integrate", "max_error", "observable_causality_check", "project_to_surface",
]
