import numpy as np
import pytest

from gaugenf.errors import NonFiniteState
from gaugenf.involutive import Observable
from gaugenf.models import oscillator
from gaugenf.oracle import (
    BumpParameter,
    ConstantSampler,
    SplineSampler,
    constraint_drift_check,
    corrupt_generator,
    gauge_residual_scaling,
    integrate,
    max_error,
    observable_causality_check,
    project_to_surface,
)
from gaugenf.algebra import VarRegistry
from gaugenf.geometry import VectorField
from gaugenf.reduction import SystemSpec


def cos_solution(t):
    return np.array([np.cos(t), -np.sin(t), -np.cos(t)])


def test_projection_is_minimum_norm(oscillator_complete):
    s = oscillator_complete.spec
    x = project_to_surface([1.0, 0.0, 0.5], list(s.constraints), s.reg)
    np.testing.assert_allclose(x, [0.25, 0.0, -0.25], atol=1e-12)


def test_oscillator_matches_cosine(oscillator_complete):
    tr = integrate(oscillator_complete.spec, ConstantSampler([]), [1.0, 0.0, -1.0], 1.0, 1e-3)
    assert max_error(tr, cos_solution) < 1e-6
    assert constraint_drift_check(tr) < 1e-12


def test_fourth_order_convergence(oscillator_complete):
    errs = [max_error(integrate(oscillator_complete.spec, ConstantSampler([]), [1.0, 0.0, -1.0], 2.0, h), cos_solution)
            for h in (0.2, 0.1, 0.05)]
    for a, b in zip(errs, errs[1:]):
        assert 12 < a / b < 20


def test_primary_form_drifts_off_surface():
    # with an arbitrary multiplier the primary system does not conserve y + w
    tr = integrate(oscillator(), ConstantSampler([0.0]), [1.0, 0.0, -1.0], 1.0, 1e-3)
    assert constraint_drift_check(tr) > 0.1


def test_off_surface_start_rejected(oscillator_complete):
    with pytest.raises(ValueError, match="off the constraint surface"):
        integrate(oscillator_complete.spec, ConstantSampler([]), [1.0, 0.0, 0.0], 0.1, 1e-2)


def test_blow_up_detected():
    r = VarRegistry(["x"])
    s = SystemSpec(r, VectorField.parse(r, {"x": "x^2"}), (), (), ())
    with pytest.raises(NonFiniteState):
        integrate(s, ConstantSampler([]), [1.0], 2.0, 1e-2)


def test_bump_derivatives_match_finite_differences():
    b = BumpParameter(1.0, 0.5, 0.15)
    t, d = 0.43, 1e-5
    for n in range(4):
        fd = (b.derivative(t + d, n) - b.derivative(t - d, n)) / (2 * d)
        assert b.derivative(t, n + 1) == pytest.approx(fd, rel=1e-6)


def test_normalized_bump_size():
    b = BumpParameter.normalized(1e-3, 0.5, 0.15, 3)
    ts = np.linspace(0, 1, 2001)
    peak = max(np.max(np.abs([b.derivative(t, n) for t in ts])) for n in range(4))
    assert peak == pytest.approx(1e-3, rel=1e-2)


def test_spline_jets_are_consistent():
    sm = SplineSampler(2, seed=1)
    d = 1e-6
    fd = (sm.jets(0.3 + d, 0)[0] - sm.jets(0.3 - d, 0)[0]) / (2 * d)
    np.testing.assert_allclose(sm.jets(0.3, 1)[1], fd, rtol=1e-6)
    assert np.all(sm.jets(0.3, 5)[4] == 0)
    np.testing.assert_array_equal(SplineSampler(2, seed=1).jets(0.7, 0)[0], sm.jets(0.7, 0)[0])


def test_gauge_residual_scaling(heis):
    c, g = heis
    tr = integrate(c.spec, SplineSampler(2, seed=4), [0.2, -0.1, 0.3], 1.0, 1e-2)
    for gen in g.generators:
        assert gauge_residual_scaling(gen, tr, spec=c.spec).passed()
        bad = gauge_residual_scaling(corrupt_generator(gen), tr, spec=c.spec)
        assert not bad.passed()
        assert 1.5 < bad.ratio < 2.5


def test_observable_causality(counterexample):
    c, _ = counterexample
    smp = [SplineSampler(1, seed=3), SplineSampler(1, seed=4)]
    x0 = [0.3, 0.2, 0.0, 0.0]
    assert observable_causality_check(Observable.parse(c.spec.reg, "X"), c.spec, smp, x0) < 1e-6
    assert observable_causality_check(Observable.parse(c.spec.reg, "Y"), c.spec, smp, x0) > 1e-2
