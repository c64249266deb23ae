"""Ready-made systems used by the tests, scripts and bundled input files."""

from __future__ import annotations

from .algebra import ExtVar, VarRegistry
from .geometry import PolyVector, VectorField
from .reduction import SystemSpec, depress, from_hamiltonian, pfaffian_to_primary

DRIFTLESS_10_FAMILIES = ("l1", "l2", "l3", "l4")


def driftless_ten(jet_order=1):
    """Driftless system in R^10 whose four fields and their brackets span the tangent space."""
    phase = [f"x{i}" for i in range(1, 11)]
    r = VarRegistry(phase, DRIFTLESS_10_FAMILIES, jet_order=jet_order)
    Z = [
        VectorField.parse(r, {"x1": "1", "x8": "x2", "x9": "x3", "x10": "x4"}),
        VectorField.parse(r, {"x2": "1", "x6": "x3", "x7": "x4"}),
        VectorField.parse(r, {"x3": "1", "x5": "x4"}),
        VectorField.parse(r, {"x4": "1"}),
    ]
    return SystemSpec(r, VectorField.zero(r), Z, (), DRIFTLESS_10_FAMILIES, name="driftless-ten")


def pendulum_on_line():
    """Canonical pair with H = (p^2 + q^2)/2 and primary constraint q."""
    r = VarRegistry(["q", "p"])
    P = PolyVector.bivector(r, [(0, 1, 1)])
    return from_hamiltonian(P, r.parse_poly("1/2*p^2 + 1/2*q^2"), [r.parse_poly("q")], name="pendulum-on-line")


def oscillator_pfaffian():
    return depress(["w + y"], {"y": ["y", "v", "w"]})


def oscillator():
    """y'' + y = 0 depressed to (y, v, w) with constraint w + y."""
    return pfaffian_to_primary(oscillator_pfaffian(), name="oscillator")


def dirac_counterexample():
    """H = u p_X^2 / 2 with u = exp(-Y) and primary constraint p_Y."""
    r = VarRegistry(["X", "Y", "p_X", "p_Y"], ext=[ExtVar("u", "-Y")])
    P = PolyVector.bivector(r, [(0, 2, 1), (1, 3, 1)])
    spec = from_hamiltonian(P, r.parse_poly("1/2*u*p_X^2"), [r.parse_poly("p_Y")], name="dirac-counterexample")
    regularize = {spec.reg.parse_poly("p_X^2"): spec.reg.parse_poly("p_X")}
    return spec, regularize


def dirac_bivector(reg):
    return PolyVector.bivector(reg, [(0, 2, 1), (1, 3, 1)])


def affine_involutive():
    """Z_1 = d_x, Z_2 = x d_x + y d_y (so [Z_1, Z_2] = Z_1), V = x d_x + z d_z ([Z_1, V] = Z_1, [Z_2, V] = 0)."""
    fams = ("m1", "m2")
    r = VarRegistry(["x", "y", "z"], fams, jet_order=1)
    Z = [VectorField.parse(r, {"x": "1"}), VectorField.parse(r, {"x": "x", "y": "y"})]
    V = VectorField.parse(r, {"x": "x", "z": "z"})
    return SystemSpec(r, V, Z, (), fams, name="affine-involutive")


def heisenberg(with_center=False):
    fams = ("h1", "h2", "h3") if with_center else ("h1", "h2")
    r = VarRegistry(["x1", "x2", "x3"], fams, jet_order=1)
    Z = [VectorField.parse(r, {"x1": "1"}), VectorField.parse(r, {"x2": "1", "x3": "x1"})]
    if with_center:
        Z.append(VectorField.parse(r, {"x3": "1"}))
    return SystemSpec(r, VectorField.zero(r), Z, (), fams, name="heisenberg")


def single_reparametrization():
    """One commuting field, no drift: the only gauge symmetry is time reparametrization."""
    r = VarRegistry(["x", "y"], ("lam",), jet_order=1)
    Z = [VectorField.parse(r, {"x": "1", "y": "x"})]
    return SystemSpec(r, VectorField.zero(r), Z, (), ("lam",), name="reparametrization")


def abnormal_example():
    """V = 0, Z = {x d_y}, T = {y}: the minor x vanishes on an abnormal locus."""
    r = VarRegistry(["x", "y"], ("lam",), jet_order=1)
    Z = [VectorField.parse(r, {"y": "x"})]
    return SystemSpec(r, VectorField.zero(r), Z, (r.parse_poly("y"),), ("lam",), name="abnormal-example")
