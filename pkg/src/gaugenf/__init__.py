"""Normal forms, gauge generators and observables for systems  x' = V + lam^a Z_a,  T(x) = 0."""

from .algebra import ConstraintIdeal, ExtVar, RatFunc, VarRegistry, groebner, is_trivial, normal_form
from .errors import (
    ConsistencyError,
    GaugeNFError,
    InconsistentConstraints,
    IrregularConstraints,
    ParseError,
    RegularityError,
)
from .gauge import (
    GaugeDistribution,
    GaugeGenerator,
    degree_filtration,
    gauge_distribution,
    lie_closure,
    synthesize_generator,
    verify_symmetry,
)
from .geometry import DOperator, PolyVector, VectorField, apply_field, lie_bracket, schouten
from .involutive import (
    Observable,
    check_involution,
    involutive_form,
    is_observable,
    observable_catalog,
    observable_evolution,
    verify_weak_poisson,
)
from .linear import FieldMatrix, generic_rank, solve_linear
from .reduction import PfaffianSpec, SystemSpec, depress, from_hamiltonian, pfaffian_to_primary
from .stabilization import CompleteNormalForm, abnormal_branch, stabilize

__version__ = "0.1.0"
