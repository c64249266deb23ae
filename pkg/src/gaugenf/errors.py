"""Exception hierarchy.

Consistency errors map to CLI exit code 2, regularity errors to exit code 3.
"""


class GaugeNFError(Exception):
    exit_code = 1


class ConsistencyError(GaugeNFError):
    """The equations admit no solution (contradictory constraints, inconsistent Pfaffian rows)."""

    exit_code = 2


class InconsistentConstraints(ConsistencyError):
    pass


class DynamicallyInconsistent(ConsistencyError):
    pass


class RegularityError(GaugeNFError):
    exit_code = 3


class IrregularConstraints(RegularityError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class NonRegularElement(RegularityError):
    """A denominator lies in the constraint ideal."""


class SingularTransformation(RegularityError):
    pass


class NoAbnormalLocus(RegularityError):
    pass


class JetBudgetExceeded(GaugeNFError):
    pass


class FiltrationOverflow(GaugeNFError):
    pass


class DenominatorClearingError(GaugeNFError):
    pass


class StaleCertificate(GaugeNFError):
    pass


class ParseError(GaugeNFError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}, column {column})"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class StageOverflow(GaugeNFError):
    """Stabilization ran past its stage bound."""


class ProjectionDiverged(GaugeNFError):
    """Newton projection onto the constraint surface did not converge."""


class NonFiniteState(GaugeNFError):
    """Numerical integration produced a non-finite state."""
