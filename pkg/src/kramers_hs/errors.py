"""Exception hierarchy shared by every solver stage."""


class KramersError(Exception):
    """Base class for all solver failures."""


class DomainError(KramersError, ValueError):
    """Argument outside the domain of the operation."""


class ParameterError(DomainError):
    """Model parameters violate a required inequality."""


class BranchError(DomainError):
    """Evaluation on (or too close to) a branch cut or branch point."""


class IntegrationError(KramersError):
    """Quadrature could not be trusted (non-decaying tail, bad rule)."""


class PhaseError(KramersError):
    """Phase table failed its continuity or tail checks."""


class JacobiError(KramersError):
    """The inversion condition for mu0 has no solution in (0, inf)."""


class DegenerateError(KramersError):
    """Residue elimination hit a vanishing denominator."""


class SignGateError(KramersError):
    """Slip coefficient came out non-positive (branch/anchoring fault)."""


class ConsistencyError(KramersError):
    """An internal identity that must hold numerically did not."""


class ConvergenceError(KramersError):
    """Iterative refinement did not reach the requested tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
