"""Exception types raised across hvlab."""


class HvlabError(Exception):
    """Base class for all package errors."""


class ParameterError(HvlabError, ValueError):
    """Raised when model or solver parameters violate their invariants."""


class DomainError(HvlabError, ValueError):
    """Raised when a state lies outside the domain where a formula is defined."""


class NoEquilibriumError(HvlabError):
    """No interior (or controlled) equilibrium exists for the given parameters."""


class NoHopfPointError(HvlabError):
    """The Hopf condition has no root on the unit interval."""


class IntegrationError(HvlabError):
    """Raised for invalid integrator input or a non-finite field evaluation."""


class IncompleteTrajectoryError(HvlabError):
    """Raised when an operation needs a trajectory that finished normally."""


class CycleUndecidedError(HvlabError):
    """Neither a fixed point nor a periodic orbit could be established.

    The partially filled report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
