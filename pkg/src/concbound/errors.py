"""Exception hierarchy for concbound."""


class ConcBoundError(ValueError):
    """Base class for all library errors."""


class InvalidMeasure(ConcBoundError):
    pass


class ZeroVariance(ConcBoundError):
    pass


class NonCenteredInput(ConcBoundError):
    pass


class NonPositiveScale(ConcBoundError):
    pass


class NotLatticeAligned(ConcBoundError):
    pass


class SupportExplosion(ConcBoundError):
    """Dense atom product would exceed the configured cap; use the lattice path."""


class BudgetExceeded(ConcBoundError):
    """Accumulated total-variation error budget reached the abort threshold."""


class HypothesisViolated(ConcBoundError):
    """Raised only in strict mode; otherwise reports carry a flag."""


class NonIntegerSplit(ConcBoundError):
    pass


class BadRange(ConcBoundError):
    pass


class DegenerateSymmetrization(ConcBoundError):
    pass


class EmptyFamily(ConcBoundError):
    pass


class SpecError(ConcBoundError):
    """Malformed distribution or scenario specification."""
