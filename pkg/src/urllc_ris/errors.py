"""Exception types raised by the optimizer and the experiment driver."""


class UrllcRisError(Exception):
    """Base class for all package errors."""


class ContractError(UrllcRisError, ValueError):
    """An input violates a documented precondition (shape, Hermitian, domain)."""


class BracketError(UrllcRisError, ValueError):
    """Root bracket does not contain a sign change."""


class DegenerateExpansionError(UrllcRisError):
    """A surrogate was requested at a point where some user has zero SINR."""


class NonPositiveRateError(UrllcRisError):
    """GM weights need strictly positive per-user rates."""


class InitializationError(UrllcRisError):
    """The long-blocklength warm start left a user without a positive rate."""
