"""Exception hierarchy shared by all macdmt modules.

The CLI maps these onto exit codes: DomainError -> 2 (bad request),
InfeasibleRateError / CapExceededError / InsufficientTrialsError -> 3,
ContractViolationError (incl. NotPsdError) -> 4.
"""


class MacDmtError(Exception):
    """Base class for all library errors."""


class DomainError(MacDmtError, ValueError):
    """An argument lies outside the supported domain of an operation."""


class ContractViolationError(MacDmtError):
    """A numerical input violates a structural contract (shape, symmetry, ...)."""


class NotPsdError(ContractViolationError):
    """A matrix required to be positive semidefinite has a genuinely negative eigenvalue."""


class InfeasibleRateError(MacDmtError):
    """A multiplexing-rate tuple sits on or outside the capacity-region boundary."""

    def __init__(self, message: str, subset: tuple[int, ...] | None = None):
        super().__init__(message)
        self.subset = subset


class CapExceededError(MacDmtError):
    """An enumeration or simulation would exceed the configured size cap."""

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class InsufficientTrialsError(MacDmtError):
    """A Monte Carlo estimate is all-zero, so a slope fit would be meaningless."""
