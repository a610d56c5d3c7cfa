"""Exception types shared across the library."""


class GkzError(Exception):
    """Base class for all library-specific errors."""


class ConfigurationError(GkzError, ValueError):
    """A point configuration violates one of its defining conditions."""

    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"{condition}: {message}")


class GenericityError(GkzError, ValueError):
    """Heights or directions are degenerate for the requested construction."""


class InfiniteIndexError(GkzError, ValueError):
    """A sublattice basis is rank-deficient, so the quotient is infinite."""


class PreconditionError(GkzError, ValueError):
    """An operation's precondition does not hold for the given input."""


class ResonanceError(PreconditionError):
    """A parameter is resonant where nonresonance is required."""


class DegenerateGammaError(GkzError, ValueError):
    """A series has no nonzero term to normalize against within the window."""


class InsufficientOrderError(GkzError, ValueError):
    """The perturbation order is too small to realize the filtration."""


class EffortExceededError(GkzError, RuntimeError):
    """An iterative rewriting loop hit its round budget before finishing."""


class InconclusiveSearchError(GkzError, RuntimeError):
    """A bounded search exhausted its node budget without deciding."""


class InternalConsistencyError(GkzError, RuntimeError):
    """A certified internal invariant failed; indicates a bug, not bad input."""
