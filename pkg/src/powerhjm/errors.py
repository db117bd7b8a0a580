"""Exception types shared across the package."""


class DomainError(ValueError):
    """Evaluation outside the domain an object was built for."""


class CurveFormatError(ValueError):
    """Malformed curve input (CSV or JSON)."""


class CoverageError(ValueError):
    """A sampled price path does not cover the interval an index needs."""


class InfeasibleFitError(ValueError):
    """Lognormal moment matching is undefined (non-positive first moment)."""


class DegenerateModelError(ValueError):
    """A model configuration breaks a numeric precondition."""
