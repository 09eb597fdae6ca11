"""Exception types shared across the package."""


class SobscaleError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SobscaleError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParameterError(SobscaleError, ValueError):
    """A configuration parameter violates its contract."""


class ShapeMismatchError(SobscaleError, ValueError):
    """Operands live on incompatible lattices or have incompatible shapes."""


class DecompositionError(SobscaleError, RuntimeError):
    """A matrix factorization failed or violated its accuracy contract."""


class ModelError(SobscaleError, ValueError):
    """A bundle model or symbol is structurally invalid for the request."""


class SupportError(SobscaleError, ValueError):
    """Data leaks outside the support window it is required to live in."""


class ConsistencyError(SobscaleError, ValueError):
    """Per-chart data disagrees on overlaps beyond tolerance."""


class CompatibilityError(SobscaleError, ValueError):
    """A right-hand side has a component outside the operator's range."""


class RankAmbiguityError(SobscaleError, RuntimeError):
    """Singular values straddle the rank threshold; the nullity is undecided."""


class ConfigError(SobscaleError, ValueError):
    """An experiment configuration fails validation."""
