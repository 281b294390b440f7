"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UnsupportedConfigurationError(ValueError):
    """The configuration is valid in general but not for this operation."""


class ResourceError(RuntimeError):
    """A requested computation would exceed a configured size cap."""


class SingularityError(ArithmeticError):
    """A matrix that must be invertible is (numerically) singular."""
