"""Exception types shared across the package."""


class IPQError(Exception):
    """Base class for all package errors."""


class CapacityError(IPQError):
    """A requested construction exceeds a configured size limit."""


class DimensionError(IPQError, ValueError):
    """Operands have incompatible shapes."""


class SolverError(IPQError):
    """Numerical integration failed or diverged."""


class ConvergenceError(IPQError):
    """A refinement or quadrature check did not meet its tolerance."""


class SyndromeError(IPQError):
    """A parity measurement was requested on a state without definite parity."""


class SingularInverseError(IPQError):
    """An inverse was requested on a subspace where the operator vanishes."""


class ConfigError(IPQError, ValueError):
    """A run configuration failed schema or unit validation."""
