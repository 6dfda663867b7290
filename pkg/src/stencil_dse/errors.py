"""Exception hierarchy shared by every stencil_dse module."""


class StencilDSEError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(StencilDSEError):
    """A configuration file could not be read or does not match its schema."""


class ValidationError(StencilDSEError):
    """A value violates a domain invariant. ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(StencilDSEError):
    """An operation was called outside its mathematical domain."""


class InfeasibleError(StencilDSEError):
    """A tile does not fit in shared memory on the given architecture."""


class EmptyFeasibleSpace(StencilDSEError):
    """No tile configuration in a grid passes the feasibility checks."""


class EmptyDesignSpace(StencilDSEError):
    """No architecture in a grid fits within the area budget."""


class RankError(StencilDSEError):
    """An area calibration problem is underdetermined."""


class NegativeCoeffError(StencilDSEError):
    """An area calibration produced a negative coefficient."""

    def __init__(self, coeffs, message):
        self.coeffs = coeffs
        super().__init__(message)


class SizeError(StencilDSEError):
    """An iteration space is too large for brute-force enumeration."""
