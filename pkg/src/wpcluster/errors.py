"""Exception types shared across the package."""


class WPClusterError(Exception):
    """Base class for all package-specific errors."""


class SingularMatrix(WPClusterError):
    """A matrix that must be invertible over the rationals is not."""


class DimensionMismatch(WPClusterError):
    """Vector or matrix sizes do not match the ambient rank."""


class PairMismatch(WPClusterError):
    """Two elements built over different compatible pairs were combined."""


class NotConic(WPClusterError):
    """No support point of the series qualifies as an inversion corner."""


class InsufficientPrecision(WPClusterError):
    """The known part of a series cannot support the requested precision."""


class NoUniqueCorner(WPClusterError):
    """The series does not have the two-corner shape of a character."""


class NotCharacterShaped(WPClusterError):
    """A support exponent does not invert to an integral quotient class."""


class IndexOutOfRange(WPClusterError):
    """A seed or mutation index is outside the allowed range."""


class TwoCycleCreated(WPClusterError):
    """Quiver bookkeeping produced a 2-cycle between mutable vertices."""


class NoEffectiveDirection(WPClusterError):
    """Neither candidate exchange class is the class of a nonzero sheaf."""


class TooLarge(WPClusterError):
    """A brute-force enumeration was requested beyond desk scale."""


class UnknownSuite(WPClusterError):
    """run_suite was asked for a suite name that is not registered."""


class NoFit(WPClusterError):
    """The exponent auditor found no consistent convention in its box."""
