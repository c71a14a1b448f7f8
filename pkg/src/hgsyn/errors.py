"""Exception types raised across the package."""


class HgsynError(Exception):
    pass


class DomainError(HgsynError, ValueError):
    """Input outside the domain where an operation is defined."""


class PrecisionError(HgsynError, ArithmeticError):
    """Not enough p-adic precision left to answer."""


class UnsupportedExtension(HgsynError):
    """Requested roots of unity need an unramified extension of degree > 4."""


class NotInvertible(HgsynError, ArithmeticError):
    pass


class NotIntegrable(HgsynError, ArithmeticError):
    """A primitive was requested for a series with a nonzero 1/lambda term."""


class EvaluationDomainError(HgsynError, ValueError):
    pass


class NonOrdinary(HgsynError):
    pass


class MismatchError(HgsynError):
    pass


class CalibrationError(HgsynError):
    pass


class SolveError(HgsynError, ArithmeticError):
    pass


class ResidueError(HgsynError):
    pass


class ReductionStall(HgsynError):
    pass


class ConsistencyError(HgsynError):
    """An internal identity that must hold exactly failed."""
