"""Exception hierarchy shared by every module of the package."""


class QCapacityError(Exception):
    """Base class for all errors raised by qcapacity."""


class NotHermitian(QCapacityError, ValueError):
    pass


class NoConvergence(QCapacityError, RuntimeError):
    pass


class NegativeEigenvalue(QCapacityError, ValueError):
    pass


class DimensionOverflow(QCapacityError, ValueError):
    pass


class BadDims(QCapacityError, ValueError):
    pass


class ShapeMismatch(QCapacityError, ValueError):
    pass


class NotPSD(QCapacityError, ValueError):
    pass


class TraceNotOne(QCapacityError, ValueError):
    pass


class BadRank(QCapacityError, ValueError):
    pass


class BadEnsemble(QCapacityError, ValueError):
    pass


class DimMismatch(QCapacityError, ValueError):
    pass


class UnknownChannel(QCapacityError, ValueError):
    pass


class BadParam(QCapacityError, ValueError):
    pass


class ParseError(QCapacityError, ValueError):
    pass


class CompletenessViolation(QCapacityError, ValueError):
    """Kraus operators do not sum to the identity.

    ``deviation`` holds the Frobenius norm of ``sum_k A_k^dag A_k - I``.
    """

    def __init__(self, message, deviation=float("nan")):
        super().__init__(message)
        self.deviation = deviation


class InfiniteTerm(QCapacityError, ArithmeticError):
    pass


class SupportViolation(QCapacityError, ArithmeticError):
    pass


class DimTooLarge(QCapacityError, ValueError):
    pass
