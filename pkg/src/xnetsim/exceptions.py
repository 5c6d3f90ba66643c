"""Exception hierarchy shared across the package."""


class XNetError(Exception):
    """Base class for all errors raised by xnetsim."""


class SingularMatrix(XNetError, ValueError):
    pass


class DefectiveMatrix(XNetError, ValueError):
    pass


class ConvergenceFailure(XNetError, RuntimeError):
    pass


class UnsupportedOrder(XNetError, ValueError):
    pass


class TooFewPoints(XNetError, ValueError):
    pass


class BadLabelLength(XNetError, ValueError):
    pass


class NotAMember(XNetError, ValueError):
    pass


class ChannelDegenerate(XNetError, RuntimeError):
    """A channel draw is singular (or defective) beyond the resampling budget."""


class CodeMismatch(XNetError, ValueError):
    pass


class DimensionMismatch(XNetError, ValueError):
    pass


class SearchSpaceTooLarge(XNetError, ValueError):
    pass


class RankDeficientGenerator(XNetError, ValueError):
    pass


class CpdZeroConstellation(XNetError, ValueError):
    pass


class CertificateFailed(XNetError, AssertionError):
    """Raised when a determinant certificate does not hold.

    The computed values are kept on ``self.values``.
    """

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values or {}


class InsufficientData(XNetError, ValueError):
    pass


class ZeroBerInTail(XNetError, ValueError):
    pass


class ConfigInvalid(XNetError, ValueError):
    pass
