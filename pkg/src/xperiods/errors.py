"""Exception hierarchy shared by all modules."""


class XpError(Exception):
    """Base class for domain errors."""

    exit_code = 1


class PoleError(XpError, ZeroDivisionError):
    pass


class ZeroDirection(XpError, ValueError):
    pass


class DimensionMismatch(XpError, ValueError):
    pass


class ParseError(XpError, ValueError):
    exit_code = 64


class NotInPolyhedron(XpError, ValueError):
    pass


class InvalidComplex(XpError, ValueError):
    pass


class NotSubcomplex(XpError, ValueError):
    pass


class BoundaryNotSquareZero(XpError, ValueError):
    pass


class SignConventionViolation(XpError, ValueError):
    pass


class MissingIntersection(XpError, KeyError):
    pass


class UnsupportedShape(XpError, ValueError):
    pass


class MissingDirection(XpError, ValueError):
    pass


class NotStabilized(XpError, RuntimeError):
    exit_code = 3


class QuadratureFailure(XpError, RuntimeError):
    exit_code = 3


class RejectedPath(XpError, ValueError):
    """The integration domain violates the convergence hypotheses."""

    exit_code = 2

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class EndpointNotMarked(XpError, ValueError):
    exit_code = 2


class PoleOnSimplex(XpError, ValueError):
    exit_code = 2


class UnboundedDomain(XpError, ValueError):
    exit_code = 2


class DensityUndefined(XpError, ValueError):
    exit_code = 2


class NegativeTotal(XpError, ValueError):
    pass
