"""Exception hierarchy shared by all dpconvex modules."""


class DPConvexError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(DPConvexError, ValueError):
    pass


class SingularMatrix(DPConvexError, ArithmeticError):
    pass


class SingularJacobian(SingularMatrix):
    """Df(z) is numerically singular at the evaluation point."""


class NonFiniteInput(DPConvexError, ValueError):
    pass


class ZeroPoint(DPConvexError, ValueError):
    """Operation is undefined at z = 0."""


class StepTooLarge(DPConvexError, ValueError):
    pass


class DegenerateConstraint(DPConvexError, ArithmeticError):
    pass


class AllSamplesSingular(DPConvexError, RuntimeError):
    pass


class ShapeMismatch(DPConvexError, ValueError):
    """Mapping does not have the dependence pattern a theorem requires."""


class ParamOutOfRange(DPConvexError, ValueError):
    pass


class InvalidDomain(DPConvexError, ValueError):
    pass


class InvalidMapping(DPConvexError, ValueError):
    pass
