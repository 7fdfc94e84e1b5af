"""Exception hierarchy shared by all catbranch modules."""


class CatBranchError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(CatBranchError, ValueError):
    pass


class NegativeMass(ValidationError):
    pass


class AsymmetricCoupling(ValidationError):
    pass


class NonPositiveWidth(ValidationError):
    pass


class IndefinitePotential(ValidationError):
    pass


class DimensionMismatch(CatBranchError, ValueError):
    pass


class NumericalError(CatBranchError, ArithmeticError):
    """Failures of the numerical pipeline (CLI exit code 3)."""


class NotNormalizable(NumericalError):
    pass


class SingularBlock(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NegativeEigenvalue(NumericalError):
    pass


class GridTooNarrow(NumericalError):
    pass


class BoundaryMassTooLarge(NumericalError):
    pass


class ResolutionTooCoarse(NumericalError):
    pass


class EmptyInput(CatBranchError, ValueError):
    pass


class ParseError(CatBranchError, ValueError):
    pass
