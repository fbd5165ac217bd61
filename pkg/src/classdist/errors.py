"""Exception types raised across the package."""


class ClassDistError(Exception):
    """Base class for all package errors."""


class InvalidParameter(ClassDistError, ValueError):
    pass


class DivergentSeries(ClassDistError, ValueError):
    """Series argument outside the convergence region 0 <= z < 1."""


class NoConvergence(ClassDistError, RuntimeError):
    """Iteration cap exhausted before the stopping rule was met."""


class NumericalUnderflow(ClassDistError, ArithmeticError):
    pass


class DegenerateCase(ClassDistError, ValueError):
    """Parameter combination at a boundary where no finite solution exists."""


class DegenerateInput(ClassDistError, ValueError):
    pass


class EmptyInput(DegenerateInput):
    pass


class NegativeValue(ClassDistError, ValueError):
    pass


class ZeroTotal(DegenerateInput):
    pass


class LengthMismatch(ClassDistError, ValueError):
    pass


class MissingElementCount(ClassDistError, ValueError):
    pass


class ZeroVariance(ClassDistError, ValueError):
    pass


class ParseError(ClassDistError, ValueError):
    """Malformed dataset file; the message names the offending line."""
