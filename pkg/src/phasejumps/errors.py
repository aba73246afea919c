"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A parameter violates a documented precondition."""


class OutOfBounds(IndexError):
    """A requested sample lies outside the padded field."""


class NonClosingSum(ArithmeticError):
    """The discrete winding sum is not close to an integer."""


class NonClosingSumWarning(RuntimeWarning):
    pass


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FormatError(ValueError):
    """A data file does not follow its documented layout."""

    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)
