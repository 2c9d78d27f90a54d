"""Exception hierarchy shared by every module of the package."""


class FpsError(Exception):
    """Base class for all errors raised by fpsinv."""


class FieldMismatchError(FpsError, TypeError):
    pass


class FieldDivisionByZero(FpsError, ZeroDivisionError):
    pass


class NonInvertibleDenominatorError(FieldDivisionByZero):
    pass


class InvalidParameterError(FpsError, ValueError):
    pass


class ShapeError(FpsError, ValueError):
    """Operands disagree on variable count, component count or field."""


class CompositionDomainError(FpsError, ValueError):
    """Substituted series has a nonzero constant term."""


class PrecisionError(FpsError, ValueError):
    """A request reaches past the degree a series is known to."""


class UnsupportedFieldError(FpsError, ValueError):
    pass


class ParseError(FpsError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ValidationError(FpsError, ValueError):
    """The map does not satisfy the preconditions of the inversion algorithm."""


class NotOriginPreservingError(ValidationError):
    pass


class NotNormalFormError(ValidationError):
    pass


class SingularLinearPartError(ValidationError):
    pass


class InternalVerificationError(FpsError, ArithmeticError):
    """The computed inverse failed its own check. Indicates a bug."""
