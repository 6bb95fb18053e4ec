"""Exception types raised by popspace."""


class InputError(ValueError):
    """Malformed or out-of-domain input (non-finite entries, bad shapes, bad exponents)."""


class UnsupportedSizeError(InputError):
    """The requested operation is only defined for small dimensions."""


class NoIsometryError(InputError):
    """An r x n matrix with r < n cannot be an isometry."""


class StructuralError(ValueError):
    """The input lacks the structure an algorithm requires.

    ``diagnostics`` carries whatever the failing check reported.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class InequalityViolation(AssertionError):
    """A certified lower bound exceeded a certified upper bound."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
