"""Exception taxonomy shared by all constikit modules."""


class ConstikitError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolationError(ConstikitError):
    """An argument violated a declared contract (convention, kind, shape, length)."""


class InvalidConfigurationError(ConstikitError):
    """A kinematic quantity is unusable (e.g. non-positive det F)."""


class SingularMatrixError(ConstikitError):
    """Matrix inversion requested for a (near-)singular matrix."""


class MaterialError(ConstikitError):
    """A constitutive update failed or produced non-finite output.

    ``context`` may carry element / Gauss-point information added while the
    error propagates through assembly.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}


class PluginLoadError(ConstikitError):
    """Shared library could not be found or opened."""


class PluginSymbolError(ConstikitError):
    """Shared library does not export the required entry symbol."""


class CaseFileError(ConstikitError):
    """Case file failed to parse or validate.

    ``line`` / ``column`` are 1-based when the underlying parser provides
    them, otherwise None. ``key`` names the offending entry for validation
    failures.
    """

    def __init__(self, message, line=None, column=None, key=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.key = key


class NonConvergenceError(ConstikitError):
    """A local (Gauss point / scalar) iteration failed to converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IncrementFailureError(ConstikitError):
    """A global load/time increment could not be converged even after cutbacks."""

    def __init__(self, message, increment=None, trace=None):
        super().__init__(message)
        self.increment = increment
        self.trace = trace
