"""Exception hierarchy shared by all modules."""


class QdbError(Exception):
    """Base class for errors raised by qdb."""


class InputError(QdbError, ValueError):
    """An argument violates a documented precondition."""


class NonHermitianError(InputError):
    pass


class NotPSDError(InputError):
    pass


class NotDensityError(InputError):
    pass


class NonTracelessError(InputError):
    pass


class NotNormalizedError(InputError):
    pass


class DimMismatchError(InputError):
    pass


class NotTracePreservingError(InputError):
    pass


class ParamOutOfRangeError(InputError):
    pass


class BadAlphaError(InputError):
    pass


class SupportViolationError(InputError):
    pass


class SchemaError(InputError):
    """A channel descriptor or CLI argument failed validation."""


class NumericalError(QdbError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy answer."""


class NoConvergenceError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    """Two independent evaluations of the same quantity disagree."""


class SolverError(NumericalError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class InfeasibleError(SolverError):
    pass


class MaxIterationsError(SolverError):
    """Raised when the iteration budget runs out; ``solution`` holds the best iterate."""
