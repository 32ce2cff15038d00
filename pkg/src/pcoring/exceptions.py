"""Exception hierarchy shared by the model, engine and analysis layers."""


class PcoError(Exception):
    """Base class for all package errors."""


class DomainError(PcoError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateCaseError(DomainError):
    """The requested construction has no solution at this parameter value."""


class PreconditionError(PcoError, ValueError):
    """A state does not satisfy the precondition of an operation."""


class EngineInvariantError(PcoError, RuntimeError):
    """The simulator observed a violation of a structural invariant.

    These indicate a bug (or a floating point pathology) rather than bad
    input; the CLI maps them to a dedicated exit code.
    """


class ConvergenceError(PcoError, RuntimeError):
    """An iterative computation hit its iteration cap."""
