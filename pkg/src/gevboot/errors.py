"""Exception types shared across the package."""


class GevbootError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GevbootError):
    """Input data or configuration violates a documented requirement."""


class SchemaError(ValidationError):
    """A delimited-text file is missing required structure (header, columns)."""


class ParseError(ValidationError):
    """A cell in a delimited-text file could not be parsed."""


class DomainError(ValidationError):
    """A mathematical argument is outside the function's domain."""


class BoundaryError(GevbootError):
    """Evaluation requested at or beyond the truncation boundary of the response curve."""


class SeparationError(GevbootError):
    """The maximum-likelihood estimate does not exist (separated data)."""


class ConvergenceError(GevbootError):
    """The optimizer or a step that requires a converged fit failed."""


class InsufficientReplicatesError(ValidationError):
    """Too few successful bootstrap replicates for the requested statistic."""


class UnreliableRunError(GevbootError):
    """Bootstrap run exceeded the replicate-failure budget.

    Carries whatever could still be computed in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
