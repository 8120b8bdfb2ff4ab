"""Exception hierarchy shared by every pamkit module."""


class PamError(Exception):
    """Base class for all pamkit errors."""


class InputValidationError(PamError, ValueError):
    """Input data does not satisfy a precondition (e.g. non-binary ``u``)."""


class DomainError(PamError, ValueError):
    """A numerical argument is outside the domain of the function."""


class ParameterDomainError(DomainError):
    """Trial-wise model parameters left their admissible region."""


class ConstraintError(PamError, RuntimeError):
    """Constrained sequence generation gave up after its attempt budget."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class ParseError(InputValidationError):
    """A tabular input file is malformed; ``rows`` lists offending row numbers."""

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = list(rows)
