"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation-type errors exit 2,
resource caps exit 3 and theorem violations exit 4.
"""


class LabError(Exception):
    """Base class for all errors raised by the toolkit."""


class StructuralError(LabError):
    """Shapes or lengths disagree (pattern vs data vector, table vs space)."""


class DomainError(LabError):
    """A value lies outside its permitted domain, or a required probability is zero."""


class UsageError(LabError):
    """An operation was called without the inputs it needs."""


class PreconditionError(LabError):
    """A mathematical precondition of an operation does not hold."""


class ResourceError(LabError):
    """An enumeration would exceed a configured cap."""


class ValidationError(LabError):
    """A model-spec document failed validation.

    ``errors`` holds every problem found, each prefixed by its JSON path.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid document")


class TheoremViolation(LabError):
    """A theorem's conclusion failed although all its hypotheses held.

    This can only mean a bug in the toolkit (or float tolerance set too tight).
    """
