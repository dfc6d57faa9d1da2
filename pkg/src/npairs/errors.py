"""Exception hierarchy shared across the package."""


class NPairError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(NPairError):
    """A text input (tree file, point dump, spec string) is malformed."""


class ValidationError(NPairError):
    """An object violates a structural invariant (tree weights, pair data)."""


class BoxInsufficiencyError(NPairError):
    """The available box-truncated data cannot support the requested output."""


class StructureError(NPairError):
    """Box data contradicts the structure an operation relies on.

    Raised e.g. when a claimed complementing pair fails a divisibility or
    reconstruction check during factorization.
    """
