"""Exception types shared across the package."""


class WassertreeError(Exception):
    """Base class for all library errors."""


class StructureError(WassertreeError):
    """The tree (or a derived object) violates a structural invariant."""


class DomainError(WassertreeError):
    """Inputs are structurally fine but outside an operation's domain."""


class OversizeError(DomainError):
    """An exhaustive routine refused an input above its size cap."""


class ParseError(WassertreeError):
    """A file or string could not be decoded into a valid object."""
