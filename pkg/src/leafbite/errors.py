"""Exception hierarchy shared across the package."""


class LeafbiteError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LeafbiteError, ValueError):
    """An argument failed a structural or range check."""


class ImageLoadError(LeafbiteError):
    """An input image is missing, unreadable, or uses an unsupported encoding."""


class UniformChannelError(LeafbiteError):
    """Threshold selection is impossible: the histogram has a single populated bin."""


class DocumentError(LeafbiteError):
    """A structured document is malformed or has an unexpected kind or version."""


class SessionNotFoundError(LeafbiteError):
    """No session with the requested id exists in the store."""
