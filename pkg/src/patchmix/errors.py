"""Exception types shared across the toolkit."""


class PatchmixError(Exception):
    """Base class for toolkit errors."""


class DataFormatError(PatchmixError):
    """A document or in-memory dataset violates the expected schema.

    The message carries the offending key path (e.g. ``annotations[3].bbox``)
    whenever the violation comes from a parsed file.
    """
