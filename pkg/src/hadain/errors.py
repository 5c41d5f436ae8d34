"""Exception types shared across the package."""


class HAdaInError(Exception):
    pass


class ShapeError(HAdaInError, ValueError):
    """Array dimensions disagree with what an operation needs."""


class ConfigError(HAdaInError, ValueError):
    """Invalid parameter value (levels, overlap, eps, magnitude, ...)."""


class BoundsError(HAdaInError, IndexError):
    pass


class ImageFormatError(HAdaInError, ValueError):
    """Malformed image file. ``offset`` is the byte position where parsing failed."""

    def __init__(self, msg, offset=None):
        if offset is not None:
            msg = f"{msg} (at byte offset {offset})"
        super().__init__(msg)
        self.offset = offset


class UnsupportedFormatError(HAdaInError, ValueError):
    """Well-formed file using a feature we don't read (16-bit, alpha, palette...)."""
