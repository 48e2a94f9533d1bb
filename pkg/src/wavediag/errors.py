class WavediagError(Exception):
    """Base class for errors raised by wavediag."""


class ParseError(WavediagError, ValueError):
    """Malformed CSV, config or model text."""


class DegenerateInputError(WavediagError, ValueError):
    """Input with zero spread where a spread is required (constant channel, flat feature)."""


class StructureError(WavediagError, ValueError):
    """An object whose internal shapes do not fit together."""


class ModelFormatError(ParseError):
    """A model file that cannot be loaded."""
