"""Exception hierarchy shared by every amber module."""


class AmberError(Exception):
    """Base class for all amber errors."""


class InvalidDescriptor(AmberError, ValueError):
    pass


class InvalidScheme(AmberError, ValueError):
    pass


class NoNumericStructure(AmberError):
    """A distance or numeric value was requested from a descriptor without a numeric map.

    Raised instead of silently assuming equidistant levels.
    """


class DomainMismatch(AmberError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ZeroMass(AmberError, ValueError):
    pass


class SchemeMismatch(AmberError, ValueError):
    pass


class DescriptorMismatch(AmberError, ValueError):
    pass


class UnknownDescriptor(AmberError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InvalidBlend(AmberError, ValueError):
    pass


class InvalidWeights(InvalidBlend):
    pass


class PolicyUnsupported(AmberError, ValueError):
    pass


class EmptyCategory(AmberError, ValueError):
    pass


class GridMismatch(AmberError, ValueError):
    pass


class InsufficientData(AmberError, ValueError):
    pass


class DegenerateTrace(AmberError, ValueError):
    pass


class NonNumericalAttribute(AmberError, ValueError):
    pass


class EmptySegment(AmberError, ValueError):
    pass


class SizeMismatch(AmberError, ValueError):
    pass


class IndexOutOfRange(AmberError, IndexError):
    pass


class UnsupportedPair(AmberError, TypeError):
    pass


class NegativeVariance(AmberError, ValueError):
    pass


class ParseError(AmberError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingColumn(AmberError, ValueError):
    pass
