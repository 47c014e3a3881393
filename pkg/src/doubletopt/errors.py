"""Exception hierarchy for doubletopt."""


class DoubletOptError(Exception):
    """Base class for all package errors."""


class InvalidGeometry(DoubletOptError):
    pass


class FieldUnavailable(DoubletOptError):
    pass


class DegenerateLine(UserWarning):
    """A line with zero median breakthrough parameter was disabled."""


class NumericalFailure(DoubletOptError):
    pass


class Infeasible(DoubletOptError):
    pass


class TooLarge(DoubletOptError):
    pass


class ParseError(DoubletOptError):
    pass


class CrsError(DoubletOptError):
    pass


class ValidationError(DoubletOptError):
    pass


class IoError(DoubletOptError):
    """Output could not be written."""
