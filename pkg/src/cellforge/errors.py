"""Exception hierarchy shared by all cellforge modules."""


class CellforgeError(Exception):
    """Base class for every error raised by this package."""


# geometry
class CornerTooLarge(CellforgeError):
    pass


class HoleOutsideBody(CellforgeError):
    pass


# techdb / parsers
class ParseError(CellforgeError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownLayerInRule(CellforgeError):
    pass


class GridViolation(CellforgeError):
    pass


class MissingRule(CellforgeError):
    pass


class MissingConstant(CellforgeError):
    pass


# pcell
class UnknownDevice(CellforgeError):
    pass


class ContradictoryParams(CellforgeError):
    pass


class ParamOutOfRange(CellforgeError):
    pass


class GeometryInfeasible(CellforgeError):
    pass


# interact
class UnknownHandle(CellforgeError):
    pass


class IncompatibleCase(CellforgeError):
    pass


class NotAbutted(CellforgeError):
    pass


# gdsio
class NameTooLong(CellforgeError):
    pass


class CoordinateOverflow(CellforgeError):
    pass


class TruncatedRecord(CellforgeError):
    pass


class BadMagic(CellforgeError):
    pass


class UnsupportedElement(CellforgeError):
    pass


class UnmappedLayer(CellforgeError):
    pass
