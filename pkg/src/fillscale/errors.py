"""Exception types shared across the package."""


class FillscaleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FillscaleError):
    """Invalid parameter or configuration value."""


class AlignmentError(FillscaleError):
    """A frontier or grid size is not aligned to the required block/row unit."""


class SchemeError(FillscaleError):
    """A filling scheme is inconsistent with the grid it is applied to."""


class CapacityError(FillscaleError):
    """Generation would advance past the end of the grid."""


class IncompleteGridError(FillscaleError):
    """An operation that requires a fully generated grid received a partial one."""


class EmptyRegionError(FillscaleError):
    """An operation that needs at least one generated row received none."""


class ShapeMismatchError(FillscaleError):
    """Array dimensions or lengths do not match the operation's contract."""


class NumericError(FillscaleError):
    """Non-finite input or a numerically invalid value."""


class DegenerateInputError(FillscaleError):
    """A statistic is undefined for the given input (constant vector, too few values)."""


class TransportError(FillscaleError):
    """The remote reward endpoint could not be reached or did not respond."""


class ProtocolError(FillscaleError):
    """The remote reward endpoint violated the wire protocol."""
