"""Exception hierarchy shared by every pipeline stage.

The CLI maps the three families below onto exit codes: configuration and
parameter problems (2), malformed data (3) and numerical failure (4).
"""


class DancegenError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(DancegenError, ValueError):
    """Invalid parameter or configuration value."""

    exit_code = 2


class ParameterError(ConfigError):
    pass


class DimensionError(ConfigError):
    """Tensor or array shapes do not line up."""


class DataError(DancegenError):
    """Input data is malformed, inconsistent or too short."""

    exit_code = 3


class ParseError(DataError):
    pass


class SchemaError(DataError):
    pass


class MapError(DataError):
    pass


class DegeneratePoseError(DataError):
    pass


class FormatError(DataError):
    pass


class LengthError(DataError):
    pass


class CoverageError(DataError):
    pass


class AlignmentError(DataError):
    pass


class IntegrityError(DataError):
    pass


class VersionError(DataError):
    pass


class NumericError(DancegenError, ArithmeticError):
    """A NaN or infinity appeared where finite values are required."""

    exit_code = 4


class ContractError(NumericError):
    """Mixture parameters violate their activation guarantees."""
