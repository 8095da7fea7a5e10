"""Constants used throughout the package."""

import enum

if hasattr(enum, "StrEnum"):
    _StrEnum = enum.StrEnum
else:
    import typing

    _S = typing.TypeVar("_S", bound="_StrEnum")

    class _StrEnum(str, enum.Enum):
        """TODO: remove when python 3.10 support is dropped."""

        def __new__(cls: typing.Type[_S], *values: str) -> _S:
            value = str(*values)

            member = str.__new__(cls, value)
            member._value_ = value

            return member

        __str__ = str.__str__


class Verdict(_StrEnum):
    """Whether a producer should share a message with a consumer."""

    SHARE = "share"
    WITHHOLD = "withhold"


class Severity(_StrEnum):
    """The severity of a scenario validation finding."""

    ERROR = "error"
    WARNING = "warning"


class SerialOpName(_StrEnum):
    """The serial (path discounting) operators available out of the box."""

    PRODUCT = "product"
    MIN = "min"


class ParallelOpName(_StrEnum):
    """The parallel (path fusion) operators available out of the box."""

    MIN = "min"
    PRODUCT = "product"


STOCHASTIC_TOLERANCE = 1.0e-9
"""The default tolerance used when checking that columns / vectors sum to one."""

DENSITY_TOLERANCE = 1.0e-6
"""The tolerance on the integral of a tabulated density over [0, 1]."""

DEFAULT_MAX_PATHS = 10_000
"""The maximum number of simple paths enumerated between a producer and consumer."""

DEFAULT_GRID_N = 256
"""The default number of quadrature intervals on [0, 1]."""

NO_MESSAGE_LEVEL = 0.0
"""The information level of the distinguished 'no message' entry."""
FULL_MESSAGE_LEVEL = 1.0
"""The information level of the original message."""
