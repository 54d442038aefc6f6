"""Exception types shared across the simulator packages."""

from typing import Optional


class DimensionError(ValueError):
    """Operand lengths or matrix shapes do not match."""


class MembershipError(ValueError):
    """A word is not an element of the code it was supposed to belong to."""


class NestingError(ValueError):
    """The pair of codes is not nested as C2 ⊂ C1."""


class CssConstructionError(ValueError):
    """A CSS code cannot be built from the given pair."""


class DomainError(ValueError):
    """A parameter lies outside the admissible range."""


class DecodeFailure(Exception):
    """The syndrome is not in the decoding table (error weight above the radius)."""

    def __init__(self, syndrome: str, message: Optional[str] = None):
        self.syndrome = syndrome
        super().__init__(message or f"Syndrome {syndrome} has no entry in the decoding table")


class BackendError(RuntimeError):
    """The requested state does not fit the selected simulation backend."""


class BackendDivergenceError(AssertionError):
    """Dense and tableau backends disagree on the same program."""


class OracleDivergenceError(AssertionError):
    """Two computation paths that must agree produced different results."""


class ReportConsistencyError(ValueError):
    """A results file summary cannot be recomputed from its session records."""


class ConfigParseError(ValueError):
    """A configuration file entry is unknown, missing or out of range."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
