"""
Fixed-length binary strings packed into a Python integer.

Position 0 is the leftmost character of the string form and the most
significant bit of ``value``. The same convention gives the computational
basis index of a dense state, so ``BitString.from_str("011").value == 3``
addresses the amplitude of |011>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from src.utils.errors import DimensionError


@dataclass(frozen=True, slots=True)
class BitString:
    """Immutable element of GF(2)^length."""

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise DimensionError(f"BitString length must be non-negative, got {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise DimensionError(
                f"Value {self.value} does not fit in {self.length} bits"
            )

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def from_str(cls, bits: str) -> BitString:
        """Parse a string of '0'/'1' characters (whitespace ignored)."""
        cleaned = "".join(bits.split())
        if any(ch not in "01" for ch in cleaned):
            raise ValueError(f"Not a bit string: {bits!r}")
        return cls(int(cleaned, 2) if cleaned else 0, len(cleaned))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        value = 0
        length = 0
        for bit in bits:
            if bit not in (0, 1):
                raise ValueError(f"Bit values must be 0 or 1, got {bit}")
            value = (value << 1) | int(bit)
            length += 1
        return cls(value, length)

    @classmethod
    def from_array(cls, array: np.ndarray) -> BitString:
        """Build from a 1-D numpy array of 0/1 entries."""
        flat = np.asarray(array, dtype=np.uint8).ravel() % 2
        return cls.from_bits(int(b) for b in flat)

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> BitString:
        return cls((1 << length) - 1, length)

    @classmethod
    def unit(cls, length: int, position: int) -> BitString:
        """String with a single 1 at ``position``."""
        if not 0 <= position < length:
            raise DimensionError(f"Position {position} outside [0, {length})")
        return cls(1 << (length - 1 - position), length)

    @classmethod
    def from_positions(cls, length: int, positions: Iterable[int]) -> BitString:
        result = cls.zeros(length)
        for position in positions:
            result = result ^ cls.unit(length, position)
        return result

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> BitString:
        """Uniform random string drawn from an explicitly passed generator."""
        if length == 0:
            return cls.zeros(0)
        return cls.from_array(rng.integers(0, 2, size=length, dtype=np.uint8))

    # ------------------------------------------------------------------
    # Arithmetic over GF(2)
    # ------------------------------------------------------------------
    def _check_length(self, other: BitString) -> None:
        if self.length != other.length:
            raise DimensionError(
                f"Length mismatch: {self.length} vs {other.length}"
            )

    def __xor__(self, other: BitString) -> BitString:
        self._check_length(other)
        return BitString(self.value ^ other.value, self.length)

    def __and__(self, other: BitString) -> BitString:
        self._check_length(other)
        return BitString(self.value & other.value, self.length)

    def __or__(self, other: BitString) -> BitString:
        self._check_length(other)
        return BitString(self.value | other.value, self.length)

    def __invert__(self) -> BitString:
        return BitString(self.value ^ ((1 << self.length) - 1), self.length)

    def dot(self, other: BitString) -> int:
        """Inner product mod 2 (parity of the AND)."""
        self._check_length(other)
        return (self.value & other.value).bit_count() & 1

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def is_zero(self) -> bool:
        return self.value == 0

    # ------------------------------------------------------------------
    # Sequence behaviour
    # ------------------------------------------------------------------
    def __len__(self) -> int:
        return self.length

    def __getitem__(self, position: int) -> int:
        if position < 0:
            position += self.length
        if not 0 <= position < self.length:
            raise IndexError(f"Bit index {position} out of range for length {self.length}")
        return (self.value >> (self.length - 1 - position)) & 1

    def __iter__(self) -> Iterator[int]:
        for position in range(self.length):
            yield self[position]

    def select(self, positions: Sequence[int]) -> BitString:
        """Sub-string made of the bits at ``positions`` in the given order."""
        return BitString.from_bits(self[p] for p in positions)

    def concat(self, other: BitString) -> BitString:
        return BitString((self.value << other.length) | other.value, self.length + other.length)

    def flip(self, position: int) -> BitString:
        return self ^ BitString.unit(self.length, position)

    def support(self) -> list[int]:
        """Positions holding a 1."""
        return [p for p in range(self.length) if self[p]]

    def to_array(self) -> np.ndarray:
        return np.fromiter(iter(self), dtype=np.uint8, count=self.length)

    def to_str(self) -> str:
        if self.length == 0:
            return ""
        return format(self.value, f"0{self.length}b")

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"BitString('{self.to_str()}')"


def concat_all(parts: Iterable[BitString]) -> BitString:
    """Concatenate several strings left to right."""
    result = BitString.zeros(0)
    for part in parts:
        result = result.concat(part)
    return result
