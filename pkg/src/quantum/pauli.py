"""
Hermitian Pauli products on n qubits in symplectic form.

A ``PauliProduct`` with masks (x, z) and sign s stands for
s · ⊗_q P_q where P_q is I, X, Z or Y for (x_q, z_q) = (0,0), (1,0),
(0,1), (1,1). Since Y = iXZ this equals s · i^{x·z} · X^x Z^z with every
X written before the Z of the same qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from src.codes.bitstring import BitString
from src.utils.errors import DimensionError

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {letter: bits for bits, letter in _LETTERS.items()}


@dataclass(frozen=True, slots=True)
class PauliProduct:
    x_mask: BitString
    z_mask: BitString
    sign: int = 1

    def __post_init__(self) -> None:
        if self.x_mask.length != self.z_mask.length:
            raise DimensionError(
                f"X mask has {self.x_mask.length} qubits, Z mask has {self.z_mask.length}"
            )
        if self.sign not in (1, -1):
            raise ValueError(f"Sign must be ±1, got {self.sign}")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls, num_qubits: int) -> PauliProduct:
        return cls(BitString.zeros(num_qubits), BitString.zeros(num_qubits))

    @classmethod
    def from_label(cls, label: str) -> PauliProduct:
        """Parse labels such as ``"XXX"``, ``"-ZZI"`` or ``"+IYZ"``."""
        text = label.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        try:
            bits = [_BITS[ch] for ch in text.upper()]
        except KeyError as e:
            raise ValueError(f"Invalid Pauli label {label!r}") from e
        return cls(
            BitString.from_bits(b[0] for b in bits),
            BitString.from_bits(b[1] for b in bits),
            sign,
        )

    @classmethod
    def on_qubits(cls, num_qubits: int, paulis: Mapping[int, str], sign: int = 1) -> PauliProduct:
        """Place single-qubit letters at the given positions, identity elsewhere."""
        letters = ["I"] * num_qubits
        for qubit, letter in paulis.items():
            if not 0 <= qubit < num_qubits:
                raise DimensionError(f"Qubit {qubit} outside [0, {num_qubits})")
            letters[qubit] = letter.upper()
        product = cls.from_label("".join(letters))
        return product if sign == 1 else -product

    @classmethod
    def z_type(cls, mask: BitString, sign: int = 1) -> PauliProduct:
        return cls(BitString.zeros(mask.length), mask, sign)

    @classmethod
    def x_type(cls, mask: BitString, sign: int = 1) -> PauliProduct:
        return cls(mask, BitString.zeros(mask.length), sign)

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------
    @property
    def num_qubits(self) -> int:
        return self.x_mask.length

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).weight

    @property
    def y_count(self) -> int:
        return (self.x_mask & self.z_mask).weight

    def is_identity(self) -> bool:
        return self.x_mask.is_zero() and self.z_mask.is_zero()

    def commutes_with(self, other: PauliProduct) -> bool:
        """Symplectic inner product x1·z2 + z1·x2 = 0 (mod 2)."""
        return (self.x_mask.dot(other.z_mask) + self.z_mask.dot(other.x_mask)) % 2 == 0

    def __neg__(self) -> PauliProduct:
        return PauliProduct(self.x_mask, self.z_mask, -self.sign)

    def __mul__(self, other: PauliProduct) -> PauliProduct:
        """
        Operator product self · other.

        Raises:
            ValueError: If the operators anticommute (product not Hermitian)
        """
        if not self.commutes_with(other):
            raise ValueError(f"{self} and {other} anticommute; product is not Hermitian")
        x3 = self.x_mask ^ other.x_mask
        z3 = self.z_mask ^ other.z_mask
        exponent = (
            self.y_count
            + other.y_count
            - (x3 & z3).weight
            + 2 * self.z_mask.dot(other.x_mask)
        ) % 4
        sign = self.sign * other.sign * (1 if exponent == 0 else -1)
        return PauliProduct(x3, z3, sign)

    def embed(self, num_qubits: int, qubits: Iterable[int]) -> PauliProduct:
        """Lift onto a larger register; operator qubit i lands on ``qubits[i]``."""
        targets = list(qubits)
        if len(targets) != self.num_qubits:
            raise DimensionError(f"Need {self.num_qubits} target qubits, got {len(targets)}")
        x_bits = [0] * num_qubits
        z_bits = [0] * num_qubits
        for source, target in enumerate(targets):
            x_bits[target] = self.x_mask[source]
            z_bits[target] = self.z_mask[source]
        return PauliProduct(BitString.from_bits(x_bits), BitString.from_bits(z_bits), self.sign)

    def letter(self, qubit: int) -> str:
        return _LETTERS[(self.x_mask[qubit], self.z_mask[qubit])]

    def to_label(self) -> str:
        body = "".join(self.letter(q) for q in range(self.num_qubits))
        return ("+" if self.sign == 1 else "-") + body

    def __str__(self) -> str:
        return self.to_label()


def product_of(operators: Iterable[PauliProduct], num_qubits: int) -> PauliProduct:
    """Multiply a sequence of mutually commuting operators."""
    result = PauliProduct.identity(num_qubits)
    for operator in operators:
        result = result * operator
    return result
