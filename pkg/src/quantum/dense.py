"""
Dense state-vector backend.

Amplitude index i addresses the basis state whose bit string (qubit 0
leftmost) has integer value i, so qubit q corresponds to bit n−1−q of i.
This backend is the numerical oracle: it is exact but limited to
``DENSE_QUBIT_LIMIT`` qubits.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.codes.bitstring import BitString
from src.quantum.measurement import MeasurementRecord, sample_sign
from src.quantum.pauli import PauliProduct
from src.utils.config import DENSE_QUBIT_LIMIT, DENSITY_QUBIT_LIMIT, NUMERICAL_TOLERANCE
from src.utils.errors import BackendError, DimensionError

_SQRT2_INV = 1 / np.sqrt(2)


def check_dense_limit(num_qubits: int, limit: Optional[int] = None) -> None:
    limit = DENSE_QUBIT_LIMIT if limit is None else limit
    if num_qubits > limit:
        raise BackendError(
            f"{num_qubits} qubits exceed the dense backend limit of {limit}"
        )


class DenseState:
    """Mutable n-qubit pure state; confined to one session at a time."""

    kind = "dense"

    def __init__(self, num_qubits: int, amplitudes: Optional[np.ndarray] = None):
        if num_qubits < 1:
            raise ValueError(f"Number of qubits must be positive, got {num_qubits}")
        check_dense_limit(num_qubits)
        self.num_qubits = num_qubits
        if amplitudes is None:
            self.amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
            self.amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=np.complex128).ravel()
            if amplitudes.size != 1 << num_qubits:
                raise DimensionError(
                    f"Expected {1 << num_qubits} amplitudes, got {amplitudes.size}"
                )
            self.amplitudes = amplitudes.copy()

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def zeros(cls, num_qubits: int) -> DenseState:
        return cls(num_qubits)

    @classmethod
    def basis(cls, bits: BitString) -> DenseState:
        state = cls(bits.length)
        state.amplitudes[0] = 0.0
        state.amplitudes[bits.value] = 1.0
        return state

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray, normalize: bool = True) -> DenseState:
        amplitudes = np.asarray(amplitudes, dtype=np.complex128).ravel()
        num_qubits = int(np.log2(amplitudes.size))
        if 1 << num_qubits != amplitudes.size:
            raise DimensionError(f"{amplitudes.size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amplitudes)
            if norm == 0:
                raise ValueError("Cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        return cls(num_qubits, amplitudes)

    def copy(self) -> DenseState:
        return DenseState(self.num_qubits, self.amplitudes)

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------
    def _bit(self, qubit: int) -> int:
        if not 0 <= qubit < self.num_qubits:
            raise DimensionError(f"Qubit {qubit} outside [0, {self.num_qubits})")
        return 1 << (self.num_qubits - 1 - qubit)

    def _indices(self) -> np.ndarray:
        return np.arange(1 << self.num_qubits, dtype=np.int64)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def is_normalized(self, tolerance: float = NUMERICAL_TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tolerance

    # ------------------------------------------------------------------
    # Gates
    # ------------------------------------------------------------------
    def apply_h(self, qubit: int) -> DenseState:
        self._bit(qubit)
        view = self.amplitudes.reshape(1 << qubit, 2, -1)
        zero, one = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = (zero + one) * _SQRT2_INV
        view[:, 1, :] = (zero - one) * _SQRT2_INV
        return self

    def apply_s(self, qubit: int) -> DenseState:
        bit = self._bit(qubit)
        self.amplitudes[(self._indices() & bit) != 0] *= 1j
        return self

    def apply_cnot(self, control: int, target: int) -> DenseState:
        if control == target:
            raise ValueError("CNOT control and target must differ")
        control_bit, target_bit = self._bit(control), self._bit(target)
        indices = self._indices()
        source = indices ^ np.where(indices & control_bit, target_bit, 0)
        self.amplitudes = self.amplitudes[source]
        return self

    def apply_pauli(self, operator: PauliProduct) -> DenseState:
        """Apply sign · i^{x·z} X^x Z^z."""
        self.amplitudes = self._pauli_image(operator)
        return self

    def apply_x(self, qubit: int) -> DenseState:
        return self.apply_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "X"}))

    def apply_z(self, qubit: int) -> DenseState:
        return self.apply_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "Z"}))

    def _pauli_image(self, operator: PauliProduct) -> np.ndarray:
        if operator.num_qubits != self.num_qubits:
            raise DimensionError(
                f"Operator on {operator.num_qubits} qubits applied to {self.num_qubits}"
            )
        x_value, z_value = operator.x_mask.value, operator.z_mask.value
        indices = self._indices()
        parity = np.bitwise_count(indices & z_value) & 1
        phase = operator.sign * (1j ** operator.y_count)
        image = np.empty_like(self.amplitudes)
        image[indices ^ x_value] = phase * np.where(parity, -1.0, 1.0) * self.amplitudes
        return image

    # ------------------------------------------------------------------
    # Expectations and measurement
    # ------------------------------------------------------------------
    def expectation(self, operator: PauliProduct) -> float:
        return float(np.vdot(self.amplitudes, self._pauli_image(operator)).real)

    def measure_pauli(self, operator: PauliProduct, rng: np.random.Generator) -> MeasurementRecord:
        """Born-rule measurement of a Pauli product; the state collapses."""
        image = self._pauli_image(operator)
        p_plus = min(1.0, max(0.0, (1.0 + float(np.vdot(self.amplitudes, image).real)) / 2))
        outcome, deterministic = sample_sign(p_plus, rng)
        projected = (self.amplitudes + outcome * image) / 2
        self.amplitudes = projected / np.linalg.norm(projected)
        return MeasurementRecord(observable=operator, outcome=outcome, deterministic=deterministic)

    def measure_qubit(self, qubit: int, rng: np.random.Generator) -> int:
        record = self.measure_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "Z"}), rng)
        return record.bit

    def measure_computational(self, qubits: Sequence[int], rng: np.random.Generator) -> BitString:
        return BitString.from_bits(self.measure_qubit(q, rng) for q in qubits)

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------
    def permute_qubits(self, order: Sequence[int]) -> DenseState:
        """New state whose qubit i is this state's qubit ``order[i]``."""
        if sorted(order) != list(range(self.num_qubits)):
            raise DimensionError(f"{order} is not a permutation of {self.num_qubits} qubits")
        tensor = self.amplitudes.reshape((2,) * self.num_qubits)
        return DenseState(self.num_qubits, np.transpose(tensor, order).ravel())

    def tensor(self, other: DenseState) -> DenseState:
        return DenseState(self.num_qubits + other.num_qubits,
                          np.kron(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> np.ndarray:
        check_dense_limit(self.num_qubits, DENSITY_QUBIT_LIMIT)
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def reduced_density_matrix(self, keep: Sequence[int]) -> np.ndarray:
        """Partial trace over every qubit not in ``keep`` (kept in the given order)."""
        keep = list(keep)
        check_dense_limit(len(keep), DENSITY_QUBIT_LIMIT)
        traced = [q for q in range(self.num_qubits) if q not in keep]
        tensor = np.transpose(self.amplitudes.reshape((2,) * self.num_qubits), keep + traced)
        matrix = tensor.reshape(1 << len(keep), -1)
        return matrix @ matrix.conj().T

    def __repr__(self) -> str:
        return f"DenseState(num_qubits={self.num_qubits})"


def inner_product(state_a: DenseState, state_b: DenseState) -> complex:
    if state_a.num_qubits != state_b.num_qubits:
        raise DimensionError(
            f"States have {state_a.num_qubits} and {state_b.num_qubits} qubits"
        )
    return complex(np.vdot(state_a.amplitudes, state_b.amplitudes))


def fidelity(state_a: DenseState, state_b: DenseState) -> float:
    """|<a|b>|² for pure states."""
    return float(min(1.0, abs(inner_product(state_a, state_b)) ** 2))
