"""
Stabilizer tableau backend (CHP-style destabilizer/stabilizer tableau).

Rows 0..n−1 hold destabilizers and rows n..2n−1 stabilizers, each as
symplectic bits x, z plus a sign bit r (row = (−1)^r · ⊗ P_q, with Y
where both bits are set). Signs are tracked mod ±1; global phases are
dropped, which no protocol observable depends on.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from src.codes.bitstring import BitString
from src.quantum.measurement import MeasurementRecord
from src.quantum.pauli import PauliProduct
from src.utils.errors import DimensionError


def _phase_exponent(x1, z1, x2, z2) -> np.ndarray:
    """
    Sum over qubits of the power of i picked up by P1 · P2 (CHP g-function).

    Works row-wise on 2-D inputs.
    """
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    g = np.where(
        (x1 == 1) & (z1 == 1), z2 - x2,
        np.where(
            (x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1),
            np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0),
        ),
    )
    return g.sum(axis=-1)


class Tableau:
    """Stabilizer state on n qubits, initialised to |0…0⟩."""

    kind = "tableau"

    def __init__(self, num_qubits: int):
        if num_qubits < 1:
            raise ValueError(f"Number of qubits must be positive, got {num_qubits}")
        n = num_qubits
        self.num_qubits = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.x[np.arange(n), np.arange(n)] = 1
        self.z[n + np.arange(n), np.arange(n)] = 1

    @classmethod
    def zeros(cls, num_qubits: int) -> Tableau:
        return cls(num_qubits)

    @classmethod
    def basis(cls, bits: BitString) -> Tableau:
        tableau = cls(bits.length)
        for qubit in bits.support():
            tableau.apply_x(qubit)
        return tableau

    def copy(self) -> Tableau:
        other = Tableau.__new__(Tableau)
        other.num_qubits = self.num_qubits
        other.x = self.x.copy()
        other.z = self.z.copy()
        other.r = self.r.copy()
        return other

    def _check(self, qubit: int) -> None:
        if not 0 <= qubit < self.num_qubits:
            raise DimensionError(f"Qubit {qubit} outside [0, {self.num_qubits})")

    # ------------------------------------------------------------------
    # Clifford gates
    # ------------------------------------------------------------------
    def apply_h(self, qubit: int) -> Tableau:
        self._check(qubit)
        self.r ^= self.x[:, qubit] & self.z[:, qubit]
        self.x[:, qubit], self.z[:, qubit] = self.z[:, qubit].copy(), self.x[:, qubit].copy()
        return self

    def apply_s(self, qubit: int) -> Tableau:
        self._check(qubit)
        self.r ^= self.x[:, qubit] & self.z[:, qubit]
        self.z[:, qubit] ^= self.x[:, qubit]
        return self

    def apply_cnot(self, control: int, target: int) -> Tableau:
        self._check(control)
        self._check(target)
        if control == target:
            raise ValueError("CNOT control and target must differ")
        xc, zc = self.x[:, control], self.z[:, control]
        xt, zt = self.x[:, target], self.z[:, target]
        self.r ^= xc & zt & (xt ^ zc ^ 1)
        self.x[:, target] ^= xc
        self.z[:, control] ^= zt
        return self

    def apply_pauli(self, operator: PauliProduct) -> Tableau:
        """Conjugation flips the sign of every row anticommuting with the operator."""
        self.r ^= self._anticommutes(operator)
        return self

    def apply_x(self, qubit: int) -> Tableau:
        return self.apply_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "X"}))

    def apply_z(self, qubit: int) -> Tableau:
        return self.apply_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "Z"}))

    # ------------------------------------------------------------------
    # Row algebra
    # ------------------------------------------------------------------
    def _anticommutes(self, operator: PauliProduct) -> np.ndarray:
        if operator.num_qubits != self.num_qubits:
            raise DimensionError(
                f"Operator on {operator.num_qubits} qubits used with {self.num_qubits}"
            )
        ox = operator.x_mask.to_array()
        oz = operator.z_mask.to_array()
        return ((self.x.astype(np.int64) @ oz + self.z.astype(np.int64) @ ox) % 2).astype(np.uint8)

    def _rowsum(self, targets: np.ndarray, source: int) -> None:
        """Replace each target row h by row_source · row_h."""
        if targets.size == 0:
            return
        exponent = (
            2 * self.r[targets].astype(np.int64)
            + 2 * int(self.r[source])
            + _phase_exponent(
                np.broadcast_to(self.x[source], (targets.size, self.num_qubits)),
                np.broadcast_to(self.z[source], (targets.size, self.num_qubits)),
                self.x[targets],
                self.z[targets],
            )
        ) % 4
        self.r[targets] = (exponent == 2).astype(np.uint8)
        self.x[targets] ^= self.x[source]
        self.z[targets] ^= self.z[source]

    def _row(self, index: int) -> PauliProduct:
        return PauliProduct(
            BitString.from_array(self.x[index]),
            BitString.from_array(self.z[index]),
            -1 if self.r[index] else 1,
        )

    def stabilizers(self) -> list[PauliProduct]:
        n = self.num_qubits
        return [self._row(n + i) for i in range(n)]

    def destabilizers(self) -> list[PauliProduct]:
        return [self._row(i) for i in range(self.num_qubits)]

    # ------------------------------------------------------------------
    # Measurement
    # ------------------------------------------------------------------
    def measure_pauli(self, operator: PauliProduct, rng: np.random.Generator) -> MeasurementRecord:
        """
        Measure a Hermitian Pauli product.

        Random outcomes are drawn as rng.random() < 1/2 so a dense state fed
        the same generator reproduces them.
        """
        n = self.num_qubits
        anti = self._anticommutes(operator)
        stabilizer_hits = np.nonzero(anti[n:])[0]

        if stabilizer_hits.size:
            pivot = n + int(stabilizer_hits[0])
            others = np.nonzero(anti)[0]
            others = others[(others != pivot) & (others != pivot - n)]
            self._rowsum(others, pivot)
            self.x[pivot - n] = self.x[pivot]
            self.z[pivot - n] = self.z[pivot]
            self.r[pivot - n] = self.r[pivot]

            outcome = 1 if rng.random() < 0.5 else -1
            self.x[pivot] = operator.x_mask.to_array()
            self.z[pivot] = operator.z_mask.to_array()
            self.r[pivot] = 0 if operator.sign * outcome == 1 else 1
            return MeasurementRecord(observable=operator, outcome=outcome, deterministic=False)

        # Deterministic: the operator is ± a product of stabilizers, namely
        # those whose destabilizer anticommutes with it.
        scratch_x = np.zeros(n, dtype=np.uint8)
        scratch_z = np.zeros(n, dtype=np.uint8)
        scratch_r = 0
        for i in np.nonzero(anti[:n])[0]:
            row = n + int(i)
            exponent = (
                2 * scratch_r
                + 2 * int(self.r[row])
                + int(_phase_exponent(self.x[row], self.z[row], scratch_x, scratch_z))
            ) % 4
            scratch_r = 1 if exponent == 2 else 0
            scratch_x ^= self.x[row]
            scratch_z ^= self.z[row]
        eigenvalue = -1 if scratch_r else 1
        return MeasurementRecord(
            observable=operator, outcome=operator.sign * eigenvalue, deterministic=True
        )

    def expectation(self, operator: PauliProduct) -> float:
        """±1 for stabilizer-group elements, otherwise 0."""
        n = self.num_qubits
        anti = self._anticommutes(operator)
        if np.any(anti[n:]):
            return 0.0
        record = self.copy().measure_pauli(operator, np.random.default_rng(0))
        return float(record.outcome)

    def measure_qubit(self, qubit: int, rng: np.random.Generator) -> int:
        self._check(qubit)
        return self.measure_pauli(PauliProduct.on_qubits(self.num_qubits, {qubit: "Z"}), rng).bit

    def measure_computational(self, qubits: Sequence[int], rng: np.random.Generator) -> BitString:
        return BitString.from_bits(self.measure_qubit(q, rng) for q in qubits)

    # ------------------------------------------------------------------
    # Invariants and canonical form
    # ------------------------------------------------------------------
    def check_invariants(self) -> bool:
        """
        Symplectic structure: stabilizers commute pairwise, destabilizers
        commute pairwise, and destabilizer i anticommutes exactly with
        stabilizer i.
        """
        n = self.num_qubits
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        expected[np.arange(n), n + np.arange(n)] = 1
        expected[n + np.arange(n), np.arange(n)] = 1
        return bool(np.array_equal(form, expected))

    def canonical_stabilizers(self) -> tuple[PauliProduct, ...]:
        """
        Reduced row echelon form of the stabilizer group over the column
        order (x_0..x_{n−1}, z_0..z_{n−1}); identical for equal states.
        """
        n = self.num_qubits
        work = self.copy()
        rows = list(range(n, 2 * n))
        bits = np.hstack([work.x, work.z])
        pivot_index = 0
        for column in range(2 * n):
            if pivot_index >= n:
                break
            candidates = [row for row in rows[pivot_index:] if bits[row, column]]
            if not candidates:
                continue
            pivot_row = candidates[0]
            position = rows.index(pivot_row)
            rows[pivot_index], rows[position] = rows[position], rows[pivot_index]
            pivot_row = rows[pivot_index]
            targets = np.array(
                [row for row in rows if row != pivot_row and bits[row, column]], dtype=np.int64
            )
            work._rowsum(targets, pivot_row)
            bits = np.hstack([work.x, work.z])
            pivot_index += 1
        return tuple(work._row(row) for row in rows)

    def __repr__(self) -> str:
        return f"Tableau(num_qubits={self.num_qubits})"
