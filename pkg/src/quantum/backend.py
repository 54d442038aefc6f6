"""
Backend-neutral state operations.

Everything here works on either a ``DenseState`` or a ``Tableau`` through
the common gate/measurement interface, which is what lets protocol code
run unchanged on both and lets the two be cross-checked.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.stats import chi2_contingency

from src.codes.bitstring import BitString
from src.quantum.dense import DenseState
from src.quantum.measurement import MeasurementRecord
from src.quantum.pauli import PauliProduct
from src.quantum.tableau import Tableau
from src.utils import logging
from src.utils.config import DENSE_QUBIT_LIMIT
from src.utils.errors import BackendDivergenceError, BackendError, DimensionError, DomainError

# Two-sided 3σ level
CROSSCHECK_ALPHA = 0.0027

PAULI_LABELS = ("I", "X", "Y", "Z")


QuantumState = Union[DenseState, Tableau]


def select_backend(requested: str, num_qubits: int) -> str:
    """
    Resolve ``auto`` and validate an explicit choice.

    Raises:
        BackendError: If dense is requested above the qubit limit
    """
    if requested == "auto":
        return "dense" if num_qubits <= DENSE_QUBIT_LIMIT else "tableau"
    if requested == "dense" and num_qubits > DENSE_QUBIT_LIMIT:
        raise BackendError(
            f"{num_qubits} qubits exceed the dense backend limit of {DENSE_QUBIT_LIMIT}"
        )
    if requested not in ("dense", "tableau"):
        raise BackendError(f"Unknown quantum backend '{requested}'")
    return requested


def create_state(backend: str, num_qubits: int) -> QuantumState:
    kind = select_backend(backend, num_qubits)
    return DenseState(num_qubits) if kind == "dense" else Tableau(num_qubits)


def block_qubit(party: int, block: int, num_blocks: int) -> int:
    """Party-major layout: party p's qubit for block j sits at p·blocks + j."""
    return party * num_blocks + block


def prepare_ghz_blocks(num_parties: int, num_blocks: int, backend: str = "auto") -> QuantumState:
    """
    ``num_blocks`` independent GHZ states over ``num_parties`` parties.

    Raises:
        DomainError: If fewer than two parties
        BackendError: If the register does not fit the backend
    """
    if num_parties < 2:
        raise DomainError(f"A GHZ state needs at least 2 parties, got {num_parties}")
    if num_blocks < 1:
        raise DomainError(f"Need at least one block, got {num_blocks}")
    state = create_state(backend, num_parties * num_blocks)
    for block in range(num_blocks):
        state.apply_h(block_qubit(0, block, num_blocks))
        for party in range(1, num_parties):
            state.apply_cnot(
                block_qubit(party - 1, block, num_blocks),
                block_qubit(party, block, num_blocks),
            )
    return state


def prepare_ghz(num_parties: int, backend: str = "auto") -> QuantumState:
    """(|0…0⟩ + |1…1⟩)/√2 over ``num_parties`` qubits."""
    return prepare_ghz_blocks(num_parties, 1, backend)


def apply_hadamard_mask(state: QuantumState, mask: BitString) -> QuantumState:
    if mask.length != state.num_qubits:
        raise DimensionError(f"Mask length {mask.length} != {state.num_qubits} qubits")
    for qubit in mask.support():
        state.apply_h(qubit)
    return state


def apply_single_pauli(state: QuantumState, qubit: int, label: str) -> QuantumState:
    if label != "I":
        state.apply_pauli(PauliProduct.on_qubits(state.num_qubits, {qubit: label}))
    return state


def validate_pauli_probabilities(p_x: float, p_y: float, p_z: float) -> None:
    if min(p_x, p_y, p_z) < 0 or p_x + p_y + p_z > 1 + 1e-12:
        raise DomainError(
            f"Invalid Pauli channel probabilities px={p_x}, py={p_y}, pz={p_z}"
        )


def sample_pauli(p_x: float, p_y: float, p_z: float, rng: np.random.Generator) -> str:
    """Draw I/X/Y/Z with probabilities (1−Σp, p_x, p_y, p_z)."""
    validate_pauli_probabilities(p_x, p_y, p_z)
    u = rng.random()
    if u < p_x:
        return "X"
    if u < p_x + p_y:
        return "Y"
    if u < p_x + p_y + p_z:
        return "Z"
    return "I"


def apply_pauli_channel(state: QuantumState, qubit: int, p_x: float, p_y: float, p_z: float,
                        rng: np.random.Generator) -> tuple[QuantumState, str]:
    """
    Apply a sampled Pauli error to one qubit.

    Returns:
        Tuple (state, applied label) where the label is ground truth hidden
        from the protocol parties
    """
    label = sample_pauli(p_x, p_y, p_z, rng)
    apply_single_pauli(state, qubit, label)
    return state, label


def measure_computational(state: QuantumState, qubits: Sequence[int],
                          rng: np.random.Generator) -> BitString:
    return state.measure_computational(qubits, rng)


def measure_pauli_product(state: QuantumState, operator: PauliProduct,
                          rng: np.random.Generator) -> int:
    return state.measure_pauli(operator, rng).outcome


# ----------------------------------------------------------------------
# Clifford programs and backend cross-check
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Instruction:
    gate: str
    qubits: tuple[int, ...]


def random_clifford_program(num_qubits: int, depth: int,
                            rng: np.random.Generator) -> list[Instruction]:
    """
    Random gate sequence over {H, S, CNOT, X, Z} with occasional mid-circuit
    measurements, ending in a measurement of every qubit.
    """
    gates = ["h", "s", "x", "z", "measure"] + (["cnot"] * 2 if num_qubits > 1 else [])
    program = []
    for _ in range(depth):
        gate = gates[int(rng.integers(len(gates)))]
        if gate == "cnot":
            control, target = rng.choice(num_qubits, size=2, replace=False)
            program.append(Instruction("cnot", (int(control), int(target))))
        else:
            program.append(Instruction(gate, (int(rng.integers(num_qubits)),)))
    program.extend(Instruction("measure", (q,)) for q in range(num_qubits))
    return program


def run_program(program: Sequence[Instruction], state: QuantumState,
                rng: np.random.Generator) -> BitString:
    """Execute a program; returns every measured bit in order."""
    outcomes = []
    for instruction in program:
        gate, qubits = instruction.gate, instruction.qubits
        if gate == "h":
            state.apply_h(qubits[0])
        elif gate == "s":
            state.apply_s(qubits[0])
        elif gate == "cnot":
            state.apply_cnot(qubits[0], qubits[1])
        elif gate in ("x", "y", "z"):
            apply_single_pauli(state, qubits[0], gate.upper())
        elif gate == "measure":
            outcomes.append(state.measure_qubit(qubits[0], rng))
        else:
            raise ValueError(f"Unknown instruction '{gate}'")
    return BitString.from_bits(outcomes)


@dataclass(frozen=True)
class CrosscheckReport:
    shots: int
    matched_mismatches: int
    p_value: float
    distinct_outcomes: int

    @property
    def passed(self) -> bool:
        return self.matched_mismatches == 0 and self.p_value >= CROSSCHECK_ALPHA

    def assert_agreement(self) -> None:
        if not self.passed:
            raise BackendDivergenceError(
                f"Backends diverged: {self.matched_mismatches} matched-seed mismatches, "
                f"chi-square p-value {self.p_value:.3g}"
            )


def crosscheck(program: Sequence[Instruction], num_qubits: int, shots: int,
               seed: int, strict: bool = False) -> CrosscheckReport:
    """
    Compare the dense and tableau backends on one Clifford program.

    Each shot runs both backends twice: once with an identical generator
    (outcomes must match exactly) and once with independent generators,
    whose outcome histograms are compared with a chi-square test.

    Args:
        strict: Raise BackendDivergenceError instead of only reporting
    """
    root = np.random.SeedSequence(seed)
    matched_root, dense_root, tableau_root = root.spawn(3)
    matched_seeds = matched_root.spawn(shots)
    dense_seeds = dense_root.spawn(shots)
    tableau_seeds = tableau_root.spawn(shots)

    mismatches = 0
    dense_counts: Counter = Counter()
    tableau_counts: Counter = Counter()
    for shot in range(shots):
        dense_bits = run_program(program, DenseState(num_qubits),
                                 np.random.default_rng(matched_seeds[shot]))
        tableau_bits = run_program(program, Tableau(num_qubits),
                                   np.random.default_rng(matched_seeds[shot]))
        if dense_bits != tableau_bits:
            mismatches += 1
        dense_counts[run_program(program, DenseState(num_qubits),
                                 np.random.default_rng(dense_seeds[shot])).to_str()] += 1
        tableau_counts[run_program(program, Tableau(num_qubits),
                                   np.random.default_rng(tableau_seeds[shot])).to_str()] += 1

    outcomes = sorted(set(dense_counts) | set(tableau_counts))
    if len(outcomes) < 2:
        p_value = 1.0
    else:
        table = np.array([[dense_counts[o] for o in outcomes],
                          [tableau_counts[o] for o in outcomes]])
        p_value = float(chi2_contingency(table).pvalue)

    report = CrosscheckReport(
        shots=shots,
        matched_mismatches=mismatches,
        p_value=p_value,
        distinct_outcomes=len(outcomes),
    )
    logging.debug(
        f"Backend crosscheck: {shots} shots, {mismatches} mismatches, p={p_value:.3g}"
    )
    if strict:
        report.assert_agreement()
    return report
