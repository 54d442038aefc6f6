"""
GHZ-basis bookkeeping in extended BDSW notation.

An N-qubit GHZ-basis state is fixed by the eigenvalues of the generators
X^⊗N, Z_1Z_2, …, Z_{N−1}Z_N. Its label has bit i = 1 iff the i-th sign is
+1, so the ideal GHZ state is labelled 1…1 and the all-minus state 0…0.
"""

from __future__ import annotations

import functools
from typing import Sequence

import numpy as np

from src.codes.bitstring import BitString, concat_all
from src.quantum.backend import QuantumState, block_qubit
from src.quantum.dense import DenseState, check_dense_limit
from src.quantum.pauli import PauliProduct
from src.utils.errors import DimensionError, DomainError

PERFECT_THETA = np.pi / 4


def bdsw_encode(signs: Sequence[int]) -> BitString:
    """Sign pattern (s_1, …, s_N) → label with bit i = [s_i = +1]."""
    if any(s not in (1, -1) for s in signs):
        raise DomainError(f"Signs must be ±1, got {tuple(signs)}")
    return BitString.from_bits(1 if s == 1 else 0 for s in signs)


def bdsw_decode(label: BitString) -> tuple[int, ...]:
    return tuple(1 if bit else -1 for bit in label)


def perfect_label(num_parties: int, num_blocks: int = 1) -> BitString:
    """All-ones label of ``num_blocks`` ideal GHZ states."""
    return BitString.ones(num_parties * num_blocks)


def ghz_generators(num_parties: int) -> list[PauliProduct]:
    """X^⊗N followed by the nearest-neighbour Z_iZ_{i+1}."""
    if num_parties < 2:
        raise DomainError(f"Need at least 2 parties, got {num_parties}")
    generators = [PauliProduct.from_label("X" * num_parties)]
    for i in range(num_parties - 1):
        generators.append(PauliProduct.on_qubits(num_parties, {i: "Z", i + 1: "Z"}))
    return generators


def block_generators(num_parties: int, num_blocks: int, block: int,
                     num_qubits: int | None = None) -> list[PauliProduct]:
    """Generators of one block embedded in the party-major register."""
    total = num_qubits or num_parties * num_blocks
    qubits = [block_qubit(p, block, num_blocks) for p in range(num_parties)]
    return [g.embed(total, qubits) for g in ghz_generators(num_parties)]


def _branch_bits(signs: Sequence[int]) -> BitString:
    """Bit pattern b with b_0 = 0 and b_{i+1} = b_i ⊕ [Z_iZ_{i+1} sign = −1]."""
    bits = [0]
    for sign in signs[1:]:
        bits.append(bits[-1] ^ (1 if sign == -1 else 0))
    return BitString.from_bits(bits)


def ghz_basis_state(signs: Sequence[int], theta: float = PERFECT_THETA) -> DenseState:
    """
    Dense GHZ-basis state with the given stabilizer signs.

    With μ = 0 for a + sign on X^⊗N the state is cos θ|b⟩ + sin θ|b̄⟩,
    and with μ = 1 it is sin θ|b⟩ − cos θ|b̄⟩. At θ = π/4 these are the
    signed GHZ-basis states.

    Raises:
        DomainError: If θ ∉ (0, π/2), or θ ≠ π/4 with more than 3 parties
    """
    num_parties = len(signs)
    bdsw_encode(signs)
    if num_parties < 2:
        raise DomainError(f"Need at least 2 parties, got {num_parties}")
    if not 0 < theta < np.pi / 2:
        raise DomainError(f"theta must lie in (0, π/2), got {theta}")
    if num_parties > 3 and not np.isclose(theta, PERFECT_THETA):
        raise DomainError("The general θ form is defined for three parties only")
    check_dense_limit(num_parties)

    branch = _branch_bits(signs)
    complement = ~branch
    amplitudes = np.zeros(1 << num_parties, dtype=np.complex128)
    if signs[0] == 1:
        amplitudes[branch.value] = np.cos(theta)
        amplitudes[complement.value] = np.sin(theta)
    else:
        amplitudes[branch.value] = np.sin(theta)
        amplitudes[complement.value] = -np.cos(theta)
    return DenseState(num_parties, amplitudes)


def bdsw_product_state(labels: BitString, num_parties: int) -> DenseState:
    """
    Dense product of GHZ-basis blocks, one N-bit label per block, laid out
    party-major like every protocol register.
    """
    if labels.length % num_parties:
        raise DimensionError(f"Label length {labels.length} is not a multiple of {num_parties}")
    num_blocks = labels.length // num_parties
    check_dense_limit(labels.length)

    state = None
    for block in range(num_blocks):
        block_label = labels.select(range(block * num_parties, (block + 1) * num_parties))
        block_state = ghz_basis_state(bdsw_decode(block_label))
        state = block_state if state is None else state.tensor(block_state)

    # block-major (block j, party p at j·N + p) → party-major (p·blocks + j)
    order = [block * num_parties + party
             for party in range(num_parties) for block in range(num_blocks)]
    return state.permute_qubits(order)


def measure_R(state: QuantumState, num_parties: int, num_blocks: int,
              rng: np.random.Generator) -> BitString:
    """
    Measure every block in the GHZ basis through its generators.

    The register's system qubits are the first N·blocks; any further
    qubits (an adversary's ancilla) are left alone.

    Returns:
        Concatenated N-bit labels, block 0 first
    """
    if state.num_qubits < num_parties * num_blocks:
        raise DimensionError(
            f"State has {state.num_qubits} qubits, need {num_parties * num_blocks}"
        )
    labels = []
    for block in range(num_blocks):
        signs = [
            state.measure_pauli(g, rng).outcome
            for g in block_generators(num_parties, num_blocks, block, state.num_qubits)
        ]
        labels.append(bdsw_encode(signs))
    return concat_all(labels)


@functools.lru_cache(maxsize=8)
def _basis_change_labels(num_parties: int) -> np.ndarray:
    """
    Label value of the GHZ-basis state reached by the preparation circuit
    from each computational input, indexed by the input value.
    """
    labels = np.zeros(1 << num_parties, dtype=np.int64)
    rng = np.random.default_rng(0)
    for value in range(1 << num_parties):
        state = DenseState.basis(BitString(value, num_parties))
        _ghz_circuit(state, num_parties)
        signs = [state.measure_pauli(g, rng).outcome for g in ghz_generators(num_parties)]
        labels[value] = bdsw_encode(signs).value
    return labels


def _ghz_circuit(state: DenseState, num_parties: int, qubits: Sequence[int] | None = None) -> None:
    qubits = list(range(num_parties)) if qubits is None else list(qubits)
    state.apply_h(qubits[0])
    for i in range(1, num_parties):
        state.apply_cnot(qubits[i - 1], qubits[i])


def _inverse_ghz_circuit(state: DenseState, qubits: Sequence[int]) -> None:
    for i in range(len(qubits) - 1, 0, -1):
        state.apply_cnot(qubits[i - 1], qubits[i])
    state.apply_h(qubits[0])


def ghz_basis_distribution(state: DenseState, num_parties: int,
                           num_blocks: int) -> dict[BitString, float]:
    """
    Exact probability of every BDSW string a GHZ-basis measurement of the
    system qubits would return (ancilla qubits are traced out).
    """
    system = num_parties * num_blocks
    if state.num_qubits < system:
        raise DimensionError(f"State has {state.num_qubits} qubits, need {system}")

    work = state.copy()
    for block in range(num_blocks):
        _inverse_ghz_circuit(work, [block_qubit(p, block, num_blocks) for p in range(num_parties)])

    ancilla = work.num_qubits - system
    probabilities = work.probabilities().reshape(1 << system, 1 << ancilla).sum(axis=1)
    lookup = _basis_change_labels(num_parties)

    distribution: dict[BitString, float] = {}
    for index in np.nonzero(probabilities > 1e-15)[0]:
        computational = BitString(int(index), system)
        labels = []
        for block in range(num_blocks):
            block_bits = computational.select(
                [block_qubit(p, block, num_blocks) for p in range(num_parties)]
            )
            labels.append(BitString(int(lookup[block_bits.value]), num_parties))
        label = concat_all(labels)
        distribution[label] = distribution.get(label, 0.0) + float(probabilities[index])
    return distribution
