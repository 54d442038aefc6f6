"""
CSS codes built from nested binary codes C2 ⊂ C1.

The parameterized codeword for coset representative v and displacements
(x, z) is

    Q_{x,z}(v) = |C2|^{-1/2} Σ_{w ∈ C2} (−1)^{w·z} |v + w + x⟩.

Bit errors are decoded with C1's syndrome table and phase errors with the
table of C2⊥, whose parity-check matrix is G2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from src.codes import gf2
from src.codes.bitstring import BitString
from src.codes.linear_codes import (
    LinearCode,
    coset_label,
    coset_representative,
    codewords,
    contains,
    dual,
    nesting_report,
    syndrome,
)
from src.quantum.dense import DenseState, check_dense_limit
from src.quantum.pauli import PauliProduct
from src.utils import logging
from src.utils.config import DENSITY_QUBIT_LIMIT, MAX_ENUMERATION_DIMENSION, NUMERICAL_TOLERANCE
from src.utils.errors import (
    BackendError,
    CssConstructionError,
    DimensionError,
    MembershipError,
    OracleDivergenceError,
)


@dataclass(frozen=True, eq=False)
class CssCode:
    """[[n, k1 − k2]] CSS code with radius t = min(t(C1), t(C2⊥))."""

    c1: LinearCode
    c2: LinearCode
    name: str = "css"

    @property
    def n(self) -> int:
        return self.c1.n

    @property
    def k(self) -> int:
        return self.c1.k - self.c2.k

    @cached_property
    def c2_dual(self) -> LinearCode:
        return dual(self.c2)

    @property
    def t(self) -> int:
        return min(self.c1.t, self.c2_dual.t)

    @property
    def num_cosets(self) -> int:
        return 1 << self.k

    def label(self, word: BitString) -> BitString:
        return coset_label(self.c1, self.c2, word)

    def representative(self, label: BitString) -> BitString:
        return coset_representative(self.c1, self.c2, label)

    def __repr__(self) -> str:
        return f"CssCode(name={self.name!r}, n={self.n}, k={self.k}, t={self.t})"


@dataclass(frozen=True)
class CssParameters:
    """Bit displacement x and phase displacement z."""

    x: BitString
    z: BitString

    def __post_init__(self) -> None:
        if self.x.length != self.z.length:
            raise DimensionError(f"x has length {self.x.length}, z has {self.z.length}")

    @classmethod
    def zero(cls, n: int) -> CssParameters:
        return cls(BitString.zeros(n), BitString.zeros(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> CssParameters:
        x = BitString.random(n, rng)
        return cls(x, BitString.random(n, rng))


def css_from_pair(c1: LinearCode, c2: LinearCode, name: Optional[str] = None) -> CssCode:
    """
    Build the CSS code of a strictly nested pair.

    Raises:
        CssConstructionError: If C2 ⊄ C1 or k1 − k2 ≤ 0
    """
    name = name or f"css({c1.name},{c2.name})"
    try:
        report = nesting_report(c1, c2)
    except DimensionError as e:
        raise CssConstructionError(f"Cannot pair '{c1.name}' and '{c2.name}': {e}") from e
    if not report.is_subset:
        raise CssConstructionError(f"'{c2.name}' is not contained in '{c1.name}'")
    if not report.is_strict:
        raise CssConstructionError(
            f"Pair '{name}' encodes no qubits (k1 − k2 = {c1.k - c2.k})"
        )
    code = CssCode(c1=c1, c2=c2, name=name)
    logging.debug(f"Built CSS code {code}")
    return code


# ----------------------------------------------------------------------
# Dense codeword states
# ----------------------------------------------------------------------
def _check_member(css: CssCode, word: BitString) -> None:
    if word.length != css.n:
        raise DimensionError(f"Word length {word.length} != n = {css.n}")
    if not contains(css.c1, word):
        raise MembershipError(f"{word} is not in '{css.c1.name}'")


def parameterized_codeword(css: CssCode, v: BitString, params: CssParameters) -> DenseState:
    """Dense Q_{x,z}(v)."""
    _check_member(css, v)
    if params.x.length != css.n:
        raise DimensionError(f"Parameters have length {params.x.length}, code has n = {css.n}")
    check_dense_limit(css.n)
    if css.c2.k > MAX_ENUMERATION_DIMENSION:
        raise BackendError(f"Cannot enumerate 2^{css.c2.k} elements of '{css.c2.name}'")

    elements = gf2.rows_to_ints(codewords(css.c2))
    signs = np.where(np.bitwise_count(elements & params.z.value) & 1, -1.0, 1.0)
    amplitudes = np.zeros(1 << css.n, dtype=np.complex128)
    amplitudes[elements ^ v.value ^ params.x.value] = signs / np.sqrt(elements.size)
    return DenseState(css.n, amplitudes)


def codeword_amplitudes(css: CssCode, d: BitString) -> DenseState:
    """|C2|^{-1/2} Σ_{c ∈ C2} |d ⊕ c⟩."""
    return parameterized_codeword(css, d, CssParameters.zero(css.n))


# ----------------------------------------------------------------------
# Stabilizers, syndromes and correction
# ----------------------------------------------------------------------
def stabilizer_generators(css: CssCode, params: CssParameters) -> list[PauliProduct]:
    """
    Z-type rows of H1 with signs (−1)^{row·x}, then X-type rows of G2 with
    signs (−1)^{row·z}.
    """
    generators = []
    for row in css.c1.parity_check:
        mask = BitString.from_array(row)
        generators.append(PauliProduct.z_type(mask, -1 if mask.dot(params.x) else 1))
    for row in css.c2.generator:
        mask = BitString.from_array(row)
        generators.append(PauliProduct.x_type(mask, -1 if mask.dot(params.z) else 1))
    return generators


def syndrome_from_outcomes(css: CssCode, outcomes: Sequence[int]) -> tuple[BitString, BitString]:
    """
    Split generator eigenvalues (in ``stabilizer_generators`` order) into
    the bit syndrome and the phase syndrome; eigenvalue −1 is a 1.
    """
    num_z = css.c1.n - css.c1.k
    if len(outcomes) != num_z + css.c2.k:
        raise DimensionError(f"Expected {num_z + css.c2.k} outcomes, got {len(outcomes)}")
    bits = [0 if outcome == 1 else 1 for outcome in outcomes]
    return BitString.from_bits(bits[:num_z]), BitString.from_bits(bits[num_z:])


def correct(css: CssCode, bit_syndrome: BitString, phase_syndrome: BitString) -> PauliProduct:
    """
    Minimal-weight correction: X mask from C1's table, Z mask from C2⊥'s.

    Raises:
        DecodeFailure: If either syndrome is outside its table
    """
    x_mask = css.c1.syndrome_table.lookup(bit_syndrome)
    z_mask = css.c2_dual.syndrome_table.lookup(phase_syndrome)
    return PauliProduct(x_mask, z_mask)


def bit_syndrome_of(css: CssCode, error: BitString) -> BitString:
    return syndrome(css.c1, error)


def phase_syndrome_of(css: CssCode, error: BitString) -> BitString:
    return syndrome(css.c2_dual, error)


def encode_circuit_state(css: CssCode, label: BitString, params: CssParameters,
                         state, qubits: Optional[Sequence[int]] = None):
    """
    Prepare Q_{x,z}(v) with v the coset representative of ``label``.

    The circuit puts H on the pivot columns of RREF(G2), fans each pivot out
    with CNOTs, applies Z^z and then X^{v+x}. Works on any backend state
    whose target qubits start in |0⟩.

    Args:
        qubits: Register positions holding code qubit 0..n−1 (default 0..n−1)

    Returns:
        The same state object, modified in place
    """
    targets = list(range(css.n)) if qubits is None else list(qubits)
    if len(targets) != css.n:
        raise DimensionError(f"Need {css.n} target qubits, got {len(targets)}")

    reduced, pivots = gf2.rref(css.c2.generator)
    for row, pivot in enumerate(pivots):
        state.apply_h(targets[pivot])
        for column in np.nonzero(reduced[row])[0]:
            if column != pivot:
                state.apply_cnot(targets[pivot], targets[int(column)])

    for position in params.z.support():
        state.apply_z(targets[position])
    displacement = css.representative(label) ^ params.x
    for position in displacement.support():
        state.apply_x(targets[position])
    return state


# ----------------------------------------------------------------------
# Dephasing oracle
# ----------------------------------------------------------------------
def phase_sum(x: BitString) -> int:
    """Σ_z (−1)^{x·z} over all z of the same length, by enumeration."""
    if x.length > MAX_ENUMERATION_DIMENSION:
        raise BackendError(f"Cannot enumerate 2^{x.length} phase strings")
    z_values = np.arange(1 << x.length, dtype=np.int64)
    return int(np.where(np.bitwise_count(z_values & x.value) & 1, -1, 1).sum())


@dataclass(frozen=True)
class DephasingReport:
    averaged: np.ndarray
    mixture: np.ndarray
    max_difference: float

    @property
    def passed(self) -> bool:
        return self.max_difference <= NUMERICAL_TOLERANCE


def codeword_mixture(css: CssCode, k_prime: BitString, x: BitString) -> np.ndarray:
    """(1/|C2|) Σ_{w ∈ C2} |k′+w+x⟩⟨k′+w+x| as a dense matrix."""
    elements = gf2.rows_to_ints(codewords(css.c2))
    diagonal = np.zeros(1 << css.n, dtype=np.complex128)
    np.add.at(diagonal, elements ^ k_prime.value ^ x.value, 1.0 / elements.size)
    return np.diag(diagonal)


def dephase_average(css: CssCode, k_prime: BitString, x: BitString,
                    tolerance: float = NUMERICAL_TOLERANCE) -> DephasingReport:
    """
    Average of |ψ_{x,z}⟩⟨ψ_{x,z}| over all 2^n phase strings z, computed
    literally and as the classical codeword mixture.

    Raises:
        BackendError: If n exceeds the density-operator limit
        OracleDivergenceError: If the two computations differ by more than
            ``tolerance`` in any entry
    """
    if css.n > DENSITY_QUBIT_LIMIT:
        raise BackendError(
            f"Density operators on {css.n} qubits exceed the limit of {DENSITY_QUBIT_LIMIT}"
        )
    _check_member(css, k_prime)

    dimension = 1 << css.n
    averaged = np.zeros((dimension, dimension), dtype=np.complex128)
    for z_value in range(dimension):
        state = parameterized_codeword(css, k_prime, CssParameters(x, BitString(z_value, css.n)))
        averaged += np.outer(state.amplitudes, state.amplitudes.conj())
    averaged /= dimension

    mixture = codeword_mixture(css, k_prime, x)
    difference = float(np.max(np.abs(averaged - mixture)))
    report = DephasingReport(averaged=averaged, mixture=mixture, max_difference=difference)
    if difference > tolerance:
        logging.error(f"Dephasing paths differ by {difference:.3e} for k'={k_prime}, x={x}")
        raise OracleDivergenceError(
            f"Averaged and mixture density operators differ by {difference:.3e}"
        )
    return report
