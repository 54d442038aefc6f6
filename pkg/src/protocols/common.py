"""
Steps shared by the entangled, CSS and prepare-and-measure protocols:
sifting, error estimation, thresholding, code choice, channel and
adversary injection, and the final key audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from src.codes.bitstring import BitString
from src.codes.css_codes import CssCode
from src.protocols.schemas import AbortReason, AdversaryKind, InjectedError, ProtocolConfig
from src.protocols.session import SessionRandomness
from src.quantum.backend import QuantumState, apply_pauli_channel, apply_single_pauli
from src.quantum.dense import DenseState
from src.quantum.pauli import PauliProduct
from src.utils import logging
from src.utils.errors import DimensionError, DomainError

BASIS_NAMES = ("Z", "X")


class ThresholdVariant(StrEnum):
    ENTANGLED = "entangled"
    PM = "pm"


@dataclass
class GroundTruth:
    """
    What actually happened on the wire. None of this is visible to the
    parties; it is kept for soundness checks and attack accounting.
    """

    channel_errors: list[tuple[int, int, str]] = field(default_factory=list)
    adversary_events: list[tuple[int, int, str]] = field(default_factory=list)
    injected: list[tuple[int, int, str]] = field(default_factory=list)
    eve_bits: dict[int, str] = field(default_factory=dict)

    def record_channel(self, link: int, position: int, label: str) -> None:
        if label != "I":
            self.channel_errors.append((link, position, label))

    def as_dict(self) -> dict:
        return {
            "channel_errors": [list(e) for e in self.channel_errors],
            "adversary_events": [list(e) for e in self.adversary_events],
            "injected": [list(e) for e in self.injected],
            "eve_bits": dict(self.eve_bits),
        }


# ----------------------------------------------------------------------
# Sifting, error estimation and code choice
# ----------------------------------------------------------------------
def sift(b_alice: BitString, b_parties: Sequence[BitString]) -> list[int]:
    """
    Positions where every party chose the same basis as Alice.

    Raises:
        DimensionError: If the basis strings differ in length
    """
    for b in b_parties:
        if b.length != b_alice.length:
            raise DimensionError(f"Basis string length {b.length} != {b_alice.length}")
    disagreement = reduce(lambda acc, b: acc | (b_alice ^ b), b_parties,
                          BitString.zeros(b_alice.length))
    return (~disagreement).support()


@dataclass(frozen=True)
class ErrorEstimate:
    """Aggregated check-bit comparison."""

    w: BitString
    t: int
    per_party: tuple[int, ...]

    @property
    def wt_w(self) -> int:
        return self.w.weight

    @property
    def qber(self) -> float:
        checked = self.w.length * len(self.per_party)
        return sum(self.per_party) / checked if checked else 0.0


def threshold(wt_w: int, c: float, n: int, variant: ThresholdVariant | str) -> int:
    """
    t = wt(w) + ⌈cn⌉ − 1 for the entangled and CSS protocols and
    t = 2·wt(w) + ⌈cn⌉ − 1 for prepare-and-measure, floored at 0.
    """
    if c < 0:
        raise DomainError(f"Confidence factor must be non-negative, got {c}")
    factor = 2 if ThresholdVariant(variant) == ThresholdVariant.PM else 1
    # rounding keeps c·n = 1.0000000000000002 from becoming 2
    slack = math.ceil(round(c * n, 9))
    return max(0, factor * wt_w + slack - 1)


def error_estimate(check_alice: BitString, check_parties: Sequence[BitString], c: float,
                   n: int, variant: ThresholdVariant | str) -> ErrorEstimate:
    for check in check_parties:
        if check.length != check_alice.length:
            raise DimensionError(f"Check string length {check.length} != {check_alice.length}")
    differences = [check_alice ^ check for check in check_parties]
    w = reduce(lambda acc, d: acc | d, differences, BitString.zeros(check_alice.length))
    return ErrorEstimate(
        w=w,
        t=threshold(w.weight, c, n, variant),
        per_party=tuple(d.weight for d in differences),
    )


def estimate_error(check_alice: BitString, check_parties: Sequence[BitString], c: float,
                   n: int, variant: ThresholdVariant | str) -> tuple[BitString, int]:
    """
    Returns:
        Tuple (w, t) where w_j = 1 iff some party disagrees with Alice at
        check position j
    """
    estimate = error_estimate(check_alice, check_parties, c, n, variant)
    return estimate.w, estimate.t


def choose_code(t: int, catalog: Sequence[CssCode],
                max_length: Optional[int] = None) -> Optional[CssCode]:
    """Smallest-length catalog code with radius ≥ t, or None."""
    candidates = [
        code for code in catalog
        if code.t >= t and (max_length is None or code.n <= max_length)
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda code: (code.n, code.name))


def select_session_code(t: int, catalog: Sequence[CssCode],
                        block_length: int) -> tuple[Optional[CssCode], Optional[AbortReason]]:
    """
    Code for a key block of ``block_length`` positions.

    Returns:
        Tuple (code, None), or (None, no_code) when nothing fits the block,
        or (None, threshold) when nothing that fits corrects t errors
    """
    fitting = [code for code in catalog if code.n <= block_length]
    if not fitting:
        return None, AbortReason.NO_CODE
    code = choose_code(t, fitting)
    if code is None:
        return None, AbortReason.THRESHOLD
    return code, None


def draw_permutation(size: int, rng: np.random.Generator, extra: bool = False) -> np.ndarray:
    """Uniform permutation; ``extra`` composes a second independent one."""
    permutation = rng.permutation(size)
    if extra:
        permutation = permutation[rng.permutation(size)]
    return permutation


def draw_key_label(k: int, rng: np.random.Generator, fixed_key: Optional[str] = None) -> BitString:
    """
    Uniform k-bit key label, or the configured one.

    The generator is consumed either way so that the rest of the key
    stream does not depend on the override.
    """
    label = BitString.random(k, rng)
    if fixed_key is None:
        return label
    if len(fixed_key) != k:
        raise DomainError(f"Fixed key '{fixed_key}' has {len(fixed_key)} bits, code encodes {k}")
    return BitString.from_str(fixed_key)


def keys_agree(keys: Sequence[BitString]) -> bool:
    return len(set(keys)) == 1


# ----------------------------------------------------------------------
# Quantum transit
# ----------------------------------------------------------------------
def attack_intercept_resend(state: QuantumState, qubit: int,
                            rng: np.random.Generator) -> tuple[int, int]:
    """
    Measure a transit qubit in a random basis and resend the collapsed state.

    Returns:
        Tuple (basis, bit) with basis 0 = computational, 1 = Hadamard
    """
    basis = int(rng.integers(2))
    if basis:
        state.apply_h(qubit)
    bit = state.measure_qubit(qubit, rng)
    if basis:
        state.apply_h(qubit)
    return basis, bit


def transmit_qubits(state: QuantumState, link_qubits: dict[int, Sequence[int]],
                    config: ProtocolConfig, streams: SessionRandomness,
                    truth: GroundTruth) -> None:
    """
    Send qubits over their receiver links: the adversary acts first, then
    the link's Pauli channel.
    """
    adversary = config.adversary
    for link in sorted(link_qubits):
        channel = config.channel_for(link)
        attacked = adversary.attacks(link)
        eve_bits = []
        for qubit in link_qubits[link]:
            if attacked and streams.adversary.random() < adversary.rate:
                if adversary.kind == AdversaryKind.INTERCEPT_RESEND:
                    basis, bit = attack_intercept_resend(state, qubit, streams.adversary)
                    truth.adversary_events.append((link, qubit, BASIS_NAMES[basis]))
                    eve_bits.append(str(bit))
                else:
                    apply_single_pauli(state, qubit, adversary.pauli)
                    truth.adversary_events.append((link, qubit, adversary.pauli))
            if not channel.is_noiseless:
                _, label = apply_pauli_channel(state, qubit, channel.px, channel.py, channel.pz,
                                               streams.channel)
                truth.record_channel(link, qubit, label)
        if eve_bits:
            truth.eve_bits[link] = "".join(eve_bits)
    if truth.channel_errors or truth.adversary_events:
        logging.debug(
            f"Transit: {len(truth.channel_errors)} channel errors, "
            f"{len(truth.adversary_events)} adversary events"
        )


def apply_injected_errors(state: QuantumState, errors: Sequence[InjectedError],
                          locate: Callable[[int, int], int], truth: GroundTruth) -> None:
    """
    Apply configured key-block errors; ``locate(receiver, position)`` maps
    an error to its register qubit and raises DomainError when out of range.
    """
    for error in errors:
        qubit = locate(error.receiver, error.position)
        apply_single_pauli(state, qubit, error.pauli)
        truth.injected.append((error.receiver, error.position, error.pauli))


# ----------------------------------------------------------------------
# Classical transit of single-qubit eigenstates
# ----------------------------------------------------------------------
def measure_eigenstates(bases: np.ndarray, bits: np.ndarray, measure_bases: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """
    Measure basis eigenstates (basis, bit) in ``measure_bases``: matched
    bases reproduce the bit, mismatched ones give a uniform bit.
    """
    random_bits = rng.integers(0, 2, size=bits.size, dtype=np.uint8)
    return np.where(bases == measure_bases, bits, random_bits).astype(np.uint8)


def pauli_flips(labels: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """
    Whether each Pauli flips the eigenstate it hits: X flips Z-basis
    states, Z flips X-basis states and Y flips both.
    """
    flips_z = (labels == "X") | (labels == "Y")
    flips_x = (labels == "Z") | (labels == "Y")
    return np.where(bases == 0, flips_z, flips_x)


def sample_pauli_labels(size: int, px: float, py: float, pz: float,
                        rng: np.random.Generator) -> np.ndarray:
    u = rng.random(size)
    return np.select([u < px, u < px + py, u < px + py + pz], ["X", "Y", "Z"], default="I")


def transmit_eigenstates(bases: np.ndarray, bits: np.ndarray, link: int,
                         config: ProtocolConfig, streams: SessionRandomness,
                         truth: GroundTruth) -> tuple[np.ndarray, np.ndarray]:
    """
    Vectorized transit of a link's eigenstates.

    Returns:
        Tuple (bases, bits) describing the states that reach the receiver
    """
    bases = bases.copy()
    bits = bits.copy()
    adversary = config.adversary
    if adversary.attacks(link):
        hit = streams.adversary.random(bits.size) < adversary.rate
        if adversary.kind == AdversaryKind.INTERCEPT_RESEND:
            eve_bases = streams.adversary.integers(0, 2, size=bits.size, dtype=np.uint8)
            eve_bits = measure_eigenstates(bases, bits, eve_bases, streams.adversary)
            bases = np.where(hit, eve_bases, bases).astype(np.uint8)
            bits = np.where(hit, eve_bits, bits).astype(np.uint8)
            truth.eve_bits[link] = "".join(str(b) for b in eve_bits[hit])
            label = "intercept"
        else:
            flips = pauli_flips(np.full(bits.size, adversary.pauli), bases) & hit
            bits = bits ^ flips.astype(np.uint8)
            label = adversary.pauli
        truth.adversary_events.extend((link, int(p), label) for p in np.nonzero(hit)[0])

    channel = config.channel_for(link)
    if not channel.is_noiseless:
        labels = sample_pauli_labels(bits.size, channel.px, channel.py, channel.pz, streams.channel)
        bits = bits ^ pauli_flips(labels, bases).astype(np.uint8)
        for position in np.nonzero(labels != "I")[0]:
            truth.record_channel(link, int(position), str(labels[position]))
    return bases, bits


def intercept_resend_error_table() -> pd.DataFrame:
    """
    Exact error table of the intercept-resend attack on a basis-matched
    position, by Born-rule evaluation of all four (preparation basis,
    adversary basis) cases.

    The ``contribution`` column sums to 1/4.
    """
    rows = []
    for prep_basis in (0, 1):
        for eve_basis in (0, 1):
            prepared = DenseState.zeros(1)
            if prep_basis:
                prepared.apply_h(0)
            observed = prepared.copy()
            if eve_basis:
                observed.apply_h(0)
            eve_probabilities = observed.probabilities()

            error = 0.0
            for eve_bit in (0, 1):
                resent = DenseState.basis(BitString(eve_bit, 1))
                if eve_basis:
                    resent.apply_h(0)
                if prep_basis:
                    resent.apply_h(0)
                # prepared bit is 0, so outcome 1 is an error
                error += float(eve_probabilities[eve_bit]) * float(resent.probabilities()[1])

            rows.append({
                "prep_basis": BASIS_NAMES[prep_basis],
                "eve_basis": BASIS_NAMES[eve_basis],
                "probability": 0.25,
                "error_probability": round(error, 12),
            })
    table = pd.DataFrame(rows)
    table["contribution"] = table["probability"] * table["error_probability"]
    return table


def _measure_rows(state: QuantumState, rows: np.ndarray, qubits: Sequence[int],
                  rng: np.random.Generator,
                  factory: Callable[[BitString], PauliProduct]) -> BitString:
    outcomes = []
    for row in rows:
        operator = factory(BitString.from_array(row)).embed(state.num_qubits, qubits)
        outcomes.append(state.measure_pauli(operator, rng).bit)
    return BitString.from_bits(outcomes)


def measure_z_syndrome(state: QuantumState, parity_check: np.ndarray, qubits: Sequence[int],
                       rng: np.random.Generator) -> BitString:
    """Measure Z^h on ``qubits`` for every parity-check row h; eigenvalue −1 is a 1."""
    return _measure_rows(state, parity_check, qubits, rng, PauliProduct.z_type)


def measure_x_syndrome(state: QuantumState, generator: np.ndarray, qubits: Sequence[int],
                       rng: np.random.Generator) -> BitString:
    """Measure X^g on ``qubits`` for every generator row g; eigenvalue −1 is a 1."""
    return _measure_rows(state, generator, qubits, rng, PauliProduct.x_type)
