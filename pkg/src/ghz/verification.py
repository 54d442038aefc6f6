"""
Random-parity verification game on BDSW strings.

The verifier asks m random parity questions s about the label r of the
shared blocks; the prover's answers are s·r. The game accepts iff every
answer equals the parity of the ideal all-ones label, s·1 = wt(s) mod 2.
Quantum provers are reduced to classical ones by measuring the GHZ basis
first, since the parity and projector observables are diagonal in it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Optional

import numpy as np

from src.codes.bitstring import BitString
from src.ghz.bdsw import block_generators, ghz_basis_distribution, measure_R, perfect_label
from src.quantum.dense import DenseState
from src.quantum.pauli import PauliProduct, product_of
from src.utils import logging
from src.utils.config import MAX_ENUMERATION_DIMENSION
from src.utils.errors import DimensionError, DomainError


class StrategyKind(StrEnum):
    HONEST = "honest"
    FIXED_STRING = "fixed_string"
    CLASSICAL_MIXTURE = "classical_mixture"
    GENERAL_STATE = "general_state"


@dataclass
class AdversaryStrategy:
    """
    What the prover actually holds.

    ``hidden`` is used by fixed_string, ``mixture`` (weight, label) pairs by
    classical_mixture and ``state`` by general_state; a general state may
    carry ancilla qubits after the N·blocks system qubits.
    """

    kind: StrategyKind
    num_parties: int
    num_blocks: int
    hidden: Optional[BitString] = None
    mixture: list[tuple[float, BitString]] = field(default_factory=list)
    state: Optional[DenseState] = None

    def __post_init__(self) -> None:
        length = self.num_parties * self.num_blocks
        if self.kind == StrategyKind.FIXED_STRING:
            if self.hidden is None or self.hidden.length != length:
                raise DomainError(f"fixed_string needs a hidden label of length {length}")
        elif self.kind == StrategyKind.CLASSICAL_MIXTURE:
            weights = [w for w, _ in self.mixture]
            if not self.mixture or min(weights) < 0 or not np.isclose(sum(weights), 1.0):
                raise DomainError("classical_mixture weights must be non-negative and sum to 1")
            if any(label.length != length for _, label in self.mixture):
                raise DomainError(f"Mixture labels must have length {length}")
        elif self.kind == StrategyKind.GENERAL_STATE:
            if self.state is None or self.state.num_qubits < length:
                raise DomainError(f"general_state needs a dense state on at least {length} qubits")
            if not self.state.is_normalized():
                raise DomainError("general_state must be normalized")

    @property
    def label_length(self) -> int:
        return self.num_parties * self.num_blocks

    @classmethod
    def honest(cls, num_parties: int, num_blocks: int) -> AdversaryStrategy:
        return cls(StrategyKind.HONEST, num_parties, num_blocks)

    @classmethod
    def fixed(cls, hidden: BitString, num_parties: int) -> AdversaryStrategy:
        return cls(StrategyKind.FIXED_STRING, num_parties, hidden.length // num_parties, hidden=hidden)

    def collapsed(self) -> AdversaryStrategy:
        """Classical mixture equivalent to a general_state strategy."""
        if self.kind != StrategyKind.GENERAL_STATE:
            return self
        distribution = ghz_basis_distribution(self.state, self.num_parties, self.num_blocks)
        total = sum(distribution.values())
        mixture = [(p / total, label) for label, p in sorted(distribution.items(), key=lambda i: i[0].value)]
        return AdversaryStrategy(StrategyKind.CLASSICAL_MIXTURE, self.num_parties, self.num_blocks,
                                 mixture=mixture)


@dataclass(frozen=True)
class GameOutcome:
    accepted: bool
    cheated: bool
    label: BitString
    questions: tuple[BitString, ...]


def parity_answer(r: BitString, s: BitString) -> int:
    """s·r mod 2."""
    if r.length != s.length:
        raise DimensionError(f"Label length {r.length} != question length {s.length}")
    return r.dot(s)


def draw_question(length: int, rng: np.random.Generator, include_zero: bool = False) -> BitString:
    """Uniform index string; the zero string is redrawn unless allowed."""
    while True:
        question = BitString.random(length, rng)
        if include_zero or not question.is_zero():
            return question


def _hidden_label(strategy: AdversaryStrategy, rng: np.random.Generator) -> BitString:
    if strategy.kind == StrategyKind.HONEST:
        return perfect_label(strategy.num_parties, strategy.num_blocks)
    if strategy.kind == StrategyKind.FIXED_STRING:
        return strategy.hidden
    if strategy.kind == StrategyKind.CLASSICAL_MIXTURE:
        weights = np.array([w for w, _ in strategy.mixture], dtype=float)
        choice = int(rng.choice(len(strategy.mixture), p=weights / weights.sum()))
        return strategy.mixture[choice][1]
    state = strategy.state.copy()
    return measure_R(state, strategy.num_parties, strategy.num_blocks, rng)


def run_verification_game(strategy: AdversaryStrategy, m: int, rng: np.random.Generator,
                          include_zero: bool = False) -> GameOutcome:
    """
    Play one round of m parity questions.

    cheated = accepted while the prover's label is not the ideal one.
    """
    if m < 1:
        raise DomainError(f"Need at least one question, got {m}")
    label = _hidden_label(strategy, rng)
    reference = perfect_label(strategy.num_parties, strategy.num_blocks)
    questions = tuple(draw_question(label.length, rng, include_zero) for _ in range(m))
    accepted = all(parity_answer(label, s) == parity_answer(reference, s) for s in questions)
    return GameOutcome(
        accepted=accepted,
        cheated=accepted and label != reference,
        label=label,
        questions=questions,
    )


def survival_probability(r: BitString, m: int, include_zero: bool = False) -> Fraction:
    """
    Exact probability that label r passes m independent questions.

    Enumerates every question; with the zero string allowed a wrong label
    survives each question with probability exactly 1/2.
    """
    length = r.length
    if length > MAX_ENUMERATION_DIMENSION:
        raise DomainError(f"Cannot enumerate 2^{length} questions")
    deviation = (r ^ BitString.ones(length)).value
    questions = np.arange(0 if include_zero else 1, 1 << length, dtype=np.int64)
    passing = int(np.count_nonzero((np.bitwise_count(questions & deviation) & 1) == 0))
    return Fraction(passing, questions.size) ** m


def nonzero_survival_bound(length: int, m: int) -> Fraction:
    """((2^{L−1} − 1) / (2^L − 1))^m for any wrong label under non-zero questions."""
    return Fraction((1 << (length - 1)) - 1, (1 << length) - 1) ** m


def monte_carlo_rates(strategy: AdversaryStrategy, m: int, trials: int,
                      rng: np.random.Generator, include_zero: bool = False) -> tuple[float, float]:
    """Empirical (acceptance rate, cheat rate) over independent games."""
    accepted = cheated = 0
    for _ in range(trials):
        outcome = run_verification_game(strategy, m, rng, include_zero)
        accepted += outcome.accepted
        cheated += outcome.cheated
    logging.debug(f"{strategy.kind} game: {accepted}/{trials} accepted, {cheated} cheated")
    return accepted / trials, cheated / trials


# ----------------------------------------------------------------------
# Observables in the GHZ basis
# ----------------------------------------------------------------------
def _signed_generators(num_parties: int, num_blocks: int, num_qubits: int) -> list[PauliProduct]:
    generators = []
    for block in range(num_blocks):
        generators.extend(block_generators(num_parties, num_blocks, block, num_qubits))
    return generators


def parity_expectation(state: DenseState, s: BitString, num_parties: int, num_blocks: int) -> float:
    """
    ⟨ψ| Σ_r (s·r)|r⟩⟨r| |ψ⟩ evaluated directly.

    (−1)^{r_i} is the eigenvalue of −G_i, so the operator equals
    (I − Π_{i∈s}(−G_i)) / 2.
    """
    generators = _signed_generators(num_parties, num_blocks, state.num_qubits)
    if s.length != len(generators):
        raise DimensionError(f"Question length {s.length} != {len(generators)} label bits")
    observable = product_of((-generators[i] for i in s.support()), state.num_qubits)
    return (1.0 - state.expectation(observable)) / 2


def projector_expectation(state: DenseState, num_parties: int, num_blocks: int) -> float:
    """⟨ψ|P|ψ⟩ for the projector onto the ideal GHZ product, Π_i (I + G_i)/2."""
    generators = _signed_generators(num_parties, num_blocks, state.num_qubits)
    if len(generators) > MAX_ENUMERATION_DIMENSION:
        raise DomainError(f"Cannot expand a projector over {len(generators)} generators")
    total = 0.0
    for size in range(len(generators) + 1):
        for subset in itertools.combinations(generators, size):
            total += state.expectation(product_of(subset, state.num_qubits))
    return total / (1 << len(generators))


def ghz_overlap(state: DenseState, num_parties: int, num_blocks: int) -> float:
    """Probability that the shared blocks are all ideal GHZ states."""
    distribution = ghz_basis_distribution(state, num_parties, num_blocks)
    return distribution.get(perfect_label(num_parties, num_blocks), 0.0)


def collapsed_parity_expectation(distribution: dict[BitString, float], s: BitString) -> float:
    """Parity expectation after a GHZ-basis measurement, from its distribution."""
    return sum(p * parity_answer(label, s) for label, p in distribution.items())
