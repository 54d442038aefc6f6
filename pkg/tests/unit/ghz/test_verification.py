"""
Unit tests for the random-parity verification game.
"""

from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binomtest

from src.codes.bitstring import BitString
from src.ghz.bdsw import bdsw_product_state, ghz_basis_distribution, ghz_basis_state, perfect_label
from src.ghz.verification import (
    AdversaryStrategy,
    StrategyKind,
    collapsed_parity_expectation,
    draw_question,
    ghz_overlap,
    monte_carlo_rates,
    nonzero_survival_bound,
    parity_answer,
    parity_expectation,
    projector_expectation,
    run_verification_game,
    survival_probability,
)
from src.quantum.backend import prepare_ghz_blocks
from src.quantum.dense import DenseState
from src.utils.errors import DimensionError, DomainError


@pytest.fixture
def wrong_label():
    """A three-party label with one flipped sign."""
    return BitString.from_str("110")


@pytest.fixture
def rng():
    """Seeded generator for the verifier and prover."""
    return np.random.default_rng(77)


class TestStrategies:
    """Tests for AdversaryStrategy validation."""

    def test_fixed_string_length(self):
        """Test that the hidden label must cover every block."""
        with pytest.raises(DomainError):
            AdversaryStrategy(StrategyKind.FIXED_STRING, 3, 2, hidden=BitString.from_str("110"))

    def test_mixture_weights(self, wrong_label):
        """Test that mixture weights must sum to one."""
        with pytest.raises(DomainError):
            AdversaryStrategy(StrategyKind.CLASSICAL_MIXTURE, 3, 1, mixture=[(0.7, wrong_label)])

    def test_general_state_normalized(self):
        """Test that a general state must be normalized."""
        state = DenseState(3, np.full(8, 1.0))

        with pytest.raises(DomainError):
            AdversaryStrategy(StrategyKind.GENERAL_STATE, 3, 1, state=state)

    def test_collapse_of_basis_state(self, wrong_label):
        """Test that a GHZ-basis state collapses to a one-label mixture."""
        strategy = AdversaryStrategy(StrategyKind.GENERAL_STATE, 3, 1,
                                     state=bdsw_product_state(wrong_label, 3))
        collapsed = strategy.collapsed()

        assert collapsed.kind == StrategyKind.CLASSICAL_MIXTURE
        assert len(collapsed.mixture) == 1
        assert collapsed.mixture[0][1] == wrong_label
        assert collapsed.mixture[0][0] == pytest.approx(1.0)


class TestGame:
    """Tests for playing the game."""

    def test_parity_answer(self):
        """Test s·r mod 2."""
        assert parity_answer(BitString.from_str("111"), BitString.from_str("011")) == 0
        assert parity_answer(BitString.from_str("110"), BitString.from_str("011")) == 1

    def test_parity_length_checked(self):
        """Test that label and question lengths must match."""
        with pytest.raises(DimensionError):
            parity_answer(BitString.from_str("11"), BitString.from_str("011"))

    def test_questions_exclude_zero(self, rng):
        """Test that the zero question is redrawn by default."""
        assert all(not draw_question(2, rng).is_zero() for _ in range(200))

    def test_honest_prover_always_accepted(self, rng):
        """Test completeness."""
        strategy = AdversaryStrategy.honest(3, 2)

        for _ in range(50):
            outcome = run_verification_game(strategy, 10, rng)
            assert outcome.accepted
            assert not outcome.cheated

    def test_general_state_honest(self, rng):
        """Test that a prover holding real GHZ blocks passes."""
        strategy = AdversaryStrategy(StrategyKind.GENERAL_STATE, 3, 2,
                                     state=prepare_ghz_blocks(3, 2, "dense"))

        assert run_verification_game(strategy, 5, rng).accepted

    def test_needs_a_question(self, rng):
        """Test that m must be positive."""
        with pytest.raises(DomainError):
            run_verification_game(AdversaryStrategy.honest(3, 1), 0, rng)

    def test_fixed_wrong_label_acceptance_rate(self, wrong_label, rng):
        """Test that a wrong label survives one question with probability 1/2."""
        strategy = AdversaryStrategy.fixed(wrong_label, 3)
        accepted, cheated = monte_carlo_rates(strategy, 1, 2000, rng, include_zero=True)

        assert binomtest(round(accepted * 2000), 2000, 0.5).pvalue > 0.001
        assert cheated == accepted

    def test_general_state_matches_label_mixture(self, rng):
        """Test that a superposed prover is accepted as often as its collapsed label mixture."""
        amplitudes = (np.sqrt(0.3) * ghz_basis_state((1, 1, 1)).amplitudes
                      + np.sqrt(0.7) * ghz_basis_state((1, -1, 1)).amplitudes)
        strategy = AdversaryStrategy(StrategyKind.GENERAL_STATE, 3, 1, state=DenseState(3, amplitudes))
        expected = sum(weight * float(survival_probability(label, 2))
                       for weight, label in strategy.collapsed().mixture)
        trials = 3000

        quantum_rate, _ = monte_carlo_rates(strategy, 2, trials, rng)
        mixture_rate, _ = monte_carlo_rates(strategy.collapsed(), 2, trials, np.random.default_rng(78))

        assert expected == pytest.approx(0.3 + 0.7 * (3 / 7) ** 2)
        assert binomtest(round(quantum_rate * trials), trials, expected).pvalue > 0.001
        assert binomtest(round(mixture_rate * trials), trials, expected).pvalue > 0.001


class TestSurvival:
    """Tests for the exact survival probabilities."""

    def test_perfect_label_always_survives(self):
        """Test that the ideal label passes every question."""
        assert survival_probability(perfect_label(3, 2), 7) == 1

    def test_wrong_label_with_zero_question(self, wrong_label):
        """Test survival 2^{-m} when the zero question is allowed."""
        assert survival_probability(wrong_label, 4, include_zero=True) == Fraction(1, 16)

    def test_wrong_label_meets_bound(self, wrong_label):
        """Test that every wrong label attains the non-zero bound."""
        for value in range(7):
            label = BitString(value, 3)
            assert survival_probability(label, 3) == nonzero_survival_bound(3, 3)
        assert nonzero_survival_bound(3, 3) == Fraction(27, 343)

    def test_bound_below_uniform(self):
        """Test that non-zero questions do at least as well as uniform ones."""
        for length in range(2, 8):
            assert nonzero_survival_bound(length, 5) <= Fraction(1, 2) ** 5


class TestObservables:
    """Tests for parity and projector observables."""

    @pytest.mark.parametrize("label", ["111", "101", "000", "110"])
    def test_parity_expectation_matches_label(self, label):
        """Test ⟨Σ_r (s·r)|r⟩⟨r|⟩ on GHZ-basis states."""
        r = BitString.from_str(label)
        state = bdsw_product_state(r, 3)

        for value in range(1, 8):
            s = BitString(value, 3)
            assert parity_expectation(state, s, 3, 1) == pytest.approx(parity_answer(r, s))

    def test_projector_on_ideal_state(self):
        """Test ⟨P⟩ = 1 on ideal GHZ blocks and 0 on a wrong label."""
        assert projector_expectation(prepare_ghz_blocks(3, 2, "dense"), 3, 2) == pytest.approx(1.0)
        assert projector_expectation(bdsw_product_state(BitString.from_str("111011"), 3), 3, 2) == \
            pytest.approx(0.0, abs=1e-12)

    def test_overlap_of_rotated_state(self):
        """Test the GHZ overlap of the θ family, cos θ + sin θ squared over two."""
        theta = 0.3
        state = ghz_basis_state((1, 1, 1), theta=theta)

        assert ghz_overlap(state, 3, 1) == pytest.approx((np.cos(theta) + np.sin(theta)) ** 2 / 2)
        assert projector_expectation(state, 3, 1) == pytest.approx(ghz_overlap(state, 3, 1))

    def test_measurement_preserves_parity_statistics(self):
        """Test that measuring in the GHZ basis first leaves parities unchanged."""
        state = ghz_basis_state((1, 1, 1), theta=0.3)
        distribution = ghz_basis_distribution(state, 3, 1)

        for value in range(1, 8):
            s = BitString(value, 3)
            assert collapsed_parity_expectation(distribution, s) == \
                pytest.approx(parity_expectation(state, s, 3, 1))
