"""
Unit tests for steps shared by the key distribution protocols.

This test suite covers:
- Sifting, error estimation and thresholds
- Code selection and key-label draws
- Adversary and channel injection on quantum and classical transit
- Per-session random streams
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.codes.bitstring import BitString
from src.codes.catalog import default_catalog
from src.protocols.common import (
    GroundTruth,
    ThresholdVariant,
    attack_intercept_resend,
    choose_code,
    draw_key_label,
    draw_permutation,
    error_estimate,
    estimate_error,
    intercept_resend_error_table,
    measure_eigenstates,
    pauli_flips,
    select_session_code,
    sift,
    threshold,
    transmit_eigenstates,
    transmit_qubits,
)
from src.protocols.schemas import AbortReason, AdversaryConfig, ChannelConfig, ProtocolConfig
from src.protocols.session import STREAMS, SessionRandomness, spawn_session_seeds
from src.quantum.backend import create_state
from src.quantum.pauli import PauliProduct
from src.utils.errors import DimensionError, DomainError


@pytest.fixture
def catalog():
    """Built-in CSS catalog, smallest first."""
    return default_catalog()


@pytest.fixture
def sample_eigenstates():
    """Sixteen basis eigenstates, half in each basis."""
    bases = np.array([0, 1] * 8, dtype=np.uint8)
    bits = np.array([0, 0, 1, 1] * 4, dtype=np.uint8)
    return bases, bits


class TestSifting:
    """Tests for sift."""

    def test_keeps_positions_where_all_bases_agree(self):
        """Test the sifted positions for two receivers."""
        alice = BitString.from_str("0101")
        kept = sift(alice, [BitString.from_str("0111"), BitString.from_str("0001")])

        assert kept == [0, 3]

    def test_length_mismatch(self):
        """Test that basis strings must have equal length."""
        with pytest.raises(DimensionError):
            sift(BitString.from_str("01"), [BitString.from_str("011")])


class TestErrorEstimation:
    """Tests for threshold and error_estimate."""

    @pytest.mark.parametrize("wt_w,c,n,variant,expected", [
        (0, 0.01, 4, ThresholdVariant.ENTANGLED, 0),
        (2, 0.01, 4, ThresholdVariant.ENTANGLED, 2),
        (2, 0.5, 4, ThresholdVariant.PM, 5),
        (0, 0.0, 4, ThresholdVariant.ENTANGLED, 0),
        (1, 0.25, 4, "entangled", 1),
        (3, 0.1, 10, "pm", 6),
    ])
    def test_threshold(self, wt_w, c, n, variant, expected):
        """Test t for both variants, floored at zero."""
        assert threshold(wt_w, c, n, variant) == expected

    @given(
        wt_w=st.integers(0, 64),
        extra_weight=st.integers(0, 16),
        c=st.floats(0, 1, allow_nan=False),
        extra_c=st.floats(0, 1, allow_nan=False),
        n=st.integers(1, 64),
        variant=st.sampled_from(list(ThresholdVariant)),
    )
    def test_threshold_is_monotone(self, wt_w, extra_weight, c, extra_c, n, variant):
        """Test that t never decreases as wt(w) or c grows, for both variants."""
        base = threshold(wt_w, c, n, variant)

        assert threshold(wt_w + extra_weight, c, n, variant) >= base
        assert threshold(wt_w, c + extra_c, n, variant) >= base

    def test_negative_confidence(self):
        """Test that c < 0 raises."""
        with pytest.raises(DomainError):
            threshold(0, -0.1, 4, ThresholdVariant.ENTANGLED)

    def test_aggregate_is_or_of_disagreements(self):
        """Test w, its weight and the per-party QBER."""
        estimate = error_estimate(
            BitString.from_str("0000"),
            [BitString.from_str("0100"), BitString.from_str("0101")],
            0.01, 4, ThresholdVariant.ENTANGLED,
        )

        assert estimate.w == BitString.from_str("0101")
        assert estimate.wt_w == 2
        assert estimate.t == 2
        assert estimate.per_party == (1, 2)
        assert estimate.qber == pytest.approx(3 / 8)

    def test_estimate_error_tuple(self):
        """Test the (w, t) form."""
        w, t = estimate_error(BitString.from_str("11"), [BitString.from_str("11")], 0.01, 2, "pm")

        assert w.is_zero()
        assert t == 0


class TestCodeSelection:
    """Tests for choose_code and select_session_code."""

    def test_smallest_code_meeting_radius(self, catalog):
        """Test that the smallest adequate code is chosen."""
        assert choose_code(0, catalog).name == "trivial"
        assert choose_code(1, catalog).name == "steane"
        assert choose_code(3, catalog).name == "golay"
        assert choose_code(4, catalog) is None

    def test_length_cap(self, catalog):
        """Test that codes longer than the cap are skipped."""
        assert choose_code(1, catalog, max_length=5) is None

    def test_session_code_threshold(self, catalog):
        """Test the abort reason when fitting codes are too weak."""
        assert select_session_code(1, catalog, 4) == (None, AbortReason.THRESHOLD)

    def test_session_code_no_fit(self, catalog):
        """Test the abort reason when no code fits the block."""
        steane_only = [code for code in catalog if code.name == "steane"]

        assert select_session_code(0, steane_only, 4) == (None, AbortReason.NO_CODE)

    def test_session_code_found(self, catalog):
        """Test a successful selection."""
        code, reason = select_session_code(1, catalog, 8)

        assert code.name == "steane"
        assert reason is None


class TestDraws:
    """Tests for permutations and key labels."""

    def test_permutation(self):
        """Test that a permutation of the right size is drawn."""
        permutation = draw_permutation(10, np.random.default_rng(0), extra=True)

        assert sorted(permutation.tolist()) == list(range(10))

    def test_fixed_key_consumes_stream(self):
        """Test that an override leaves later draws unchanged."""
        plain, fixed = np.random.default_rng(8), np.random.default_rng(8)
        draw_key_label(3, plain)
        label = draw_key_label(3, fixed, "101")

        assert label == BitString.from_str("101")
        assert plain.random() == fixed.random()

    def test_fixed_key_length(self):
        """Test that the override must match k."""
        with pytest.raises(DomainError):
            draw_key_label(1, np.random.default_rng(0), "11")


class TestInterceptResend:
    """Tests for attack_intercept_resend."""

    @pytest.mark.parametrize("seed", range(8))
    def test_resends_the_measured_eigenstate(self, seed):
        """Test that the forwarded qubit is the eigenstate Eve observed."""
        state = create_state("dense", 1)
        basis, bit = attack_intercept_resend(state, 0, np.random.default_rng(seed))
        sign = 1.0 if bit == 0 else -1.0

        if basis == 0:
            assert bit == 0
            assert state.expectation(PauliProduct.from_label("Z")) == pytest.approx(1.0)
        else:
            assert state.expectation(PauliProduct.from_label("X")) == pytest.approx(sign)


class TestQuantumTransit:
    """Tests for transmit_qubits."""

    def test_noiseless_link(self):
        """Test that a clean link leaves the state alone."""
        config = ProtocolConfig(N=3)
        state = create_state("dense", 2)
        truth = GroundTruth()
        transmit_qubits(state, {1: [0], 2: [1]}, config, SessionRandomness(0), truth)

        assert state.measure_computational([0, 1], np.random.default_rng(0)) == BitString.zeros(2)
        assert truth.as_dict()["channel_errors"] == []

    def test_pauli_adversary_on_one_link(self):
        """Test that only the attacked link is hit."""
        config = ProtocolConfig(N=3, adversary=AdversaryConfig(kind="pauli", links=[1], pauli="X"))
        state = create_state("tableau", 2)
        truth = GroundTruth()
        transmit_qubits(state, {1: [0], 2: [1]}, config, SessionRandomness(0), truth)

        assert state.measure_computational([0, 1], np.random.default_rng(0)) == BitString.from_str("10")
        assert truth.adversary_events == [(1, 0, "X")]

    def test_intercept_records_basis_and_bit(self):
        """Test the ground truth of an intercept-resend attack."""
        config = ProtocolConfig(N=3, adversary=AdversaryConfig(kind="intercept_resend", links=[2]))
        state = create_state("dense", 3)
        truth = GroundTruth()
        transmit_qubits(state, {2: [0, 1, 2]}, config, SessionRandomness(4), truth)

        assert len(truth.adversary_events) == 3
        assert {basis for _, _, basis in truth.adversary_events} <= {"Z", "X"}
        assert len(truth.eve_bits[2]) == 3

    def test_certain_channel_error(self):
        """Test that px = 1 flips every qubit and is recorded."""
        config = ProtocolConfig(N=3, link_channels={1: ChannelConfig(px=1.0)})
        state = create_state("dense", 2)
        truth = GroundTruth()
        transmit_qubits(state, {1: [0, 1]}, config, SessionRandomness(0), truth)

        assert state.measure_computational([0, 1], np.random.default_rng(0)) == BitString.ones(2)
        assert truth.channel_errors == [(1, 0, "X"), (1, 1, "X")]


class TestClassicalTransit:
    """Tests for the vectorized eigenstate rules."""

    def test_matched_bases_reproduce_bits(self, sample_eigenstates):
        """Test measurement in the preparation basis."""
        bases, bits = sample_eigenstates

        assert np.array_equal(measure_eigenstates(bases, bits, bases, np.random.default_rng(0)), bits)

    def test_pauli_flips(self):
        """Test which Paulis flip which eigenstates."""
        labels = np.array(["X", "Z", "Y", "I", "X", "Z"])
        bases = np.array([0, 0, 1, 1, 1, 1])

        assert pauli_flips(labels, bases).tolist() == [True, False, True, False, False, True]

    def test_y_adversary_flips_everything(self, sample_eigenstates):
        """Test a certain Y attack on every eigenstate."""
        bases, bits = sample_eigenstates
        config = ProtocolConfig(N=3, adversary=AdversaryConfig(kind="pauli", pauli="Y"))
        truth = GroundTruth()
        out_bases, out_bits = transmit_eigenstates(bases, bits, 1, config, SessionRandomness(0), truth)

        assert np.array_equal(out_bases, bases)
        assert np.array_equal(out_bits, bits ^ 1)
        assert len(truth.adversary_events) == 16

    def test_inputs_not_modified(self, sample_eigenstates):
        """Test that transit works on copies."""
        bases, bits = sample_eigenstates
        original = bits.copy()
        config = ProtocolConfig(N=3, channel=ChannelConfig(px=0.5))
        transmit_eigenstates(bases, bits, 1, config, SessionRandomness(0), GroundTruth())

        assert np.array_equal(bits, original)

    def test_intercept_resend_table(self):
        """Test the exact per-case error table of intercept-resend."""
        table = intercept_resend_error_table().set_index(["prep_basis", "eve_basis"])

        assert table["contribution"].sum() == pytest.approx(0.25)
        assert table.loc[("Z", "Z"), "error_probability"] == pytest.approx(0.0)
        assert table.loc[("Z", "X"), "error_probability"] == pytest.approx(0.5)
        assert table.loc[("X", "Z"), "error_probability"] == pytest.approx(0.5)


class TestSessionRandomness:
    """Tests for per-session generator streams."""

    def test_streams_are_reproducible(self):
        """Test that equal seeds give equal streams."""
        first, second = SessionRandomness(5), SessionRandomness(5)

        for name in STREAMS:
            assert getattr(first, name).random() == getattr(second, name).random()

    def test_streams_are_independent(self):
        """Test that draws on one stream do not shift another."""
        busy, idle = SessionRandomness(5), SessionRandomness(5)
        busy.alice.random(100)

        assert busy.key.random() == idle.key.random()

    def test_unknown_stream(self):
        """Test attribute access for an unknown stream."""
        with pytest.raises(AttributeError):
            SessionRandomness(0).eve

    def test_session_seeds(self):
        """Test that session seeds are distinct, reproducible and non-negative."""
        seeds = spawn_session_seeds(42, 50)

        assert seeds == spawn_session_seeds(42, 50)
        assert len(set(seeds)) == 50
        assert all(0 <= seed < 2**63 for seed in seeds)
