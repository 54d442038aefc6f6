"""
Unit tests for the CSS-code protocol.
"""

import numpy as np
import pytest

from src.codes.bitstring import BitString
from src.codes.catalog import resolve_css
from src.codes.css_codes import CssParameters, stabilizer_generators
from src.protocols.css_protocol import prepare_receiver_state, run_css_protocol
from src.protocols.schemas import AbortReason, AdversaryConfig, InjectedError, ProtocolConfig
from src.utils.errors import DomainError


@pytest.fixture
def steane_config():
    """Steane code, four check qubits, three parties."""
    return ProtocolConfig(N=3, n=4, css="steane", seed=21)


def inject(config, *errors):
    return config.with_updates(injected_errors=[InjectedError(receiver=r, position=p, pauli=q) for r, p, q in errors])


class TestReceiverState:
    """Tests for prepare_receiver_state."""

    def test_layout_places_code_and_checks(self):
        """Test that code qubits carry the codeword and check qubits the check bits."""
        css = resolve_css("steane")
        params = CssParameters.random(7, np.random.default_rng(3))
        layout = [10, 0, 9, 1, 8, 2, 7, 3, 6, 4, 5]
        state = prepare_receiver_state(css, BitString.from_str("1"), params,
                                       BitString.from_str("1010"), layout, "tableau")

        for generator in stabilizer_generators(css, params):
            assert state.expectation(generator.embed(11, layout[:7])) == 1.0
        checks = state.measure_computational(layout[7:], np.random.default_rng(0))
        assert checks == BitString.from_str("1010")


class TestNoiselessSessions:
    """Tests for sessions without errors."""

    def test_keys_agree(self, steane_config):
        """Test that all receivers recover Alice's key label."""
        result = run_css_protocol(steane_config)

        assert not result.aborted
        assert result.keys_equal
        assert result.key_length == 1
        assert result.code == "steane"
        assert result.raw_count == 11

    def test_fixed_key(self, steane_config):
        """Test that a configured key label is distributed."""
        result = run_css_protocol(steane_config.with_updates(fixed_key="1"))

        assert result.keys == tuple(BitString.from_str("1") for _ in range(3))

    def test_without_phase_announcement(self, steane_config):
        """Test the variant that keeps z private."""
        result = run_css_protocol(steane_config.with_updates(reveal_phase=False))

        assert result.keys_equal
        assert result.transcript.get("z") == []

    def test_backends_agree(self, steane_config):
        """Test that the dense and tableau backends derive the same keys."""
        dense = run_css_protocol(steane_config.with_updates(backend="dense"))
        tableau = run_css_protocol(steane_config.with_updates(backend="tableau"))

        assert dense.keys == tableau.keys

    def test_rep3_code(self):
        """Test the smallest two-coset code."""
        result = run_css_protocol(ProtocolConfig(N=4, n=2, css="rep3", seed=3))

        assert result.keys_equal
        assert len(result.keys) == 4


class TestErrors:
    """Tests for sessions with errors."""

    @pytest.mark.parametrize("pauli", ["X", "Y", "Z"])
    def test_single_error_corrected(self, steane_config, pauli):
        """Test that any single-qubit error on the code block is corrected."""
        result = run_css_protocol(inject(steane_config, (1, 4, pauli)))

        assert not result.aborted
        assert result.keys_equal

    def test_double_error_changes_coset(self, steane_config):
        """Test that two bit flips are miscorrected and caught by the audit."""
        result = run_css_protocol(inject(steane_config, (2, 0, "X"), (2, 1, "X")))

        assert result.aborted
        assert result.abort_reason == AbortReason.DECODE
        assert result.derived_keys[2] != result.derived_keys[0]
        assert result.derived_keys[1] == result.derived_keys[0]

    def test_position_outside_code_block(self, steane_config):
        """Test that injected positions must lie in the code block."""
        with pytest.raises(DomainError):
            run_css_protocol(inject(steane_config, (1, 7, "X")))

    def test_threshold_abort(self, steane_config):
        """Test that a check error rate above the code radius aborts."""
        config = steane_config.with_updates(adversary=AdversaryConfig(kind="pauli", links=[2], pauli="Y"))
        result = run_css_protocol(config)

        assert result.aborted
        assert result.abort_reason == AbortReason.THRESHOLD
        assert result.t == 4

    def test_unknown_code(self, steane_config):
        """Test that an unknown code name raises KeyError."""
        with pytest.raises(KeyError):
            run_css_protocol(steane_config.with_updates(css="nope"))
