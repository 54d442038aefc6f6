"""
Cross-protocol session invariants.

This test suite covers:
- Sessions with key-block errors beyond the code radius never emit unequal keys
- Noisy channels never produce a non-aborted session with unequal keys
- An extra uniform permutation leaves the check-error statistics unchanged
"""

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from src.codes.catalog import resolve_css
from src.protocols.css_protocol import run_css_protocol
from src.protocols.entangled import run_entangled_based
from src.protocols.prepare_measure import run_prepare_measure
from src.protocols.schemas import ChannelConfig, InjectedError, ProtocolConfig

# runner, base config, key-block positions open to injection
PROTOCOL_CASES = {
    "entangled": (run_entangled_based, ProtocolConfig(N=3, n=7, c=0.15, catalog=["trivial", "rep3", "steane"]), 7),
    "css": (run_css_protocol, ProtocolConfig(N=3, n=4, css="steane"), 7),
    "pm": (run_prepare_measure, ProtocolConfig(N=3, n=8, c=0.2), 8),
}


def random_errors(rng, block, weight):
    """``weight`` X/Y errors on distinct key positions, spread over both receivers."""
    positions = rng.choice(block, size=weight, replace=False)
    receivers = rng.integers(1, 3, size=weight)
    paulis = rng.choice(["X", "Y"], size=weight)
    return [InjectedError(receiver=int(r), position=int(p), pauli=str(q))
            for r, p, q in zip(receivers, positions, paulis)]


class TestAbortSoundness:
    """A session either aborts or hands every party the same key."""

    @pytest.mark.parametrize("protocol", sorted(PROTOCOL_CASES))
    def test_errors_beyond_radius(self, protocol):
        """Test key-block errors heavier than the chosen code corrects."""
        runner, config, block = PROTOCOL_CASES[protocol]
        rng = np.random.default_rng(len(protocol))

        for seed in range(15):
            weight = int(rng.integers(2, 4))
            result = runner(config.with_updates(seed=seed, injected_errors=random_errors(rng, block, weight)))

            if result.code is not None:
                assert weight > resolve_css(result.code).t
            assert result.aborted or result.keys_equal

    @pytest.mark.parametrize("protocol", sorted(PROTOCOL_CASES))
    def test_noisy_channel(self, protocol):
        """Test sessions over a channel noisy enough to defeat the codes now and then."""
        runner, config, _ = PROTOCOL_CASES[protocol]
        noisy = config.with_updates(channel=ChannelConfig(px=0.08, pz=0.04))

        for seed in range(20):
            result = runner(noisy.with_updates(seed=seed))
            if not result.aborted:
                assert len(set(result.keys)) == 1


class TestPermutationNeutrality:
    """Composing a second permutation changes nothing statistically."""

    def test_check_error_weight_distribution(self):
        """Test that wt(w) has the same distribution with and without the extra permutation."""
        config = ProtocolConfig(N=3, n=16, channel=ChannelConfig(px=0.05))
        single = [run_prepare_measure(config.with_updates(seed=seed)).wt_w for seed in range(300)]
        composed = [run_prepare_measure(config.with_updates(seed=seed, extra_permutation=True)).wt_w
                    for seed in range(1000, 1300)]

        # weights of 3 or more share one cell
        table = np.array([np.bincount(np.minimum(single, 3), minlength=4),
                          np.bincount(np.minimum(composed, 3), minlength=4)])
        table = table[:, table.sum(axis=0) > 0]

        assert chi2_contingency(table).pvalue > 1e-3
        assert np.mean(composed) == pytest.approx(np.mean(single), abs=0.3)
