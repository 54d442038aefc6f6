"""
Equivalence oracle between the CSS protocol and prepare-and-measure.

Once the phase key z is averaged out, a receiver of the CSS protocol
holds the same mixed state as the key-position bits of a
prepare-and-measure sender whose public value v + u equals the bit key x.
The oracle computes both density operators independently and also runs
the two protocols with matched randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.codes.bitstring import BitString
from src.codes.catalog import resolve_css
from src.codes.css_codes import CssCode, CssParameters, encode_circuit_state
from src.protocols.common import draw_key_label
from src.protocols.css_protocol import run_css_protocol
from src.protocols.prepare_measure import pm_sender_mixture, run_prepare_measure
from src.protocols.schemas import AbortReason, AdversaryKind, ProtocolConfig
from src.protocols.session import SessionRandomness
from src.quantum.dense import DenseState
from src.utils import logging
from src.utils.config import NUMERICAL_TOLERANCE
from src.utils.errors import DomainError, OracleDivergenceError

ORACLE_MAX_LENGTH = 6
ORACLE_MAX_COSETS = 2
# keeps the matched P&M run clear of the insufficient-sift abort
PM_MIN_BLOCK = 8


@dataclass(frozen=True)
class EquivalenceReport:
    code: str
    label: BitString
    x: BitString
    error_mask: BitString
    max_difference: float
    css_keys: Optional[tuple[BitString, ...]]
    pm_keys: Optional[tuple[BitString, ...]]
    css_abort: Optional[AbortReason]
    pm_abort: Optional[AbortReason]
    tolerance: float = NUMERICAL_TOLERANCE

    @property
    def operators_equal(self) -> bool:
        return self.max_difference <= self.tolerance

    @property
    def keys_match(self) -> bool:
        return self.css_keys == self.pm_keys

    @property
    def passed(self) -> bool:
        return self.operators_equal and self.keys_match

    def assert_passed(self) -> None:
        if not self.passed:
            raise OracleDivergenceError(
                f"Protocol equivalence failed for '{self.code}': operator difference "
                f"{self.max_difference:.3e}, keys {'match' if self.keys_match else 'differ'}"
            )


def css_receiver_density(css: CssCode, label: BitString, x: BitString,
                         error_mask: Optional[BitString] = None) -> np.ndarray:
    """
    Receiver's code-block density operator averaged over all 2^n phase
    keys, each codeword prepared with the encoding circuit.
    """
    error_mask = error_mask or BitString.zeros(css.n)
    dimension = 1 << css.n
    averaged = np.zeros((dimension, dimension), dtype=np.complex128)
    for z_value in range(dimension):
        state = DenseState(css.n)
        encode_circuit_state(css, label, CssParameters(x, BitString(z_value, css.n)), state)
        for position in error_mask.support():
            state.apply_x(position)
        averaged += np.outer(state.amplitudes, state.amplitudes.conj())
    return averaged / dimension


def _shift_basis(matrix: np.ndarray, mask: BitString) -> np.ndarray:
    """X^mask ρ X^mask for a computational-basis operator."""
    order = np.arange(matrix.shape[0]) ^ mask.value
    return matrix[np.ix_(order, order)]


def _check_oracle_config(css: CssCode, config: ProtocolConfig) -> None:
    if css.n > ORACLE_MAX_LENGTH:
        raise DomainError(f"Oracle codes are limited to n ≤ {ORACLE_MAX_LENGTH}, '{css.name}' has {css.n}")
    if css.num_cosets > ORACLE_MAX_COSETS:
        raise DomainError(f"Oracle codes need at most {ORACLE_MAX_COSETS} cosets, '{css.name}' has {css.num_cosets}")
    if not config.channel.is_noiseless or config.link_channels or \
            config.adversary.kind != AdversaryKind.NONE:
        raise DomainError("The equivalence oracle runs without channel noise or adversary")


def compare_protocol_equivalence(config: ProtocolConfig, perturbation: float = 0.0) -> EquivalenceReport:
    """
    Compare the CSS protocol and prepare-and-measure on one small code.

    Injected X and Y errors on receiver 1 act as bit flips on both sides.
    ``perturbation`` is added to one entry of the prepare-and-measure
    operator to confirm a divergence is reported.

    Raises:
        DomainError: If the code is too large or the channel is not clean
    """
    css = resolve_css(config.css, config.code_file)
    _check_oracle_config(css, config)

    streams = SessionRandomness(config.seed)
    label = draw_key_label(css.k, streams.key, config.fixed_key)
    x = BitString.random(css.n, streams.alice)

    flipped = [e.position for e in config.injected_errors
               if e.receiver == 1 and e.pauli in ("X", "Y") and e.position < css.n]
    error_mask = BitString.from_positions(css.n, flipped)

    css_operator = css_receiver_density(css, label, x, error_mask)
    pm_operator = _shift_basis(pm_sender_mixture(css, label, x), error_mask)
    if perturbation:
        pm_operator = pm_operator.copy()
        pm_operator[0, 0] += perturbation
    difference = float(np.max(np.abs(css_operator - pm_operator)))

    css_result = run_css_protocol(config)
    pm_result = run_prepare_measure(
        config.with_updates(n=max(config.n, css.n, PM_MIN_BLOCK), catalog=[css.name])
    )

    report = EquivalenceReport(
        code=css.name,
        label=label,
        x=x,
        error_mask=error_mask,
        max_difference=difference,
        css_keys=css_result.derived_keys,
        pm_keys=pm_result.derived_keys,
        css_abort=css_result.abort_reason,
        pm_abort=pm_result.abort_reason,
    )
    if report.passed:
        logging.info(f"Equivalence oracle passed for '{css.name}' (difference {difference:.2e})")
    else:
        logging.error(
            f"Equivalence oracle diverged for '{css.name}': difference {difference:.3e}, "
            f"css keys {css_result.derived_keys}, pm keys {pm_result.derived_keys}"
        )
    return report
