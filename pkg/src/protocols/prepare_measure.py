"""
Prepare-and-measure multiparty key distribution.

Alice sends m = 2^{N+1}·n random bits, each in a random computational or
Hadamard basis, to every receiver. Positions where all bases agree are
kept; half of the first 2n sifted positions are compared publicly and the
other half carry the key. Reconciliation uses a random codeword u of C1
announced as v + u, and the key is the C1/C2 coset of u.

Every transmitted state is a single-qubit basis eigenstate, so the
default backend tracks (basis, bit) pairs with exact per-case rules. The
dense and tableau backends simulate each qubit explicitly and serve as a
cross-check.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.codes import gf2
from src.codes.bitstring import BitString
from src.codes.catalog import resolve_catalog
from src.codes.css_codes import CssCode
from src.codes.linear_codes import codewords, decode, random_codeword, syndrome
from src.protocols.common import (
    GroundTruth,
    ThresholdVariant,
    draw_key_label,
    draw_permutation,
    error_estimate,
    keys_agree,
    measure_eigenstates,
    select_session_code,
    sift,
    transmit_eigenstates,
    transmit_qubits,
)
from src.protocols.schemas import AbortReason, BackendKind, ProtocolConfig, SessionResult, Transcript
from src.protocols.session import SessionRandomness
from src.quantum.backend import create_state, select_backend
from src.quantum.dense import DenseState
from src.utils import logging
from src.utils.errors import DecodeFailure, DomainError

PROTOCOL_NAME = "pm"


def raw_bit_count(num_parties: int, n: int) -> int:
    """m = 2^{N+1}·n initial positions."""
    return (1 << (num_parties + 1)) * n


def _transmit_classical(bits: np.ndarray, bases: np.ndarray, receiver_bases: np.ndarray,
                        config: ProtocolConfig, streams: SessionRandomness,
                        truth: GroundTruth) -> np.ndarray:
    received = []
    for link, measure_bases in enumerate(receiver_bases, start=1):
        arrived_bases, arrived_bits = transmit_eigenstates(bases, bits, link, config, streams, truth)
        received.append(measure_eigenstates(arrived_bases, arrived_bits, measure_bases,
                                            streams.measurement))
    return np.vstack(received)


def _transmit_quantum(bits: np.ndarray, bases: np.ndarray, receiver_bases: np.ndarray,
                      config: ProtocolConfig, streams: SessionRandomness, truth: GroundTruth,
                      backend: str) -> np.ndarray:
    """One explicit single-qubit state per receiver and position."""
    received = np.zeros(receiver_bases.shape, dtype=np.uint8)
    for link, measure_bases in enumerate(receiver_bases, start=1):
        for position in range(bits.size):
            state = create_state(backend, 1)
            if bits[position]:
                state.apply_x(0)
            if bases[position]:
                state.apply_h(0)
            events = GroundTruth()
            transmit_qubits(state, {link: [0]}, config, streams, events)
            truth.channel_errors.extend((link, position, p) for _, _, p in events.channel_errors)
            truth.adversary_events.extend((link, position, p) for _, _, p in events.adversary_events)
            if link in events.eve_bits:
                truth.eve_bits[link] = truth.eve_bits.get(link, "") + events.eve_bits[link]
            if measure_bases[position]:
                state.apply_h(0)
            received[link - 1, position] = state.measure_qubit(0, streams.measurement)
    return received


def pm_sender_mixture(css: CssCode, label: BitString, announcement: BitString) -> np.ndarray:
    """
    Density operator of the key-position bits Alice sent, given the key
    label and the public value v + u.

    v = (v + u) ⊕ u with u uniform on the coset rep(label) + C2, so the
    sent state is the uniform mixture of |v + u ⊕ rep ⊕ w⟩ over w ∈ C2.
    """
    representative = css.representative(label)
    elements = gf2.rows_to_ints(codewords(css.c2))
    dimension = 1 << css.n
    mixture = np.zeros((dimension, dimension), dtype=np.complex128)
    for element in elements:
        sent = BitString(int(element), css.n) ^ representative ^ announcement
        amplitudes = DenseState.basis(sent).amplitudes
        mixture += np.outer(amplitudes, amplitudes.conj())
    return mixture / elements.size


def run_prepare_measure(config: ProtocolConfig) -> SessionResult:
    """
    Run one prepare-and-measure session.

    Raises:
        BackendError: If an explicit quantum backend cannot be used
    """
    streams = SessionRandomness(config.seed)
    transcript = Transcript()
    truth = GroundTruth()
    num_parties, n = config.num_parties, config.n
    raw_count = config.raw_positions or raw_bit_count(num_parties, n)
    catalog = resolve_catalog(config.catalog, config.code_file)

    bits = streams.alice.integers(0, 2, size=raw_count, dtype=np.uint8)
    bases = streams.alice.integers(0, 2, size=raw_count, dtype=np.uint8)
    receiver_bases = streams.receivers.integers(0, 2, size=(num_parties - 1, raw_count),
                                                dtype=np.uint8)

    if config.backend in (BackendKind.AUTO, BackendKind.CLASSICAL_BITS):
        received = _transmit_classical(bits, bases, receiver_bases, config, streams, truth)
    else:
        backend = select_backend(config.backend.value, 1)
        received = _transmit_quantum(bits, bases, receiver_bases, config, streams, truth, backend)

    transcript.announce("b_alice", BitString.from_array(bases))
    for party, party_bases in enumerate(receiver_bases, start=1):
        transcript.announce(f"b_party{party}", BitString.from_array(party_bases))
    sifted = sift(BitString.from_array(bases), [BitString.from_array(b) for b in receiver_bases])
    logging.debug(f"P&M session seed={config.seed}: {len(sifted)}/{raw_count} positions sifted")

    def finish(reason: Optional[AbortReason], estimate=None, code: Optional[CssCode] = None,
               keys: Optional[list[BitString]] = None,
               derived: Optional[list[BitString]] = None) -> SessionResult:
        if reason is not None:
            logging.info(f"P&M session seed={config.seed} aborted: {reason}")
        return SessionResult(
            protocol=PROTOCOL_NAME,
            seed=config.seed,
            aborted=reason is not None,
            abort_reason=reason,
            keys=tuple(keys) if keys is not None else None,
            qber=estimate.qber if estimate else None,
            wt_w=estimate.wt_w if estimate else None,
            t=estimate.t if estimate else None,
            sifted_count=len(sifted),
            transcript=transcript,
            raw_count=raw_count,
            code=code.name if code else None,
            derived_keys=tuple(derived) if derived is not None else None,
            ground_truth=truth.as_dict(),
        )

    if len(sifted) < 2 * n:
        return finish(AbortReason.INSUFFICIENT_SIFT)

    kept = np.asarray(sifted[: 2 * n])
    permutation = draw_permutation(2 * n, streams.alice, config.extra_permutation)
    key_positions, check_positions = kept[permutation[:n]], kept[permutation[n:]]
    transcript.announce("permutation", permutation.tolist())

    for error in config.injected_errors:
        if error.position >= n:
            raise DomainError(f"Injected error position {error.position} outside the key block of {n}")
        if error.pauli in ("X", "Y"):
            received[error.receiver - 1, key_positions[error.position]] ^= 1
        truth.injected.append((error.receiver, error.position, error.pauli))

    check_alice = BitString.from_array(bits[check_positions])
    check_parties = [BitString.from_array(row[check_positions]) for row in received]
    transcript.announce("check_positions", check_positions.tolist())
    transcript.announce("w_alice", check_alice)
    for party, check in enumerate(check_parties, start=1):
        transcript.announce(f"w_party{party}", check)
    estimate = error_estimate(check_alice, check_parties, config.c, n, ThresholdVariant.PM)
    transcript.announce("t", estimate.t)
    logging.info(
        f"P&M session seed={config.seed}: sifted={len(sifted)}, wt(w)={estimate.wt_w}, "
        f"qber={estimate.qber:.3f}, t={estimate.t}"
    )

    code, reason = select_session_code(estimate.t, catalog, n)
    if code is None:
        return finish(reason, estimate)
    transcript.announce("code", code.name)

    code_positions = key_positions[:code.n]
    v = BitString.from_array(bits[code_positions])
    received_words = [BitString.from_array(row[code_positions]) for row in received]
    transcript.announce("sx_alice", syndrome(code.c1, v))
    for party, word in enumerate(received_words, start=1):
        transcript.announce(f"sx_party{party}", syndrome(code.c1, word))

    label = draw_key_label(code.k, streams.key, config.fixed_key)
    u = code.representative(label) ^ random_codeword(code.c2, streams.alice)
    announcement = v ^ u
    transcript.announce("v+u", announcement)

    keys = [label]
    for party, word in enumerate(received_words, start=1):
        try:
            decoded, _ = decode(code.c1, code.c1.syndrome_table, word ^ announcement)
        except DecodeFailure as e:
            logging.info(f"P&M session seed={config.seed}: receiver {party}: {e}")
            return finish(AbortReason.DECODE, estimate, code)
        keys.append(code.label(decoded))

    if not keys_agree(keys):
        return finish(AbortReason.DECODE, estimate, code, derived=keys)
    return finish(None, estimate, code, keys=keys, derived=keys)
