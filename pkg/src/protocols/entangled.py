"""
Entanglement-based multiparty key distribution.

Alice prepares 2n GHZ blocks, keeps qubit 0 of each block and sends the
other N−1 qubits to the receivers under a random Hadamard cover. Half the
blocks (chosen by a random permutation) are measured to estimate the
error; the other half carry the key after CSS bit and phase correction and
coset extraction.
"""

from __future__ import annotations

import operator
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from src.codes.bitstring import BitString
from src.codes.catalog import resolve_catalog
from src.codes.css_codes import CssCode, correct
from src.codes.linear_codes import solve_syndrome
from src.protocols.common import (
    GroundTruth,
    ThresholdVariant,
    apply_injected_errors,
    draw_permutation,
    error_estimate,
    keys_agree,
    measure_x_syndrome,
    measure_z_syndrome,
    select_session_code,
    transmit_qubits,
)
from src.protocols.schemas import AbortReason, ProtocolConfig, SessionResult, Transcript
from src.protocols.session import SessionRandomness
from src.quantum.backend import QuantumState, block_qubit, prepare_ghz_blocks, select_backend
from src.utils import logging
from src.utils.errors import DecodeFailure, DomainError

PROTOCOL_NAME = "entangled"


def _party_qubits(party: int, blocks, num_blocks: int) -> list[int]:
    return [block_qubit(party, int(j), num_blocks) for j in blocks]


def reconcile_key_blocks(state: QuantumState, code: CssCode, num_parties: int,
                         code_blocks: Sequence[int], num_blocks: int, rng: np.random.Generator,
                         transcript: Transcript) -> BitString:
    """
    CSS syndrome measurement and correction on the code blocks.

    Every party measures the Z-type checks of C1 and the X-type checks of
    C2 on its own qubits. Receivers undo bit errors relative to Alice's
    Z syndrome. The X-type outcomes multiply to the eigenvalue of X^g on
    all parties at once, so their XOR is the phase syndrome of the shared
    blocks and Alice applies its Z correction.

    Returns:
        Alice's bit syndrome

    Raises:
        DecodeFailure: If a relative or phase syndrome is outside its table
    """
    qubits = [_party_qubits(p, code_blocks, num_blocks) for p in range(num_parties)]
    bit_syndromes = [measure_z_syndrome(state, code.c1.parity_check, q, rng) for q in qubits]
    phase_outcomes = [measure_x_syndrome(state, code.c2.generator, q, rng) for q in qubits]
    transcript.announce("syndrome_alice", bit_syndromes[0])
    for party, outcomes in enumerate(phase_outcomes):
        transcript.announce("x_syndrome_alice" if party == 0 else f"x_syndrome_party{party}", outcomes)

    phase_syndrome = reduce(operator.xor, phase_outcomes)
    transcript.announce("phase_syndrome", phase_syndrome)

    corrections = [correct(code, bit_syndrome ^ bit_syndromes[0], phase_syndrome)
                   for bit_syndrome in bit_syndromes]
    for party in range(1, num_parties):
        for position in corrections[party].x_mask.support():
            state.apply_x(qubits[party][position])
    # a phase flip acts the same on every qubit of a GHZ block
    for position in corrections[0].z_mask.support():
        state.apply_z(qubits[0][position])
    return bit_syndromes[0]


def _extract_keys(state: QuantumState, code: CssCode, config: ProtocolConfig,
                  key_blocks: np.ndarray, num_blocks: int, streams: SessionRandomness,
                  transcript: Transcript) -> list[BitString]:
    """
    Raises:
        DecodeFailure: If a receiver's relative syndrome is outside the table
    """
    code_blocks = key_blocks[:code.n]
    alice_syndrome = reconcile_key_blocks(state, code, config.num_parties, code_blocks, num_blocks,
                                          streams.measurement, transcript)

    displacement = solve_syndrome(code.c1, alice_syndrome)
    keys = []
    for party in range(config.num_parties):
        word = state.measure_computational(_party_qubits(party, code_blocks, num_blocks),
                                           streams.measurement)
        keys.append(code.label(word ^ displacement))
    return keys


def run_entangled_based(config: ProtocolConfig) -> SessionResult:
    """
    Run one entanglement-based session.

    Raises:
        BackendError: If the N·2n register does not fit the requested backend
    """
    streams = SessionRandomness(config.seed)
    transcript = Transcript()
    truth = GroundTruth()
    num_parties, n = config.num_parties, config.n
    num_blocks = 2 * n
    catalog = resolve_catalog(config.catalog, config.code_file)

    backend = select_backend(config.backend.value, num_parties * num_blocks)
    state = prepare_ghz_blocks(num_parties, num_blocks, backend)
    logging.debug(f"Entangled session seed={config.seed}: {num_parties}x{num_blocks} on {backend}")

    # Alice's private choices
    permutation = draw_permutation(num_blocks, streams.alice, config.extra_permutation)
    key_blocks, check_blocks = permutation[:n], permutation[n:]
    cover = BitString.random(num_blocks, streams.alice)

    covered = cover.support()
    for party in range(1, num_parties):
        for block in covered:
            state.apply_h(block_qubit(party, block, num_blocks))

    transmit_qubits(
        state,
        {p: _party_qubits(p, range(num_blocks), num_blocks) for p in range(1, num_parties)},
        config, streams, truth,
    )

    transcript.announce("permutation", permutation.tolist())
    transcript.announce("b", cover)
    for party in range(1, num_parties):
        for block in covered:
            state.apply_h(block_qubit(party, block, num_blocks))

    def locate(receiver: int, position: int) -> int:
        if position >= n:
            raise DomainError(f"Injected error position {position} outside the key block of {n}")
        return block_qubit(receiver, int(key_blocks[position]), num_blocks)

    apply_injected_errors(state, config.injected_errors, locate, truth)

    checks = [
        state.measure_computational(_party_qubits(p, check_blocks, num_blocks), streams.measurement)
        for p in range(num_parties)
    ]
    transcript.announce("check_positions", check_blocks.tolist())
    for party, check in enumerate(checks):
        transcript.announce("w_alice" if party == 0 else f"w_party{party}", check)

    estimate = error_estimate(checks[0], checks[1:], config.c, n, ThresholdVariant.ENTANGLED)
    transcript.announce("t", estimate.t)
    logging.info(
        f"Entangled session seed={config.seed}: wt(w)={estimate.wt_w}, "
        f"qber={estimate.qber:.3f}, t={estimate.t}"
    )

    def finish(aborted: bool, reason: Optional[AbortReason], code: Optional[CssCode] = None,
               keys: Optional[list[BitString]] = None,
               derived: Optional[list[BitString]] = None) -> SessionResult:
        if reason is not None:
            logging.info(f"Entangled session seed={config.seed} aborted: {reason}")
        return SessionResult(
            protocol=PROTOCOL_NAME,
            seed=config.seed,
            aborted=aborted,
            abort_reason=reason,
            keys=tuple(keys) if keys is not None else None,
            qber=estimate.qber,
            wt_w=estimate.wt_w,
            t=estimate.t,
            sifted_count=num_blocks,
            transcript=transcript,
            raw_count=num_blocks,
            code=code.name if code else None,
            derived_keys=tuple(derived) if derived is not None else None,
            ground_truth=truth.as_dict(),
        )

    code, reason = select_session_code(estimate.t, catalog, n)
    if code is None:
        return finish(True, reason)
    transcript.announce("code", code.name)

    try:
        keys = _extract_keys(state, code, config, key_blocks, num_blocks, streams, transcript)
    except DecodeFailure as e:
        logging.info(f"Entangled session seed={config.seed}: {e}")
        return finish(True, AbortReason.DECODE, code)

    if not keys_agree(keys):
        return finish(True, AbortReason.DECODE, code, derived=keys)
    return finish(False, None, code, keys=keys, derived=keys)
