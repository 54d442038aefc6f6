"""
CSS-code key distribution.

Alice encodes a random key label k into the parameterized codeword
Q_{x,z}(k) of a fixed CSS pair, mixes its qubits with n check qubits in
random positions and hides everything under a random Hadamard cover.
Every receiver gets its own copy. After the public announcement of the
layout, cover, x and (optionally) z, receivers test the check qubits,
correct the code block and read the key off the coset of the measured
codeword.
"""

from __future__ import annotations

from typing import Optional

from src.codes.bitstring import BitString
from src.codes.catalog import resolve_css
from src.codes.css_codes import CssCode, CssParameters, encode_circuit_state, stabilizer_generators
from src.protocols.common import (
    GroundTruth,
    ThresholdVariant,
    apply_injected_errors,
    draw_key_label,
    draw_permutation,
    error_estimate,
    keys_agree,
    transmit_qubits,
)
from src.protocols.schemas import AbortReason, InjectedError, ProtocolConfig, SessionResult, Transcript
from src.protocols.session import SessionRandomness
from src.quantum.backend import QuantumState, create_state, select_backend
from src.quantum.pauli import PauliProduct
from src.utils import logging
from src.utils.errors import DecodeFailure, DomainError

PROTOCOL_NAME = "css"


def prepare_receiver_state(css: CssCode, label: BitString, params: CssParameters,
                           check_bits: BitString, layout: list[int], backend: str) -> QuantumState:
    """
    One receiver's register before the Hadamard cover: code qubit j at
    ``layout[j]`` and check qubit i at ``layout[css.n + i]``.
    """
    state = create_state(backend, len(layout))
    encode_circuit_state(css, label, params, state, layout[:css.n])
    check_qubits = layout[css.n:]
    for position in check_bits.support():
        state.apply_x(check_qubits[position])
    return state


def correct_code_block(state: QuantumState, css: CssCode, params: CssParameters,
                       code_qubits: list[int], reveal_phase: bool,
                       streams: SessionRandomness) -> None:
    """
    Measure the signed stabilizer generators and apply the table correction.

    Without the phase key only the Z-type generators are measured and no
    phase correction is made.

    Raises:
        DecodeFailure: If a syndrome is outside its decoding table
    """
    generators = stabilizer_generators(css, params)
    num_z = css.c1.n - css.c1.k
    if not reveal_phase:
        generators = generators[:num_z]

    bits = []
    for generator in generators:
        operator = generator.embed(state.num_qubits, code_qubits)
        bits.append(state.measure_pauli(operator, streams.measurement).bit)

    x_mask = css.c1.syndrome_table.lookup(BitString.from_bits(bits[:num_z]))
    if reveal_phase:
        z_mask = css.c2_dual.syndrome_table.lookup(BitString.from_bits(bits[num_z:]))
    else:
        z_mask = BitString.zeros(css.n)
    correction = PauliProduct(x_mask, z_mask)
    if not correction.is_identity():
        state.apply_pauli(correction.embed(state.num_qubits, code_qubits))


def _locate_code_qubit(css: CssCode, layout: list[int]):
    def locate(receiver: int, position: int) -> int:
        if position >= css.n:
            raise DomainError(f"Injected error position {position} outside the code block of {css.n}")
        return layout[position]
    return locate


def run_css_protocol(config: ProtocolConfig) -> SessionResult:
    """
    Run one CSS-protocol session with the configured code.

    Raises:
        KeyError: If the configured code is unknown
        BackendError: If n + n_c qubits do not fit the requested backend
    """
    streams = SessionRandomness(config.seed)
    transcript = Transcript()
    truth = GroundTruth()
    css = resolve_css(config.css, config.code_file)
    num_parties, n = config.num_parties, config.n
    size = n + css.n
    backend = select_backend(config.backend.value, size)

    label = draw_key_label(css.k, streams.key, config.fixed_key)
    params = CssParameters.random(css.n, streams.alice)
    check_bits = BitString.random(n, streams.alice)
    layout = [int(q) for q in draw_permutation(size, streams.alice, config.extra_permutation)]
    cover = BitString.random(size, streams.alice)
    logging.debug(f"CSS session seed={config.seed}: code {css.name}, {size} qubits per receiver on {backend}")

    states = {}
    for receiver in range(1, num_parties):
        state = prepare_receiver_state(css, label, params, check_bits, layout, backend)
        for qubit in cover.support():
            state.apply_h(qubit)
        transmit_qubits(state, {receiver: range(size)}, config, streams, truth)
        states[receiver] = state

    transcript.announce("positions", layout)
    transcript.announce("b", cover)
    transcript.announce("x", params.x)
    if config.reveal_phase:
        transcript.announce("z", params.z)

    locate = _locate_code_qubit(css, layout)
    checks = []
    for receiver, state in states.items():
        for qubit in cover.support():
            state.apply_h(qubit)
        errors: list[InjectedError] = [e for e in config.injected_errors if e.receiver == receiver]
        apply_injected_errors(state, errors, locate, truth)
        checks.append(state.measure_computational(layout[css.n:], streams.measurement))

    transcript.announce("w_alice", check_bits)
    for receiver, check in enumerate(checks, start=1):
        transcript.announce(f"w_party{receiver}", check)
    estimate = error_estimate(check_bits, checks, config.c, n, ThresholdVariant.ENTANGLED)
    transcript.announce("t", estimate.t)
    logging.info(
        f"CSS session seed={config.seed}: wt(w)={estimate.wt_w}, qber={estimate.qber:.3f}, "
        f"t={estimate.t}, code radius {css.t}"
    )

    def finish(reason: Optional[AbortReason], keys: Optional[list[BitString]] = None,
               derived: Optional[list[BitString]] = None) -> SessionResult:
        if reason is not None:
            logging.info(f"CSS session seed={config.seed} aborted: {reason}")
        return SessionResult(
            protocol=PROTOCOL_NAME,
            seed=config.seed,
            aborted=reason is not None,
            abort_reason=reason,
            keys=tuple(keys) if keys is not None else None,
            qber=estimate.qber,
            wt_w=estimate.wt_w,
            t=estimate.t,
            sifted_count=size,
            transcript=transcript,
            raw_count=size,
            code=css.name,
            derived_keys=tuple(derived) if derived is not None else None,
            ground_truth=truth.as_dict(),
        )

    if estimate.t > css.t:
        return finish(AbortReason.THRESHOLD)

    keys = [label]
    code_qubits = layout[:css.n]
    for receiver, state in states.items():
        try:
            correct_code_block(state, css, params, code_qubits, config.reveal_phase, streams)
        except DecodeFailure as e:
            logging.info(f"CSS session seed={config.seed}: receiver {receiver}: {e}")
            return finish(AbortReason.DECODE)
        word = state.measure_computational(code_qubits, streams.measurement)
        keys.append(css.label(word ^ params.x))

    if not keys_agree(keys):
        return finish(AbortReason.DECODE, derived=keys)
    return finish(None, keys=keys, derived=keys)
