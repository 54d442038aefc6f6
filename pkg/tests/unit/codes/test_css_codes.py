"""
Unit tests for CSS codes and their dephasing oracle.
"""

import numpy as np
import pytest

from src.codes import gf2
from src.codes.bitstring import BitString
from src.codes.catalog import builtin_css_codes, hamming_code, repetition_code, simplex_code
from src.codes.css_codes import (
    CssParameters,
    bit_syndrome_of,
    codeword_amplitudes,
    correct,
    css_from_pair,
    dephase_average,
    encode_circuit_state,
    parameterized_codeword,
    phase_sum,
    phase_syndrome_of,
    stabilizer_generators,
    syndrome_from_outcomes,
)
from src.codes.linear_codes import LinearCode, codewords, contains, solve_syndrome
from src.quantum.dense import DenseState, fidelity
from src.quantum.pauli import PauliProduct
from src.quantum.tableau import Tableau
from src.utils.errors import CssConstructionError, MembershipError


@pytest.fixture
def steane():
    """[[7, 1]] Steane code."""
    return builtin_css_codes()["steane"]


@pytest.fixture
def rep3():
    """[[3, 1]] two-coset code with radius 0."""
    return builtin_css_codes()["rep3"]


@pytest.fixture
def sample_params():
    """Non-trivial displacements for a 7-qubit code."""
    return CssParameters(BitString.from_str("1010010"), BitString.from_str("0110001"))


class TestConstruction:
    """Tests for css_from_pair and the built-in catalog."""

    def test_builtin_parameters(self):
        """Test n, k and t of every built-in pair."""
        params = {name: (code.n, code.k, code.t) for name, code in builtin_css_codes().items()}

        assert params == {
            "trivial": (1, 1, 0),
            "rep3": (3, 1, 0),
            "steane": (7, 1, 1),
            "golay": (23, 1, 3),
        }

    def test_unnested_pair_rejected(self):
        """Test that C2 ⊄ C1 raises."""
        with pytest.raises(CssConstructionError):
            css_from_pair(simplex_code(), hamming_code())

    def test_equal_codes_rejected(self):
        """Test that a pair encoding no qubits raises."""
        with pytest.raises(CssConstructionError):
            css_from_pair(hamming_code(), hamming_code())

    def test_length_mismatch_rejected(self):
        """Test that codes of different lengths raise."""
        with pytest.raises(CssConstructionError):
            css_from_pair(hamming_code(), repetition_code(3))


class TestCodewordStates:
    """Tests for parameterized codewords and their stabilizers."""

    def test_codeword_is_normalized(self, steane, sample_params):
        """Test the norm of Q_{x,z}(v)."""
        v = steane.representative(BitString.from_str("1"))
        state = parameterized_codeword(steane, v, sample_params)

        assert state.is_normalized()
        assert np.count_nonzero(np.abs(state.amplitudes) > 1e-12) == 8

    def test_stabilizers_have_eigenvalue_one(self, steane, sample_params):
        """Test that every signed generator stabilizes the codeword."""
        v = steane.representative(BitString.from_str("1"))
        state = parameterized_codeword(steane, v, sample_params)

        for generator in stabilizer_generators(steane, sample_params):
            assert state.expectation(generator) == pytest.approx(1.0)

    def test_non_codeword_rejected(self, steane):
        """Test that v must belong to C1."""
        with pytest.raises(MembershipError):
            codeword_amplitudes(steane, BitString.from_str("1000000"))

    def test_encoding_circuit_matches_definition(self, steane, sample_params):
        """Test the circuit against the amplitude formula."""
        label = BitString.from_str("1")
        circuit = encode_circuit_state(steane, label, sample_params, DenseState(7))
        reference = parameterized_codeword(steane, steane.representative(label), sample_params)

        assert fidelity(circuit, reference) == pytest.approx(1.0)
        assert np.allclose(circuit.amplitudes, reference.amplitudes)

    def test_encoding_circuit_on_tableau(self, steane, sample_params):
        """Test that the tableau encoding is stabilized by the signed generators."""
        state = encode_circuit_state(steane, BitString.from_str("0"), sample_params, Tableau(7))

        for generator in stabilizer_generators(steane, sample_params):
            assert state.expectation(generator) == 1.0

    def test_encoding_on_chosen_qubits(self, rep3):
        """Test that code qubits can be placed anywhere in a register."""
        params = CssParameters.zero(3)
        state = encode_circuit_state(rep3, BitString.from_str("1"), params, DenseState(5), qubits=[4, 0, 2])
        reduced = state.reduced_density_matrix([4, 0, 2])
        reference = parameterized_codeword(rep3, rep3.representative(BitString.from_str("1")), params)

        assert np.allclose(reduced, reference.density_matrix())


class TestSyndromesAndCorrection:
    """Tests for syndrome extraction and the correction operator."""

    def test_single_bit_error_corrected(self, steane):
        """Test that an X error yields its own X correction."""
        error = BitString.unit(7, 4)
        operator = correct(steane, bit_syndrome_of(steane, error), phase_syndrome_of(steane, BitString.zeros(7)))

        assert operator.x_mask == error
        assert operator.z_mask.is_zero()

    def test_single_phase_error_corrected(self, steane):
        """Test that a Z error yields its own Z correction."""
        error = BitString.unit(7, 2)
        operator = correct(steane, bit_syndrome_of(steane, BitString.zeros(7)), phase_syndrome_of(steane, error))

        assert operator.z_mask == error

    def test_measured_syndrome_matches_error(self, steane, sample_params):
        """Test generator outcomes on a codeword with one X error."""
        v = steane.representative(BitString.from_str("0"))
        state = parameterized_codeword(steane, v, sample_params)
        state.apply_x(5)
        rng = np.random.default_rng(0)

        outcomes = [state.measure_pauli(g, rng).outcome for g in stabilizer_generators(steane, sample_params)]
        bit_syndrome, phase_syndrome = syndrome_from_outcomes(steane, outcomes)

        assert bit_syndrome == bit_syndrome_of(steane, BitString.unit(7, 5))
        assert phase_syndrome.is_zero()


class TestDephasingOracle:
    """Tests for the phase-sum identity and the dephasing average."""

    def test_phase_sum_identity(self):
        """Test Σ_z (−1)^{x·z} = 2^n δ_{x,0}."""
        assert phase_sum(BitString.zeros(4)) == 16
        for value in range(1, 16):
            assert phase_sum(BitString(value, 4)) == 0

    def test_dephased_codeword_is_classical_mixture(self, rep3):
        """Test both computations of the averaged operator agree."""
        for label_value in range(2):
            k_prime = rep3.representative(BitString(label_value, 1))
            for x_value in range(8):
                report = dephase_average(rep3, k_prime, BitString(x_value, 3))
                assert report.passed
                assert np.trace(report.averaged).real == pytest.approx(1.0)

    def test_mixture_is_diagonal(self, steane):
        """Test that the averaged Steane codeword has no coherences."""
        report = dephase_average(steane, steane.representative(BitString.from_str("1")), BitString.zeros(7))

        assert np.allclose(report.averaged, np.diag(np.diag(report.averaged)))


class TestErrorCorrectionCycle:
    """Tests for encode, single-qubit error, syndrome measurement and correction."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_every_single_qubit_error_corrected(self, steane, seed):
        """Test that all 21 single-qubit Paulis are undone with fidelity 1."""
        rng = np.random.default_rng(seed)
        params = CssParameters.random(7, rng)
        v = steane.representative(BitString.random(1, rng))
        encoded = parameterized_codeword(steane, v, params)
        generators = stabilizer_generators(steane, params)

        for qubit in range(7):
            for pauli in ("X", "Y", "Z"):
                state = encoded.copy()
                state.apply_pauli(PauliProduct.on_qubits(7, {qubit: pauli}))
                outcomes = [state.measure_pauli(g, rng).outcome for g in generators]
                state.apply_pauli(correct(steane, *syndrome_from_outcomes(steane, outcomes)))

                assert fidelity(state, encoded) == pytest.approx(1.0), f"{pauli} on qubit {qubit}"


def coset_words(code):
    """One representative x per coset of C1 and one z per coset of C2⊥."""
    bit_syndromes = [BitString(s, code.n - code.c1.k) for s in range(1 << (code.n - code.c1.k))]
    phase_syndromes = [BitString(s, code.c2.k) for s in range(1 << code.c2.k)]
    xs = [solve_syndrome(code.c1, s) for s in bit_syndromes]
    zs = [solve_syndrome(code.c2_dual, s) for s in phase_syndromes]
    return xs, zs


@pytest.fixture
def random_nested_pair():
    """[[8, 2]] CSS code from a random [8, 4] code and the span of its first two rows."""
    rng = np.random.default_rng(17)
    rows = rng.integers(0, 2, size=(4, 8), dtype=np.uint8)
    while gf2.rank(rows) < 4:
        rows = rng.integers(0, 2, size=(4, 8), dtype=np.uint8)
    c1 = LinearCode.from_generator(rows, name="random-c1")
    c2 = LinearCode.from_generator(rows[:2], name="random-c2")
    return css_from_pair(c1, c2, name="random")


class TestCodewordBasis:
    """Tests for the parameterized codewords as a basis of the whole space."""

    @pytest.mark.parametrize("name", ["rep3", "steane"])
    def test_orthonormal_basis(self, name):
        """Test that Q_{x,z}(v) over coset labels and displacements has Gram matrix I."""
        code = builtin_css_codes()[name]
        xs, zs = coset_words(code)
        columns = [
            parameterized_codeword(code, code.representative(BitString(label, code.k)), CssParameters(x, z)).amplitudes
            for label in range(code.num_cosets)
            for x in xs
            for z in zs
        ]
        basis = np.column_stack(columns)

        assert basis.shape == (1 << code.n, 1 << code.n)
        assert np.allclose(basis.conj().T @ basis, np.eye(1 << code.n))

    @pytest.mark.parametrize("code_name", ["steane", "random"])
    def test_state_depends_only_on_coset(self, code_name, random_nested_pair):
        """Test that Q_{x,z}(v) and Q_{x,z}(v′) coincide iff v ⊕ v′ ∈ C2, and are orthogonal otherwise."""
        code = random_nested_pair if code_name == "random" else builtin_css_codes()["steane"]
        params = CssParameters.random(code.n, np.random.default_rng(4))
        words = [BitString.from_array(row) for row in codewords(code.c1)]
        states = {word: parameterized_codeword(code, word, params) for word in words}

        for v in words:
            for v_prime in words:
                overlap = fidelity(states[v], states[v_prime])
                if contains(code.c2, v ^ v_prime):
                    assert overlap == pytest.approx(1.0)
                else:
                    assert overlap == pytest.approx(0.0, abs=1e-12)
