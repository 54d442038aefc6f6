"""
Unit tests for batch execution and results files.

This test suite covers:
- Seeded, order-preserving batches
- Error records for sessions the backend cannot simulate
- Verification game and equivalence batches
- Writing results files and checking them on load
"""

import json

import pandas as pd
import pytest

from src.harness.experiment import load_report, run_experiment, run_session, summarize_frame, write_report
from src.harness.schemas import ExperimentSpec, GameSettings, ProtocolKind
from src.protocols.schemas import ProtocolConfig
from src.utils.errors import ReportConsistencyError


@pytest.fixture
def entangled_spec():
    """Four noiseless entangled sessions on one worker."""
    return ExperimentSpec(protocol=ProtocolKind.ENTANGLED, config=ProtocolConfig(N=3, n=2),
                          trials=4, master_seed=7, workers=1)


@pytest.fixture
def written_report(tmp_path, entangled_spec):
    """A results file written from the entangled batch."""
    path = tmp_path / "results" / "entangled.jsonl"
    write_report(run_experiment(entangled_spec), path)
    return path


class TestRunExperiment:
    """Tests for run_experiment and run_session."""

    def test_noiseless_batch(self, entangled_spec):
        """Test the aggregate of a clean batch."""
        report = run_experiment(entangled_spec)

        assert report.sessions == 4
        assert report.abort_rate == 0.0
        assert report.key_agreement_rate == 1.0
        assert report.mean_key_length == 1.0
        assert report.errors == 0
        assert [record.session_index for record in report.records] == [0, 1, 2, 3]

    def test_deterministic(self, entangled_spec):
        """Test that a master seed fixes every record."""
        assert run_experiment(entangled_spec).records == run_experiment(entangled_spec).records

    def test_records_passed_in_order(self, entangled_spec):
        """Test the on_record callback."""
        seen = []
        run_experiment(entangled_spec, on_record=seen.append)

        assert [record.session_index for record in seen] == [0, 1, 2, 3]

    def test_backend_error_record(self):
        """Test that an unusable backend yields an error record instead of raising."""
        config = ProtocolConfig(N=3, n=2, backend="classical_bits")
        spec = ExperimentSpec(protocol=ProtocolKind.CSS, config=config, trials=2, workers=1)
        report = run_experiment(spec)

        assert report.errors == 2
        assert report.abort_rate == 1.0
        assert report.key_agreement_rate is None
        assert all(record.abort_reason == "backend_error" for record in report.records)

    def test_honest_game_batch(self):
        """Test that an honest prover always passes."""
        spec = ExperimentSpec(protocol=ProtocolKind.VERIFICATION_GAME, config=ProtocolConfig(N=3),
                              game=GameSettings(questions=5), trials=20, workers=1)
        report = run_experiment(spec)

        assert report.acceptance_rate == 1.0
        assert report.cheat_rate == 0.0

    def test_cheating_game_batch(self):
        """Test that a wrong fixed label rarely survives ten questions."""
        game = GameSettings(questions=10, strategy="fixed_string", hidden="000")
        spec = ExperimentSpec(protocol=ProtocolKind.VERIFICATION_GAME, config=ProtocolConfig(N=3),
                              game=game, trials=50, workers=1)
        report = run_experiment(spec)

        assert report.acceptance_rate < 0.1
        assert report.cheat_rate == report.acceptance_rate

    def test_hidden_label_length_checked(self):
        """Test that a game label must have N·blocks bits."""
        with pytest.raises(ValueError):
            ExperimentSpec(protocol=ProtocolKind.VERIFICATION_GAME, config=ProtocolConfig(N=3),
                           game=GameSettings(strategy="fixed_string", hidden="0000"))

    def test_equivalence_session(self):
        """Test an equivalence record."""
        spec = ExperimentSpec(protocol=ProtocolKind.EQUIVALENCE, config=ProtocolConfig(N=3, css="rep3"))
        record = run_session(spec, 0, 11)

        assert not record.aborted
        assert record.keys_equal
        assert record.max_oracle_diff < 1e-9


class TestSummaries:
    """Tests for summarize_frame."""

    def test_empty_frame(self):
        """Test the summary of zero sessions."""
        summary = summarize_frame(pd.DataFrame())

        assert summary["sessions"] == 0
        assert summary["key_agreement_rate"] is None


class TestResultsFiles:
    """Tests for write_report and load_report."""

    def test_one_line_per_session_plus_summary(self, written_report):
        """Test the file layout."""
        lines = written_report.read_text().splitlines()

        assert len(lines) == 5
        assert json.loads(lines[-1])["type"] == "summary"
        assert all(json.loads(line)["type"] == "session" for line in lines[:-1])

    def test_load_roundtrip(self, written_report, entangled_spec):
        """Test that a written file loads with its records."""
        report = load_report(written_report)

        assert report.sessions == 4
        assert report.records == run_experiment(entangled_spec).records

    def test_byte_identical_rewrites(self, tmp_path, entangled_spec, written_report):
        """Test that the same spec writes the same bytes."""
        again = write_report(run_experiment(entangled_spec), tmp_path / "again.jsonl")

        assert again.read_bytes() == written_report.read_bytes()

    def test_tampered_summary(self, written_report):
        """Test that a summary disagreeing with its records is rejected."""
        lines = written_report.read_text().splitlines()
        summary = json.loads(lines[-1])
        summary["abort_rate"] = 0.5
        written_report.write_text("\n".join(lines[:-1] + [json.dumps(summary)]) + "\n")

        with pytest.raises(ReportConsistencyError):
            load_report(written_report)

    def test_missing_summary(self, written_report):
        """Test that a file without a summary line is rejected."""
        lines = written_report.read_text().splitlines()
        written_report.write_text("\n".join(lines[:-1]) + "\n")

        with pytest.raises(ReportConsistencyError):
            load_report(written_report)

    def test_missing_file(self, tmp_path):
        """Test that a missing results file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_report(tmp_path / "absent.jsonl")
