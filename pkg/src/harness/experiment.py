"""
Batch execution of seeded sessions and result files.

Session seeds are split from the master seed by session index, sessions
run on a joblib worker pool, and records come back in index order, so a
results file depends only on the spec.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.codes.bitstring import BitString
from src.ghz.bdsw import perfect_label
from src.ghz.verification import AdversaryStrategy, StrategyKind, run_verification_game
from src.harness.schemas import AggregateReport, ExperimentSpec, ProtocolKind, SessionRecord
from src.protocols.css_protocol import run_css_protocol
from src.protocols.entangled import run_entangled_based
from src.protocols.equivalence import compare_protocol_equivalence
from src.protocols.prepare_measure import run_prepare_measure
from src.protocols.schemas import AbortReason, ProtocolConfig, SessionResult
from src.protocols.session import spawn_session_seeds
from src.utils import logging
from src.utils.errors import BackendError, ReportConsistencyError

RUNNERS: dict[ProtocolKind, Callable[[ProtocolConfig], SessionResult]] = {
    ProtocolKind.ENTANGLED: run_entangled_based,
    ProtocolKind.CSS: run_css_protocol,
    ProtocolKind.PM: run_prepare_measure,
}

SUMMARY_TOLERANCE = 1e-9


def _game_strategy(spec: ExperimentSpec) -> AdversaryStrategy:
    game = spec.game
    num_parties = spec.config.num_parties
    if game.strategy == StrategyKind.HONEST:
        return AdversaryStrategy.honest(num_parties, game.blocks)
    hidden = BitString.from_str(game.hidden)
    if game.strategy == StrategyKind.FIXED_STRING:
        return AdversaryStrategy.fixed(hidden, num_parties)
    mixture = [(game.honest_weight, perfect_label(num_parties, game.blocks)),
               (1.0 - game.honest_weight, hidden)]
    return AdversaryStrategy(StrategyKind.CLASSICAL_MIXTURE, num_parties, game.blocks,
                             mixture=[(w, label) for w, label in mixture if w > 0])


def _protocol_record(index: int, seed: int, protocol: ProtocolKind,
                     result: SessionResult) -> SessionRecord:
    return SessionRecord(
        session_index=index,
        seed=seed,
        protocol=protocol,
        aborted=result.aborted,
        abort_reason=str(result.abort_reason) if result.abort_reason else None,
        qber=result.qber,
        wt_w=result.wt_w,
        t=result.t,
        sifted_count=result.sifted_count,
        raw_count=result.raw_count,
        key_len=result.key_length,
        keys_equal=result.keys_equal,
        code=result.code,
    )


def run_session(spec: ExperimentSpec, index: int, seed: int) -> SessionRecord:
    """
    Run one session of the spec's protocol with the given seed.

    A BackendError becomes an error record; anything else propagates.
    """
    protocol = spec.protocol
    config = spec.config.with_updates(seed=seed)
    try:
        if protocol in RUNNERS:
            return _protocol_record(index, seed, protocol, RUNNERS[protocol](config))

        if protocol == ProtocolKind.EQUIVALENCE:
            report = compare_protocol_equivalence(config)
            return SessionRecord(
                session_index=index,
                seed=seed,
                protocol=protocol,
                aborted=not report.passed,
                abort_reason=None if report.passed else "oracle_divergence",
                keys_equal=report.keys_match,
                code=report.code,
                max_oracle_diff=report.max_difference,
            )

        outcome = run_verification_game(_game_strategy(spec), spec.game.questions,
                                        np.random.default_rng(seed), spec.game.include_zero)
        return SessionRecord(
            session_index=index,
            seed=seed,
            protocol=protocol,
            aborted=not outcome.accepted,
            accepted=outcome.accepted,
            cheated=outcome.cheated,
        )
    except BackendError as e:
        logging.error(f"Session {index} (seed {seed}) failed: {e}")
        return SessionRecord(
            session_index=index,
            seed=seed,
            protocol=protocol,
            aborted=True,
            abort_reason=str(AbortReason.BACKEND_ERROR),
            error=str(e),
        )


def _mean_or_none(series: pd.Series) -> Optional[float]:
    values = pd.to_numeric(series, errors="coerce").dropna()
    return float(values.mean()) if len(values) else None


def summarize_frame(frame: pd.DataFrame) -> dict[str, Any]:
    """Summary statistics of a frame of session records."""
    sessions = len(frame)
    if sessions == 0:
        return {"sessions": 0, "errors": 0, "abort_rate": 0.0, "mean_qber": None,
                "key_agreement_rate": None, "mean_key_length": 0.0, "sift_retention": None,
                "acceptance_rate": None, "cheat_rate": None}

    aborted = frame["aborted"].astype(bool)
    completed = frame[~aborted]
    errors = int(frame["error"].notna().sum()) if "error" in frame else 0

    retention = None
    if {"sifted_count", "raw_count"} <= set(frame.columns):
        sifted = pd.to_numeric(frame["sifted_count"], errors="coerce")
        raw = pd.to_numeric(frame["raw_count"], errors="coerce")
        valid = sifted.notna() & raw.notna() & (raw > 0)
        if valid.any():
            retention = float((sifted[valid] / raw[valid]).mean())

    accepted = frame["accepted"] if "accepted" in frame else pd.Series(dtype=object)
    cheated = frame["cheated"] if "cheated" in frame else pd.Series(dtype=object)
    return {
        "sessions": sessions,
        "errors": errors,
        "abort_rate": float(aborted.mean()),
        "mean_qber": _mean_or_none(frame["qber"]) if "qber" in frame else None,
        "key_agreement_rate": float(completed["keys_equal"].astype(bool).mean()) if len(completed) else None,
        "mean_key_length": float(pd.to_numeric(completed["key_len"]).mean()) if len(completed) else 0.0,
        "sift_retention": retention,
        "acceptance_rate": _mean_or_none(accepted.dropna().astype(float)) if accepted.notna().any() else None,
        "cheat_rate": _mean_or_none(cheated.dropna().astype(float)) if cheated.notna().any() else None,
    }


def records_frame(records: list[SessionRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.model_dump(mode="json") for record in records])


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None,
                   on_record: Optional[Callable[[SessionRecord], None]] = None) -> AggregateReport:
    """
    Run ``spec.trials`` sessions and aggregate them.

    Args:
        workers: joblib n_jobs override (default ``spec.workers``)
        on_record: Called with every record in session-index order

    Returns:
        AggregateReport carrying the per-session records
    """
    seeds = spawn_session_seeds(spec.master_seed, spec.trials)
    n_jobs = spec.workers if workers is None else workers
    logging.info(
        f"Running {spec.trials} {spec.protocol} sessions (master seed {spec.master_seed}, n_jobs={n_jobs})"
    )
    records = Parallel(n_jobs=n_jobs)(
        delayed(run_session)(spec, index, seed) for index, seed in enumerate(seeds)
    )
    if on_record is not None:
        for record in records:
            on_record(record)

    summary = summarize_frame(records_frame(records))
    report = AggregateReport(protocol=spec.protocol, master_seed=spec.master_seed,
                             records=records, **summary)
    logging.info(
        f"{spec.protocol}: abort rate {report.abort_rate:.3f}, "
        f"key agreement {report.key_agreement_rate}, errors {report.errors}"
    )
    return report


def write_report(report: AggregateReport, path: str | Path) -> Path:
    """
    Write one JSON line per session followed by the summary line.

    Keys are sorted so identical reports give byte-identical files.
    """
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(record.model_dump(mode="json"), sort_keys=True) for record in report.records]
    lines.append(json.dumps(report.model_dump(mode="json"), sort_keys=True))
    output.write_text("\n".join(lines) + "\n")
    logging.info(f"Results saved to {output}")
    return output


def _same(a: Any, b: Any) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(float(a), float(b), rel_tol=0, abs_tol=SUMMARY_TOLERANCE)
    return a == b


def load_report(path: str | Path) -> AggregateReport:
    """
    Read a results file and check its summary against its session records.

    Raises:
        FileNotFoundError: If the file does not exist
        ReportConsistencyError: If the summary line is missing or cannot be
            recomputed from the records
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Results file not found: {file_path}")

    rows = [json.loads(line) for line in file_path.read_text().splitlines() if line.strip()]
    if not rows or rows[-1].get("type") != "summary":
        raise ReportConsistencyError(f"{file_path} has no trailing summary line")

    stored = {key: value for key, value in rows[-1].items() if key in AggregateReport.model_fields}
    records = [SessionRecord.model_validate(row) for row in rows[:-1]]

    recomputed = summarize_frame(records_frame(records))
    mismatched = [key for key, value in recomputed.items() if not _same(value, stored.get(key))]
    if mismatched:
        logging.error(f"Inconsistent summary in {file_path}: {mismatched}")
        raise ReportConsistencyError(f"Summary fields {mismatched} do not match the session records")
    return AggregateReport.model_validate({**stored, "records": records})
