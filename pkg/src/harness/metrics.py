"""
Prometheus metrics for experiment batches.

This module provides Prometheus metrics for tracking:
- Sessions run and aborted, by protocol and abort reason
- Check-bit QBER and final key length distributions
- Key agreement and verification game acceptance per batch
"""

from pathlib import Path
from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, generate_latest, write_to_textfile

from src.harness.schemas import AggregateReport, SessionRecord


class SessionMetricsCollector:
    """
    Metrics collector for simulated key distribution sessions.

    Every collector owns its registry, so batches run in one process do
    not share counters.
    """

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        """
        Initialize the metrics collector.

        Args:
            registry: Optional custom Prometheus registry. A fresh one is created if not provided.
        """
        self.registry = registry or CollectorRegistry()

        self.sessions_total = Counter(
            'mqkd_sessions_total',
            'Total number of simulated sessions',
            ['protocol'],
            registry=self.registry
        )

        self.aborts_total = Counter(
            'mqkd_aborts_total',
            'Aborted sessions by reason',
            ['protocol', 'reason'],
            registry=self.registry
        )

        self.session_errors = Counter(
            'mqkd_session_errors_total',
            'Sessions that could not be simulated on the selected backend',
            ['protocol'],
            registry=self.registry
        )

        self.check_qber = Histogram(
            'mqkd_check_qber',
            'Distribution of check-bit error rates',
            buckets=[0.0, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.5, 1.0],
            registry=self.registry
        )

        self.key_length = Histogram(
            'mqkd_key_length_bits',
            'Length of the agreed key in bits',
            buckets=[0, 1, 2, 4, 8, 16, 32],
            registry=self.registry
        )

        self.key_agreement_rate = Gauge(
            'mqkd_key_agreement_rate',
            'Fraction of non-aborted sessions whose keys all agree',
            ['protocol'],
            registry=self.registry
        )

        self.abort_rate = Gauge(
            'mqkd_abort_rate',
            'Fraction of aborted sessions in the last batch',
            ['protocol'],
            registry=self.registry
        )

        self.acceptance_rate = Gauge(
            'mqkd_game_acceptance_rate',
            'Verification game acceptance rate in the last batch',
            registry=self.registry
        )

    def record_session(self, record: SessionRecord):
        """
        Record metrics for a single session.

        Args:
            record: Per-session result record
        """
        protocol = str(record.protocol)
        self.sessions_total.labels(protocol=protocol).inc()
        if record.error is not None:
            self.session_errors.labels(protocol=protocol).inc()
        if record.aborted:
            self.aborts_total.labels(protocol=protocol, reason=record.abort_reason or 'rejected').inc()
        if record.qber is not None:
            self.check_qber.observe(record.qber)
        if not record.aborted and record.key_len:
            self.key_length.observe(record.key_len)

    def update_summary(self, report: AggregateReport):
        """
        Update batch-level gauges.

        Args:
            report: Aggregated batch report
        """
        protocol = str(report.protocol)
        self.abort_rate.labels(protocol=protocol).set(report.abort_rate)
        if report.key_agreement_rate is not None:
            self.key_agreement_rate.labels(protocol=protocol).set(report.key_agreement_rate)
        if report.acceptance_rate is not None:
            self.acceptance_rate.set(report.acceptance_rate)

    def get_metrics(self) -> bytes:
        """
        Generate Prometheus metrics output.

        Returns:
            Prometheus metrics in exposition format
        """
        return generate_latest(self.registry)

    def write(self, path: str | Path) -> Path:
        """Write the registry in text exposition format (node-exporter textfile style)."""
        output = Path(path)
        output.parent.mkdir(parents=True, exist_ok=True)
        write_to_textfile(str(output), self.registry)
        return output
