"""
Prometheus Metrics for CMS-Wheat.
Counters for simulation steps, session outcomes and calibration evaluations.
"""
import logging
import os

from prometheus_client import CollectorRegistry, Counter, Gauge, write_to_textfile

from core.base_module import BaseModule

logger = logging.getLogger(__name__)

SESSION_OUTCOMES = ("equilibrium", "producer_rationed", "buyers_rationed", "no_trade")


class MetricsManager(BaseModule):
    """
    Owns a private registry so several managers can coexist in one process.
    """

    def __init__(self):
        super().__init__("MetricsManager")
        self.registry = CollectorRegistry()
        self.steps = Counter(
            "cmsw_steps",
            "Simulation steps executed",
            registry=self.registry,
        )
        self.sessions = Counter(
            "cmsw_sessions",
            "Market sessions cleared, by outcome",
            ["outcome"],
            registry=self.registry,
        )
        self.migrations = Counter(
            "cmsw_demand_migrations",
            "Demand moves from the most expensive to the cheapest session",
            registry=self.registry,
        )
        self.evaluations = Counter(
            "cmsw_objective_evaluations",
            "Calibration objective evaluations (full simulation runs)",
            registry=self.registry,
        )
        self.best_loss = Gauge(
            "cmsw_best_loss",
            "Best calibration loss found so far",
            registry=self.registry,
        )

    def _initialize(self) -> bool:
        for outcome in SESSION_OUTCOMES:
            self.sessions.labels(outcome=outcome)
        return True

    def record_session(self, outcome: str) -> None:
        self.sessions.labels(outcome=outcome).inc()

    def record_log(self, log) -> None:
        """Count the steps, sessions and migrations of a run made in another process."""
        for report in log:
            self.steps.inc()
            for outcome in report.outcomes:
                self.record_session(outcome.label)
            if report.migrations:
                self.migrations.inc(report.migrations)

    def write(self, directory: str) -> str:
        """
        Write the registry in text exposition format to ``metrics.prom``.

        Returns:
            str: Path of the written file
        """
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, "metrics.prom")
        write_to_textfile(path, self.registry)
        logger.debug(f"Metrics written to {path}")
        return path


metrics_manager = MetricsManager()
