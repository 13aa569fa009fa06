"""
Prometheus metrics for simulation runs.

Each command records into a private registry and can dump it in the text
exposition format, ready for a node-exporter textfile collector:

    metrics = SimulationMetrics()
    metrics.record_run("g", status="ok", steps=4210, seconds=1.7, p_peak=0.98)
    metrics.write("/var/lib/node_exporter/lackwalk.prom")
"""
import logging
from pathlib import Path
from typing import Optional, Union

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    generate_latest,
    write_to_textfile,
)

logger = logging.getLogger(__name__)

RUN_SECONDS_BUCKETS = (0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0, 1800.0)


class SimulationMetrics:
    """Run counters, step counters and timings for one CLI invocation."""

    def __init__(self, prefix: str = "lackwalk", registry: Optional[CollectorRegistry] = None):
        self.registry = registry if registry is not None else CollectorRegistry()
        self.runs_total = Counter(
            f"{prefix}_runs_total",
            "Search runs executed",
            ["family", "status"],
            registry=self.registry,
        )
        self.steps_total = Counter(
            f"{prefix}_steps_total",
            "Walk steps applied",
            ["family"],
            registry=self.registry,
        )
        self.run_seconds = Histogram(
            f"{prefix}_run_seconds",
            "Wall-clock duration of one search run",
            ["family"],
            buckets=RUN_SECONDS_BUCKETS,
            registry=self.registry,
        )
        self.last_peak_probability = Gauge(
            f"{prefix}_last_peak_probability",
            "Success probability at the first peak of the latest run",
            ["family"],
            registry=self.registry,
        )

    def record_run(
        self,
        family: str,
        status: str,
        steps: int = 0,
        seconds: float = 0.0,
        p_peak: Optional[float] = None,
    ) -> None:
        self.runs_total.labels(family=family, status=status).inc()
        if steps:
            self.steps_total.labels(family=family).inc(steps)
        self.run_seconds.labels(family=family).observe(seconds)
        if p_peak is not None:
            self.last_peak_probability.labels(family=family).set(p_peak)

    def render(self) -> bytes:
        return generate_latest(self.registry)

    def write(self, path: Union[str, Path]) -> None:
        write_to_textfile(str(path), self.registry)
        logger.info("Metrics written to %s", path)
