"""Tests for Prometheus simulation metrics."""
from prometheus_client import CollectorRegistry

from lackwalk.metrics import SimulationMetrics


class TestSimulationMetrics:
    def test_uses_private_registry_by_default(self):
        first = SimulationMetrics()
        second = SimulationMetrics()
        assert first.registry is not second.registry

    def test_accepts_custom_registry(self):
        registry = CollectorRegistry()
        metrics = SimulationMetrics(registry=registry)
        assert metrics.registry is registry

    def test_record_run_updates_all_series(self):
        metrics = SimulationMetrics()
        metrics.record_run("g", "ok", steps=120, seconds=0.25, p_peak=0.9)
        metrics.record_run("g", "ok", steps=80, seconds=0.75, p_peak=0.95)
        registry = metrics.registry

        assert registry.get_sample_value(
            "lackwalk_runs_total", {"family": "g", "status": "ok"}
        ) == 2.0
        assert registry.get_sample_value("lackwalk_steps_total", {"family": "g"}) == 200.0
        assert registry.get_sample_value("lackwalk_run_seconds_count", {"family": "g"}) == 2.0
        assert registry.get_sample_value("lackwalk_run_seconds_sum", {"family": "g"}) == 1.0
        assert registry.get_sample_value(
            "lackwalk_last_peak_probability", {"family": "g"}
        ) == 0.95

    def test_failed_runs_are_counted_separately(self):
        metrics = SimulationMetrics()
        metrics.record_run("akr", "failed")
        registry = metrics.registry

        assert registry.get_sample_value(
            "lackwalk_runs_total", {"family": "akr", "status": "failed"}
        ) == 1.0
        assert registry.get_sample_value(
            "lackwalk_last_peak_probability", {"family": "akr"}
        ) is None

    def test_custom_prefix(self):
        metrics = SimulationMetrics(prefix="bench")
        metrics.record_run("skw", "ok", steps=1, seconds=0.1)
        assert metrics.registry.get_sample_value(
            "bench_runs_total", {"family": "skw", "status": "ok"}
        ) == 1.0

    def test_render_is_text_exposition(self):
        metrics = SimulationMetrics()
        metrics.record_run("g", "ok", steps=5, seconds=0.01, p_peak=0.5)
        text = metrics.render().decode()
        assert "# TYPE lackwalk_runs_total counter" in text
        assert 'lackwalk_runs_total{family="g",status="ok"} 1.0' in text

    def test_write_to_textfile(self, tmp_path):
        metrics = SimulationMetrics()
        metrics.record_run("g", "ok", steps=5, seconds=0.01)
        path = tmp_path / "lackwalk.prom"
        metrics.write(path)
        assert "lackwalk_steps_total" in path.read_text()
