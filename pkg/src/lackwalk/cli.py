"""
Command-line front end.

    lackwalk run     one search, JSON record and optional probability trace
    lackwalk sweep   first peak as a function of the self-loop weight
    lackwalk scale   first peak as a function of lattice size, plus scaling fits
    lackwalk compare the same configuration under the G, AKR and SKW coins

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from lackwalk import get_version
from lackwalk.config import (
    ConfigError,
    LackwalkSettings,
    RunConfig,
    build_run_config,
    load_config_file,
    load_settings,
    resolve_jobs,
)
from lackwalk.experiments import (
    ClusterSpec,
    FamilyRow,
    FitModel,
    ScalingRow,
    SweepRow,
    compare_families,
    fit_scaling,
    is_exceptional,
    parse_weight_grid,
    scaling_run,
    sweep_loop_weight,
)
from lackwalk.lattice import LatticeGeometry
from lackwalk.logging import setup_logging
from lackwalk.metrics import SimulationMetrics
from lackwalk.operators import MarkedSet
from lackwalk.presets import PRESETS, get_preset
from lackwalk.records import (
    PeakRecord,
    RunRecord,
    atomic_write_text,
    family_csv,
    scaling_csv,
    sweep_csv,
    trace_csv,
)
from lackwalk.search import default_horizon, evolve_trace, find_first_peak, run_search

logger = logging.getLogger("lackwalk.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

# Flags that map onto RunConfig fields (dest -> field).
_CONFIG_FLAGS = (
    "dimension",
    "side",
    "coin",
    "loop_weight",
    "clusters",
    "anchor",
    "horizon",
    "horizon_factor",
    "prominence",
    "weights",
    "points_per_decade",
    "sizes",
    "fits",
    "trace",
    "out",
    "format",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat key = value config file (flags override it)")
    parser.add_argument("--preset", help="Named experiment bundle (fig2, fig3, fig4, fig5)")
    parser.add_argument("--dim", dest="dimension", type=int, help="Lattice dimension, 1 or 2")
    parser.add_argument("--side", type=int, help="Vertices per axis")
    parser.add_argument("--coin", help="Coin family: g, akr or skw")
    parser.add_argument("--loop-weight", dest="loop_weight", help="Self-loop weight a, or c/N")
    parser.add_argument(
        "--cluster",
        dest="clusters",
        action="append",
        help="Marked cluster: run:m, block:kxl, diag or list:v1,v2,... (repeatable)",
    )
    parser.add_argument("--anchor", help="Cluster anchor: x (1D) or x,y (2D)")
    parser.add_argument("--horizon", type=int, help="Maximum steps (default: scaling rule)")
    parser.add_argument("--horizon-factor", dest="horizon_factor", type=float)
    parser.add_argument("--prominence", type=float, help="First-peak prominence above p(0)")
    parser.add_argument("--out", help="Output file (run) or directory (sweep, scale, compare)")
    parser.add_argument("--jobs", type=int, help="Worker processes (default: CPU count)")
    parser.add_argument("--metrics", help="Write Prometheus metrics to this file")
    parser.add_argument("--log-level", dest="log_level")
    parser.add_argument("--log-format", dest="log_format", choices=("text", "json"))


def _preset_listing() -> str:
    lines = ["presets:"]
    lines += [f"  {p.name:<6} {p.command:<6} {p.description}" for p in PRESETS.values()]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lackwalk",
        description="Lackadaisical quantum walk search on periodic lattices",
        epilog=_preset_listing(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one search")
    _add_common(run)
    run.add_argument("--trace", help="Write the probability trace as CSV (step,probability)")
    run.add_argument("--format", choices=("json", "csv"), help="Record format (default json)")
    run.add_argument(
        "--embed-trace",
        dest="embed_trace",
        action="store_true",
        help="Include the full probability trace in the record",
    )

    sweep = sub.add_parser("sweep", help="Sweep the self-loop weight")
    _add_common(sweep)
    sweep.add_argument("--weights", help="lo:hi[:count] or a comma list; values may be c/N")
    sweep.add_argument("--points-per-decade", dest="points_per_decade", type=int)

    scale = sub.add_parser("scale", help="Scale the lattice size")
    _add_common(scale)
    scale.add_argument("--sizes", help="Comma-separated lattice sides, ascending")
    scale.add_argument(
        "--fit",
        dest="fits",
        action="append",
        choices=[m.value for m in FitModel],
        help="Scaling model to fit (repeatable)",
    )

    compare = sub.add_parser("compare", help="Compare the G, AKR and SKW coins")
    _add_common(compare)
    return parser


def resolve_config(args: argparse.Namespace, settings: LackwalkSettings) -> RunConfig:
    """Layer settings defaults, preset, config file and flags into a RunConfig."""
    defaults = {
        "prominence": settings.prominence,
        "horizon_factor": settings.horizon_factor,
        "points_per_decade": settings.points_per_decade,
    }
    preset = dict(get_preset(args.preset, args.command).values) if args.preset else {}
    from_file = load_config_file(args.config) if args.config else {}
    flags = {name: getattr(args, name, None) for name in _CONFIG_FLAGS}
    return build_run_config(defaults, preset, from_file, flags)


def _marked_sets(
    config: RunConfig, geometry: LatticeGeometry
) -> List[Tuple[ClusterSpec, MarkedSet]]:
    pairs = []
    for cluster in config.cluster_specs():
        try:
            pairs.append((cluster, config.marked(geometry, cluster)))
        except ValueError as e:
            raise ConfigError(f"clusters: {e}", field="clusters") from None
    return pairs


def _require_out(config: RunConfig, command: str) -> Path:
    if not config.out:
        raise ConfigError(f"out: {command} needs an output directory", field="out")
    return Path(config.out)


def _config_echo(config: RunConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def cmd_run(config: RunConfig, metrics: SimulationMetrics, embed_trace: bool = False) -> RunRecord:
    """One search; writes the record (stdout without --out) and the optional trace CSV."""
    if len(config.clusters) > 1:
        raise ConfigError("clusters: run takes a single cluster", field="clusters")
    geometry = config.geometry()
    spec = config.coin_spec(geometry)
    cluster, marked = _marked_sets(config, geometry)[0]
    horizon = config.horizon or default_horizon(
        geometry, marked.size, config.horizon_factor, loop_weight=spec.loop_weight
    )

    started = time.perf_counter()
    if config.trace or embed_trace:
        trace = evolve_trace(geometry, spec, marked, horizon)
        peak = find_first_peak(trace, config.prominence)
        steps = horizon
    else:
        result = run_search(geometry, spec, marked, horizon=horizon, prominence=config.prominence)
        trace, peak, steps = result.trace, result.peak, result.steps
    duration = time.perf_counter() - started
    metrics.record_run(spec.family.value, "ok", steps, duration, peak.p_peak)
    logger.info(
        "Run finished",
        extra={
            "extra": {
                "cluster": str(cluster),
                "t_peak": peak.t_peak,
                "p_peak": peak.p_peak,
                "terminated_by": peak.terminated_by.value,
                "steps": steps,
            }
        },
    )

    record = RunRecord(
        config=config.model_dump(mode="json"),
        peak=PeakRecord.from_result(peak),
        steps=steps,
        trace=trace.values.tolist() if embed_trace else None,
        duration_seconds=duration,
        version=get_version(),
    )
    body = record.to_csv() if config.format == "csv" else record.model_dump_json(indent=2) + "\n"
    if config.trace:
        atomic_write_text(config.trace, trace_csv(trace))
    if config.out:
        atomic_write_text(config.out, body)
    else:
        sys.stdout.write(body)
    return record


def _record_rows(metrics: SimulationMetrics, family: str, rows: Sequence[Any]) -> None:
    for row in rows:
        label = row.family if isinstance(row, FamilyRow) else family
        metrics.record_run(label, row.status, row.steps, row.seconds, row.p_peak)


def cmd_sweep(config: RunConfig, metrics: SimulationMetrics, jobs: int) -> List[Path]:
    """One CSV per cluster: a,Na,t_peak,p_peak,status (1D) or a,t_peak,p_peak,status (2D)."""
    out_dir = _require_out(config, "sweep")
    if not config.weights:
        raise ConfigError("weights: sweep needs a weight grid", field="weights")
    geometry = config.geometry()
    try:
        weights = parse_weight_grid(config.weights, geometry.vertex_count, config.points_per_decade)
    except ValueError as e:
        raise ConfigError(f"weights: {e}", field="weights") from None
    if not weights:
        raise ConfigError("weights: weight grid is empty", field="weights")
    pairs = _marked_sets(config, geometry)

    tables: Dict[str, str] = {}
    for cluster, marked in pairs:
        logger.info(f"Sweeping {len(weights)} weights for {cluster} on N={geometry.vertex_count}")
        rows: List[SweepRow] = sweep_loop_weight(
            geometry,
            config.coin,
            marked,
            weights,
            horizon=config.horizon,
            prominence=config.prominence,
            horizon_factor=config.horizon_factor,
            jobs=jobs,
        )
        _record_rows(metrics, config.coin.value, rows)
        tables[f"sweep_{cluster.slug}.csv"] = sweep_csv(rows, geometry.dimension)

    written = [atomic_write_text(out_dir / "config.json", _config_echo(config))]
    written += [atomic_write_text(out_dir / name, text) for name, text in tables.items()]
    return written


def cmd_scale(config: RunConfig, metrics: SimulationMetrics, jobs: int) -> List[Path]:
    """One CSV per cluster (N,M,t_peak,p_peak,status) plus a JSON file of fits."""
    out_dir = _require_out(config, "scale")
    if not config.sizes:
        raise ConfigError("sizes: scale needs a list of lattice sides", field="sizes")
    clusters = config.cluster_specs()

    outputs: Dict[str, str] = {}
    for cluster in clusters:
        logger.info(f"Scaling {cluster} over sides {config.sizes}")
        rows: List[ScalingRow] = scaling_run(
            config.coin,
            config.dimension,
            config.sizes,
            cluster,
            config.loop_weight_rule(),
            horizon=config.horizon,
            prominence=config.prominence,
            horizon_factor=config.horizon_factor,
            anchor=config.anchor_coords,
            jobs=jobs,
        )
        _record_rows(metrics, config.coin.value, rows)
        outputs[f"scale_{cluster.slug}.csv"] = scaling_csv(rows)
        if config.fits:
            fits: Dict[str, Any] = {}
            for model in config.fits:
                try:
                    fits[model.value] = fit_scaling(rows, model).model_dump(mode="json")
                except ValueError as e:
                    logger.warning(f"Fit {model.value} for {cluster} failed: {e}")
                    fits[model.value] = {"error": str(e)}
            outputs[f"scale_{cluster.slug}_fit.json"] = (
                json.dumps(fits, indent=2, sort_keys=True) + "\n"
            )

    written = [atomic_write_text(out_dir / "config.json", _config_echo(config))]
    written += [atomic_write_text(out_dir / name, text) for name, text in outputs.items()]
    return written


def cmd_compare(config: RunConfig, metrics: SimulationMetrics, jobs: int) -> List[FamilyRow]:
    """G, AKR and SKW on one cluster; CSV to --out directory or stdout."""
    if len(config.clusters) > 1:
        raise ConfigError("clusters: compare takes a single cluster", field="clusters")
    geometry = config.geometry()
    cluster, marked = _marked_sets(config, geometry)[0]
    rows = compare_families(
        geometry,
        marked,
        config.loop_weight_rule().value(geometry.vertex_count),
        horizon=config.horizon,
        prominence=config.prominence,
        horizon_factor=config.horizon_factor,
        jobs=jobs,
    )
    _record_rows(metrics, config.coin.value, rows)
    exceptional = geometry.dimension == 2 and is_exceptional(cluster)
    if exceptional:
        logger.info(f"{cluster} is an exceptional configuration for the AKR coin")
    table = family_csv(rows, exceptional)
    if config.out:
        atomic_write_text(Path(config.out) / f"compare_{cluster.slug}.csv", table)
    else:
        sys.stdout.write(table)
    return rows


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = load_settings()
        setup_logging(
            "lackwalk",
            level=args.log_level or settings.log_level,
            json_format=(args.log_format or settings.log_format) == "json",
        )
        config = resolve_config(args, settings)
        jobs = resolve_jobs(args.jobs, settings)
    except ValueError as e:
        sys.stderr.write(f"lackwalk: error: {e}\n")
        return EXIT_CONFIG

    metrics = SimulationMetrics()
    try:
        if args.command == "run":
            cmd_run(config, metrics, embed_trace=args.embed_trace)
        elif args.command == "sweep":
            cmd_sweep(config, metrics, jobs)
        elif args.command == "scale":
            cmd_scale(config, metrics, jobs)
        else:
            cmd_compare(config, metrics, jobs)
        if args.metrics:
            metrics.write(args.metrics)
    except ConfigError as e:
        sys.stderr.write(f"lackwalk: error: {e}\n")
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("Command failed")
        sys.stderr.write(f"lackwalk: runtime error: {e}\n")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
