"""
Experiment harness: marked-cluster generators, self-loop weight sweeps,
size-scaling runs and scaling fits.

Rows inside one sweep or scaling run are independent and can be spread over
a process pool; results always come back in input order. A row that fails is
reported with status "failed" instead of aborting the batch.
"""
from __future__ import annotations

import enum
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lackwalk.lattice import CoinFamily, CoinSpec, LatticeGeometry, build_lattice
from lackwalk.operators import MarkedSet
from lackwalk.search import (
    DEFAULT_HORIZON_FACTOR,
    DEFAULT_PROMINENCE,
    default_horizon,
    run_search,
)

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_FAILED = "failed"

__all__ = [
    "ClusterSpec",
    "FamilyRow",
    "FitModel",
    "FitResult",
    "LoopWeightRule",
    "ScalingRow",
    "SweepRow",
    "compare_families",
    "fit_model",
    "fit_scaling",
    "geometric_grid",
    "is_exceptional",
    "make_marked_block",
    "make_marked_diagonal",
    "make_marked_list",
    "make_marked_run",
    "parse_weight_grid",
    "scaling_run",
    "sweep_loop_weight",
]


# --- marked-set generators -------------------------------------------------


def make_marked_block(geometry: LatticeGeometry, k: int, l: int, anchor: int = 0) -> MarkedSet:
    """k x l rectangle (k along x, l along y) whose lower-left corner is `anchor`, wrapping."""
    if geometry.dimension != 2:
        raise ValueError("block clusters need a 2D lattice")
    if k < 1 or l < 1:
        raise ValueError(f"block sides must be >= 1 (got {k}x{l})")
    if k > geometry.side or l > geometry.side:
        raise ValueError(f"block {k}x{l} does not fit a {geometry.side}x{geometry.side} lattice")
    x0, y0 = geometry.coords(anchor)
    vertices = [geometry.index(x0 + dx, y0 + dy) for dy in range(l) for dx in range(k)]
    return MarkedSet(tuple(vertices), f"block:{k}x{l}@{anchor}")


def make_marked_diagonal(geometry: LatticeGeometry) -> MarkedSet:
    """The main diagonal {(i, i)} of a square lattice."""
    if geometry.dimension != 2:
        raise ValueError("diagonal clusters need a 2D lattice")
    return MarkedSet(tuple(geometry.index(i, i) for i in range(geometry.side)), "diag")


def make_marked_run(geometry: LatticeGeometry, m: int, anchor: int = 0) -> MarkedSet:
    """m adjacent ring vertices anchor, anchor+1, ... (mod N)."""
    if geometry.dimension != 1:
        raise ValueError("run clusters need a 1D lattice")
    geometry.check_vertex(anchor)
    if not 1 <= m <= geometry.vertex_count:
        raise ValueError(f"run length must be in [1, {geometry.vertex_count}] (got {m})")
    return MarkedSet(tuple(geometry.index(anchor + i) for i in range(m)), f"run:{m}@{anchor}")


def make_marked_list(geometry: LatticeGeometry, vertices: Iterable[int]) -> MarkedSet:
    marked = MarkedSet(tuple(vertices), "list")
    if marked.size == 0:
        raise ValueError("explicit marked list is empty")
    marked.indices(geometry)
    return marked


@dataclass(frozen=True)
class ClusterSpec:
    """Textual cluster description: run:m | block:kxl | diag | list:v1,v2,..."""

    kind: str
    m: int = 0
    k: int = 0
    l: int = 0
    vertices: Tuple[int, ...] = ()

    _PATTERN = re.compile(
        r"^(?:run:(?P<m>\d+)|block:(?P<k>\d+)x(?P<l>\d+)|(?P<diag>diag)"
        r"|list:(?P<ids>\d+(?:,\d+)*))$"
    )

    @classmethod
    def parse(cls, text: str) -> "ClusterSpec":
        match = cls._PATTERN.match(text.strip().lower())
        if match is None:
            raise ValueError(
                f"cluster must be run:m, block:kxl, diag or list:v1,v2,... (got {text!r})"
            )
        if match.group("m"):
            return cls("run", m=int(match.group("m")))
        if match.group("k"):
            return cls("block", k=int(match.group("k")), l=int(match.group("l")))
        if match.group("diag"):
            return cls("diag")
        return cls("list", vertices=tuple(int(v) for v in match.group("ids").split(",")))

    def __str__(self) -> str:
        if self.kind == "run":
            return f"run:{self.m}"
        if self.kind == "block":
            return f"block:{self.k}x{self.l}"
        if self.kind == "diag":
            return "diag"
        return "list:" + ",".join(str(v) for v in self.vertices)

    @property
    def slug(self) -> str:
        """File-name friendly form, e.g. block-2x1."""
        if self.kind == "list":
            return f"list-{len(self.vertices)}"
        return str(self).replace(":", "-")

    def build(self, geometry: LatticeGeometry, anchor: int = 0) -> MarkedSet:
        if self.kind == "run":
            return make_marked_run(geometry, self.m, anchor)
        if self.kind == "block":
            return make_marked_block(geometry, self.k, self.l, anchor)
        if self.kind == "diag":
            return make_marked_diagonal(geometry)
        return make_marked_list(geometry, self.vertices)


def is_exceptional(cluster: ClusterSpec) -> bool:
    """Whether the AKR coin fails on this 2D cluster shape.

    Blocks with an even side (the 2k x l and k x 2l families) and the
    diagonal are exceptional; single vertices and odd x odd blocks are not.
    """
    if cluster.kind == "block":
        return cluster.k % 2 == 0 or cluster.l % 2 == 0
    return cluster.kind == "diag"


# --- self-loop weights -----------------------------------------------------


@dataclass(frozen=True)
class LoopWeightRule:
    """Self-loop weight as a function of N: a constant or coefficient/N."""

    coefficient: float
    per_vertex: bool = False

    @classmethod
    def parse(cls, text: Union[str, float]) -> "LoopWeightRule":
        raw = str(text).strip()
        per_vertex = raw.upper().endswith("/N")
        number = raw[:-2] if per_vertex else raw
        try:
            value = float(number)
        except ValueError:
            raise ValueError(f"loop weight must be a number or c/N (got {text!r})") from None
        if not math.isfinite(value) or value <= 0.0:
            raise ValueError(f"loop weight must be positive (got {text!r})")
        return cls(value, per_vertex)

    def value(self, vertex_count: int) -> float:
        return self.coefficient / vertex_count if self.per_vertex else self.coefficient

    def __str__(self) -> str:
        return f"{self.coefficient!r}/N" if self.per_vertex else repr(self.coefficient)


def geometric_grid(
    low: float,
    high: float,
    count: Optional[int] = None,
    points_per_decade: int = 25,
) -> List[float]:
    """Geometrically spaced values from low to high inclusive."""
    if not 0.0 < low <= high:
        raise ValueError(f"grid needs 0 < low <= high (got {low}, {high})")
    if count is None:
        count = int(round(math.log10(high / low) * points_per_decade)) + 1
    if count < 1:
        raise ValueError(f"grid needs at least one point (got {count})")
    if count == 1:
        return [float(low)]
    return [float(v) for v in np.geomspace(low, high, count)]


def parse_weight_grid(text: str, vertex_count: int, points_per_decade: int = 25) -> List[float]:
    """Weights from `lo:hi[:count]` or a comma list; each value may be written c/N."""
    text = text.strip()
    if not text:
        raise ValueError("weight grid is empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"weight range must be lo:hi or lo:hi:count (got {text!r})")
        low = LoopWeightRule.parse(parts[0]).value(vertex_count)
        high = LoopWeightRule.parse(parts[1]).value(vertex_count)
        count = int(parts[2]) if len(parts) == 3 else None
        return geometric_grid(low, high, count, points_per_decade)
    return [LoopWeightRule.parse(tok).value(vertex_count) for tok in text.split(",") if tok.strip()]


# --- rows ------------------------------------------------------------------


class SweepRow(BaseModel):
    """One self-loop weight of a sweep."""

    model_config = ConfigDict(frozen=True)

    loop_weight: float = Field(..., gt=0, description="Self-loop weight a")
    na: float = Field(..., description="N·a, the 1D reporting axis")
    t_peak: Optional[int] = None
    p_peak: Optional[float] = None
    terminated_by: Optional[str] = None
    status: str = STATUS_OK
    error: Optional[str] = None
    steps: int = 0
    seconds: float = 0.0


class ScalingRow(BaseModel):
    """One lattice size of a scaling run."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., description="Vertex count N")
    m: int = Field(..., description="Marked vertex count M")
    side: int
    cluster: str
    loop_weight: float
    t_peak: Optional[int] = None
    p_peak: Optional[float] = None
    terminated_by: Optional[str] = None
    status: str = STATUS_OK
    error: Optional[str] = None
    steps: int = 0
    seconds: float = 0.0


class FamilyRow(BaseModel):
    """One coin family of a side-by-side comparison."""

    model_config = ConfigDict(frozen=True)

    family: str
    t_peak: Optional[int] = None
    p_peak: Optional[float] = None
    terminated_by: Optional[str] = None
    status: str = STATUS_OK
    error: Optional[str] = None
    steps: int = 0
    seconds: float = 0.0


# --- batch execution -------------------------------------------------------


@dataclass(frozen=True)
class _SearchTask:
    dimension: int
    side: int
    family: CoinFamily
    loop_weight: float
    target: Union[MarkedSet, ClusterSpec]
    anchor: Tuple[int, ...] = (0,)
    horizon: Optional[int] = None
    horizon_factor: float = DEFAULT_HORIZON_FACTOR
    prominence: float = DEFAULT_PROMINENCE


@dataclass(frozen=True)
class _Outcome:
    n: int
    m: int
    t_peak: Optional[int] = None
    p_peak: Optional[float] = None
    terminated_by: Optional[str] = None
    status: str = STATUS_OK
    error: Optional[str] = None
    steps: int = 0
    seconds: float = 0.0


def _execute(task: _SearchTask) -> _Outcome:
    n = task.side**task.dimension
    m = 0
    try:
        geometry = build_lattice(task.dimension, task.side)
        if isinstance(task.target, ClusterSpec):
            marked = task.target.build(geometry, geometry.index(*task.anchor))
        else:
            marked = task.target
        m = marked.size
        result = run_search(
            geometry,
            CoinSpec(task.family, task.loop_weight),
            marked,
            horizon=task.horizon,
            prominence=task.prominence,
            horizon_factor=task.horizon_factor,
        )
    except Exception as e:
        logger.error(
            f"Search failed (N={n}, family={task.family.value}, "
            f"a={task.loop_weight!r}): {e}",
            exc_info=True,
        )
        return _Outcome(n=n, m=m, status=STATUS_FAILED, error=str(e))

    logger.info(
        "Search finished",
        extra={
            "extra": {
                "n": n,
                "m": m,
                "family": task.family.value,
                "loop_weight": task.loop_weight,
                "t_peak": result.peak.t_peak,
                "p_peak": result.peak.p_peak,
                "terminated_by": result.peak.terminated_by.value,
                "steps": result.steps,
                "seconds": round(result.seconds, 6),
            }
        },
    )
    return _Outcome(
        n=n,
        m=m,
        t_peak=result.peak.t_peak,
        p_peak=result.peak.p_peak,
        terminated_by=result.peak.terminated_by.value,
        steps=result.steps,
        seconds=result.seconds,
    )


def _run_tasks(tasks: Sequence[_SearchTask], jobs: int = 1) -> List[_Outcome]:
    """Execute tasks, in a process pool when jobs > 1; output follows input order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_execute(task) for task in tasks]
    workers = min(jobs, len(tasks))
    logger.debug("Dispatching %d searches to %d workers", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, tasks))


def sweep_loop_weight(
    geometry: LatticeGeometry,
    family: Union[CoinFamily, str],
    marked: MarkedSet,
    weights: Sequence[float],
    horizon: Optional[int] = None,
    prominence: float = DEFAULT_PROMINENCE,
    horizon_factor: float = DEFAULT_HORIZON_FACTOR,
    jobs: int = 1,
) -> List[SweepRow]:
    """One first-peak search per self-loop weight, rows in input order.

    Without a fixed `horizon` every weight gets its own `default_horizon`, so
    small weights are not cut off before their first peak.

    Raises:
        ValueError: If the weight list is empty, not positive or not ascending
    """
    family = CoinFamily(family)
    if not weights:
        raise ValueError("weight grid is empty")
    if any(not math.isfinite(w) or w <= 0.0 for w in weights):
        raise ValueError("weights must be positive")
    if any(b < a for a, b in zip(weights, weights[1:])):
        raise ValueError("weights must be sorted ascending")
    marked.indices(geometry)

    tasks = [
        _SearchTask(
            dimension=geometry.dimension,
            side=geometry.side,
            family=family,
            loop_weight=float(w),
            target=marked,
            horizon=horizon,
            horizon_factor=horizon_factor,
            prominence=prominence,
        )
        for w in weights
    ]
    outcomes = _run_tasks(tasks, jobs)
    n = geometry.vertex_count
    return [
        SweepRow(
            loop_weight=task.loop_weight,
            na=task.loop_weight * n,
            t_peak=out.t_peak,
            p_peak=out.p_peak,
            terminated_by=out.terminated_by,
            status=out.status,
            error=out.error,
            steps=out.steps,
            seconds=out.seconds,
        )
        for task, out in zip(tasks, outcomes)
    ]


def scaling_run(
    family: Union[CoinFamily, str],
    dimension: int,
    sides: Sequence[int],
    cluster: ClusterSpec,
    loop_weight: LoopWeightRule,
    horizon: Optional[int] = None,
    prominence: float = DEFAULT_PROMINENCE,
    horizon_factor: float = DEFAULT_HORIZON_FACTOR,
    anchor: Tuple[int, ...] = (0,),
    jobs: int = 1,
) -> List[ScalingRow]:
    """One first-peak search per lattice side (N = side in 1D, side² in 2D).

    The self-loop weight is re-evaluated from `loop_weight` for every N and the
    horizon follows `default_horizon` unless a fixed one is given.

    Raises:
        ValueError: If `sides` is empty or not ascending
    """
    family = CoinFamily(family)
    if not sides:
        raise ValueError("size list is empty")
    if any(b <= a for a, b in zip(sides, sides[1:])):
        raise ValueError("sizes must be strictly ascending")

    tasks = []
    for side in sides:
        n = side**dimension
        tasks.append(
            _SearchTask(
                dimension=dimension,
                side=int(side),
                family=family,
                loop_weight=loop_weight.value(n),
                target=cluster,
                anchor=tuple(anchor),
                horizon=horizon,
                horizon_factor=horizon_factor,
                prominence=prominence,
            )
        )
    outcomes = _run_tasks(tasks, jobs)
    return [
        ScalingRow(
            n=out.n,
            m=out.m,
            side=task.side,
            cluster=str(cluster),
            loop_weight=task.loop_weight,
            t_peak=out.t_peak,
            p_peak=out.p_peak,
            terminated_by=out.terminated_by,
            status=out.status,
            error=out.error,
            steps=out.steps,
            seconds=out.seconds,
        )
        for task, out in zip(tasks, outcomes)
    ]


def compare_families(
    geometry: LatticeGeometry,
    marked: MarkedSet,
    loop_weight: float,
    horizon: Optional[int] = None,
    prominence: float = DEFAULT_PROMINENCE,
    horizon_factor: float = DEFAULT_HORIZON_FACTOR,
    jobs: int = 1,
) -> List[FamilyRow]:
    """Run G, AKR and SKW on one configuration with a shared horizon."""
    if marked.size == 0:
        raise ValueError("search needs at least one marked vertex")
    if horizon is None:
        horizon = default_horizon(geometry, marked.size, horizon_factor, loop_weight=loop_weight)
    tasks = [
        _SearchTask(
            dimension=geometry.dimension,
            side=geometry.side,
            family=family,
            loop_weight=loop_weight,
            target=marked,
            horizon=horizon,
            prominence=prominence,
        )
        for family in CoinFamily
    ]
    outcomes = _run_tasks(tasks, jobs)
    return [
        FamilyRow(
            family=task.family.value,
            t_peak=out.t_peak,
            p_peak=out.p_peak,
            terminated_by=out.terminated_by,
            status=out.status,
            error=out.error,
            steps=out.steps,
            seconds=out.seconds,
        )
        for task, out in zip(tasks, outcomes)
    ]


# --- scaling fits ----------------------------------------------------------


class FitModel(str, enum.Enum):
    POWER_LAW = "power_law"
    LINEAR_OVER_M = "linear_over_M"
    SQRT_LOG = "sqrt_log"


class FitResult(BaseModel):
    """Scaling fit of running time against problem size.

    Attributes:
        model: Fitted model.
        c: Prefactor (power law: t = c·(N/M)^beta; ratio models: mean of t/scale).
        beta: Exponent, power law only.
        residual: RMS of the log-space residuals.
        spread: max/min - 1 of the ratios, ratio models only.
        points: Rows used.
    """

    model_config = ConfigDict(frozen=True)

    model: FitModel
    c: float = Field(..., gt=0)
    beta: Optional[float] = None
    residual: float
    spread: Optional[float] = None
    points: int


def fit_model(
    ns: Sequence[float],
    ms: Sequence[float],
    times: Sequence[float],
    model: Union[FitModel, str],
) -> FitResult:
    """Fit running times to one of the scaling models.

    Raises:
        ValueError: With fewer than 3 points, non-positive times, or a model
            that is undefined for the given sizes
    """
    model = FitModel(model)
    n = np.asarray(ns, dtype=np.float64)
    m = np.asarray(ms, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    if not (n.shape == m.shape == t.shape):
        raise ValueError("ns, ms and times must have equal length")
    if t.shape[0] < 3:
        raise ValueError(f"fit needs at least 3 rows (got {t.shape[0]})")
    if np.any(t <= 0) or np.any(m <= 0) or np.any(n <= 0):
        raise ValueError("fit needs positive N, M and running times")
    ratio = n / m

    if model is FitModel.POWER_LAW:
        log_x = np.log(ratio)
        if np.ptp(log_x) == 0.0:
            raise ValueError("power-law fit needs at least two distinct N/M values")
        log_t = np.log(t)
        beta, intercept = np.polyfit(log_x, log_t, 1)
        fitted = intercept + beta * log_x
        residual = float(np.sqrt(np.mean((log_t - fitted) ** 2)))
        return FitResult(
            model=model,
            c=float(np.exp(intercept)),
            beta=float(beta),
            residual=residual,
            points=int(t.shape[0]),
        )

    if model is FitModel.LINEAR_OVER_M:
        scale = ratio
    else:
        if np.any(ratio <= 1.0):
            raise ValueError("sqrt_log model needs N/M > 1")
        scale = np.sqrt(ratio * np.log(ratio))
    r = t / scale
    c = float(np.mean(r))
    return FitResult(
        model=model,
        c=c,
        residual=float(np.sqrt(np.mean((np.log(r) - math.log(c)) ** 2))),
        spread=float(np.max(r) / np.min(r) - 1.0),
        points=int(t.shape[0]),
    )


def fit_scaling(rows: Sequence[ScalingRow], model: Union[FitModel, str]) -> FitResult:
    """Fit the successful rows of a scaling run.

    Raises:
        ValueError: If fewer than 3 usable rows remain
    """
    usable = [r for r in rows if r.status == STATUS_OK and r.t_peak and r.t_peak > 0]
    if len(usable) < 3:
        raise ValueError(f"fit needs at least 3 successful rows (got {len(usable)})")
    return fit_model(
        [r.n for r in usable],
        [r.m for r in usable],
        [float(r.t_peak or 0) for r in usable],
        model,
    )
