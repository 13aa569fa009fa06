"""
Search runs: success-probability traces and first-peak detection.

The reported running time of a search is the step of the first peak of the
success probability, i.e. the earliest local maximum that rises at least
`min_prominence` above the starting value M/N.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray

from lackwalk.lattice import CoinSpec, LatticeGeometry, WalkState, build_initial_state
from lackwalk.operators import MarkedSet, step

logger = logging.getLogger(__name__)

DEFAULT_PROMINENCE = 0.05
DEFAULT_HORIZON_FACTOR = 20.0
MIN_HORIZON = 20

__all__ = [
    "DEFAULT_HORIZON_FACTOR",
    "DEFAULT_PROMINENCE",
    "PeakResult",
    "ProbabilityTrace",
    "SearchResult",
    "Termination",
    "default_horizon",
    "evolve_trace",
    "find_first_peak",
    "run_search",
    "success_probability",
    "vertex_probabilities",
]


class Termination(str, enum.Enum):
    PEAK_FOUND = "peak_found"
    HORIZON_REACHED = "horizon_reached"


@dataclass(frozen=True)
class ProbabilityTrace:
    """Success probability p(t) for t = 0..T plus the configuration that produced it."""

    values: NDArray[np.float64]
    geometry: LatticeGeometry
    spec: CoinSpec
    marked: MarkedSet

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class PeakResult:
    t_peak: int
    p_peak: float
    terminated_by: Termination


@dataclass(frozen=True)
class SearchResult:
    """Outcome of `run_search`: the peak, the trace up to where the run stopped, timing."""

    peak: PeakResult
    trace: ProbabilityTrace
    steps: int
    seconds: float


def vertex_probabilities(state: WalkState) -> NDArray[np.float64]:
    """Probability of finding the walker at each vertex (summed over the coin)."""
    blocks = state.blocks
    return np.einsum("vc,vc->v", blocks, blocks)


def success_probability(state: WalkState, marked: MarkedSet) -> float:
    """Total probability on the marked vertices, loop component included."""
    picked = state.blocks[marked.indices(state.geometry)]
    return float(np.sum(picked * picked))


def default_horizon(
    geometry: LatticeGeometry,
    marked_count: int,
    factor: float = DEFAULT_HORIZON_FACTOR,
    loop_weight: Optional[float] = None,
) -> int:
    """Step budget: factor·ceil(N/M) in 1D, factor·ceil(sqrt((N/M) ln(N/M))) in 2D.

    Below the reference weight d·M/N the first peak moves out roughly as
    1/sqrt(a), so a `loop_weight` under it stretches the budget by
    sqrt(d·M/(N·a)). Without a weight the budget is the plain scaling rule.
    """
    if marked_count < 1:
        raise ValueError("marked_count must be >= 1")
    if loop_weight is not None and not (math.isfinite(loop_weight) and loop_weight > 0.0):
        raise ValueError(f"loop_weight must be positive (got {loop_weight})")
    ratio = geometry.vertex_count / marked_count
    if geometry.dimension == 1:
        scale = math.ceil(ratio)
    else:
        scale = math.ceil(math.sqrt(ratio * math.log(ratio))) if ratio > 1.0 else 1
    budget = factor * scale
    if loop_weight is not None:
        reference = geometry.dimension / ratio
        budget *= max(1.0, math.sqrt(reference / loop_weight))
    return max(MIN_HORIZON, int(budget))


def find_first_peak(
    trace: ProbabilityTrace, min_prominence: float = DEFAULT_PROMINENCE
) -> PeakResult:
    """Earliest t with p(t) >= p(t-1), p(t) > p(t+1) and p(t) - p(0) >= min_prominence.

    Falls back to the argmax of the trace, flagged horizon_reached, when no
    such t exists.

    Raises:
        ValueError: If the trace has fewer than 3 entries or the prominence is outside [0, 1)
    """
    if not 0.0 <= min_prominence < 1.0:
        raise ValueError(f"min_prominence must be in [0, 1) (got {min_prominence})")
    p = np.asarray(trace.values, dtype=np.float64)
    if p.shape[0] < 3:
        raise ValueError(f"trace needs at least 3 entries to hold a peak (got {p.shape[0]})")
    candidates = np.flatnonzero(
        (p[1:-1] >= p[:-2]) & (p[1:-1] > p[2:]) & (p[1:-1] - p[0] >= min_prominence)
    )
    if candidates.size:
        t = int(candidates[0]) + 1
        return PeakResult(t_peak=t, p_peak=float(p[t]), terminated_by=Termination.PEAK_FOUND)
    t = int(np.argmax(p))
    return PeakResult(t_peak=t, p_peak=float(p[t]), terminated_by=Termination.HORIZON_REACHED)


def _run(
    geometry: LatticeGeometry,
    spec: CoinSpec,
    marked: MarkedSet,
    max_steps: int,
    stop_prominence: Optional[float],
) -> List[float]:
    if marked.size == 0:
        raise ValueError("search needs at least one marked vertex")
    state = build_initial_state(geometry, spec)
    values = [success_probability(state, marked)]
    for t in range(1, max_steps + 1):
        step(state, spec, marked)
        values.append(success_probability(state, marked))
        if (
            stop_prominence is not None
            and t >= 2
            and values[t - 1] >= values[t - 2]
            and values[t - 1] > values[t]
            and values[t - 1] - values[0] >= stop_prominence
        ):
            break
    drift = abs(state.norm_squared() - 1.0)
    logger.debug("Evolved %d steps, norm drift %.3e", len(values) - 1, drift)
    return values


def evolve_trace(
    geometry: LatticeGeometry,
    spec: CoinSpec,
    marked: MarkedSet,
    max_steps: int,
) -> ProbabilityTrace:
    """Success probability over max_steps steps from the initial state (t = 0 included)."""
    if max_steps < 0:
        raise ValueError(f"max_steps must be >= 0 (got {max_steps})")
    values = _run(geometry, spec, marked, max_steps, stop_prominence=None)
    return ProbabilityTrace(np.asarray(values), geometry, spec, marked)


def run_search(
    geometry: LatticeGeometry,
    spec: CoinSpec,
    marked: MarkedSet,
    horizon: Optional[int] = None,
    prominence: float = DEFAULT_PROMINENCE,
    horizon_factor: float = DEFAULT_HORIZON_FACTOR,
) -> SearchResult:
    """Evolve until the first peak is confirmed or the horizon is reached.

    The returned peak is the one `find_first_peak` reports on the full trace
    over the same horizon; the run just stops one step past it.
    """
    if not 0.0 <= prominence < 1.0:
        raise ValueError(f"prominence must be in [0, 1) (got {prominence})")
    if horizon is None:
        horizon = default_horizon(
            geometry, max(marked.size, 1), horizon_factor, loop_weight=spec.loop_weight
        )
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2 (got {horizon})")
    started = time.perf_counter()
    values = _run(geometry, spec, marked, horizon, stop_prominence=prominence)
    trace = ProbabilityTrace(np.asarray(values), geometry, spec, marked)
    peak = find_first_peak(trace, prominence)
    seconds = time.perf_counter() - started
    return SearchResult(peak=peak, trace=trace, steps=len(values) - 1, seconds=seconds)
