"""
Result serialization: CSV tables, JSON run records, atomic file writes.

Floats are written with 17 significant digits so every double round-trips
exactly, and nothing time-dependent goes into the CSV files: rerunning a
configuration reproduces them byte for byte.
"""
import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict

from lackwalk.experiments import FamilyRow, ScalingRow, SweepRow
from lackwalk.search import PeakResult, ProbabilityTrace

logger = logging.getLogger(__name__)

SWEEP_HEADER_1D = ("a", "Na", "t_peak", "p_peak", "status")
SWEEP_HEADER_2D = ("a", "t_peak", "p_peak", "status")
SCALING_HEADER = ("N", "M", "t_peak", "p_peak", "status")
TRACE_HEADER = ("step", "probability")
FAMILY_HEADER = ("family", "t_peak", "p_peak", "terminated_by", "status", "exceptional")
PEAK_HEADER = ("t_peak", "p_peak", "terminated_by", "steps")


def format_float(value: Optional[float]) -> str:
    """17 significant digits; empty for missing values."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def _format_int(value: Optional[int]) -> str:
    return "" if value is None else str(int(value))


def _table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def sweep_csv(rows: Sequence[SweepRow], dimension: int) -> str:
    """Sweep table; the Na column is only written for the 1D ring."""
    if dimension == 1:
        return _table(
            SWEEP_HEADER_1D,
            (
                (
                    format_float(r.loop_weight),
                    format_float(r.na),
                    _format_int(r.t_peak),
                    format_float(r.p_peak),
                    r.status,
                )
                for r in rows
            ),
        )
    return _table(
        SWEEP_HEADER_2D,
        (
            (format_float(r.loop_weight), _format_int(r.t_peak), format_float(r.p_peak), r.status)
            for r in rows
        ),
    )


def scaling_csv(rows: Sequence[ScalingRow]) -> str:
    return _table(
        SCALING_HEADER,
        (
            (str(r.n), str(r.m), _format_int(r.t_peak), format_float(r.p_peak), r.status)
            for r in rows
        ),
    )


def family_csv(rows: Sequence[FamilyRow], exceptional: bool = False) -> str:
    """Comparison table; `exceptional` flags clusters the AKR coin is known to miss."""
    flag = "true" if exceptional else "false"
    return _table(
        FAMILY_HEADER,
        (
            (
                r.family,
                _format_int(r.t_peak),
                format_float(r.p_peak),
                r.terminated_by or "",
                r.status,
                flag,
            )
            for r in rows
        ),
    )


def trace_csv(trace: ProbabilityTrace) -> str:
    return _table(
        TRACE_HEADER,
        ((str(t), format_float(p)) for t, p in enumerate(trace.values.tolist())),
    )


class PeakRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_peak: int
    p_peak: float
    terminated_by: str

    @classmethod
    def from_result(cls, peak: PeakResult) -> "PeakRecord":
        return cls(t_peak=peak.t_peak, p_peak=peak.p_peak, terminated_by=peak.terminated_by.value)


class RunRecord(BaseModel):
    """Outcome of one `run` command with everything needed to repeat it.

    Attributes:
        config: RunConfig echo (re-running it reproduces the peak exactly).
        peak: First-peak result.
        steps: Steps actually simulated.
        trace: Full probability trace, when requested.
        duration_seconds: Wall-clock time of the search.
        version: lackwalk version that produced the record.
    """

    model_config = ConfigDict(frozen=True)

    config: Dict[str, Any]
    peak: PeakRecord
    steps: int
    trace: Optional[List[float]] = None
    duration_seconds: float
    version: str

    def to_csv(self) -> str:
        return _table(
            PEAK_HEADER,
            [
                (
                    str(self.peak.t_peak),
                    format_float(self.peak.p_peak),
                    self.peak.terminated_by,
                    str(self.steps),
                )
            ],
        )


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write through a temp file in the target directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    logger.debug("Wrote %s (%d bytes)", path, len(text))
    return path
