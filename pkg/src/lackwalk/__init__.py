"""lackwalk - Lackadaisical quantum walk search on periodic lattices."""

from lackwalk.dense import DenseUnitary, build_dense_step, dense_evolve
from lackwalk.experiments import (
    ClusterSpec,
    FitModel,
    FitResult,
    compare_families,
    fit_model,
    fit_scaling,
    make_marked_block,
    make_marked_diagonal,
    make_marked_list,
    make_marked_run,
    scaling_run,
    sweep_loop_weight,
)
from lackwalk.lattice import (
    CoinDirection,
    CoinFamily,
    CoinSpec,
    LatticeGeometry,
    WalkState,
    build_initial_state,
    build_lattice,
    neighbor,
)
from lackwalk.logging import get_logger, setup_logging
from lackwalk.operators import (
    MarkedSet,
    apply_akr_oracle,
    apply_flipflop_shift,
    apply_grover_diffusion,
    apply_loop_oracle,
    apply_skw_coin,
    step,
)
from lackwalk.search import (
    PeakResult,
    ProbabilityTrace,
    Termination,
    evolve_trace,
    find_first_peak,
    run_search,
    success_probability,
)

__version__ = "0.1.0"


def get_version() -> str:
    """Installed package version from metadata."""
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as _version

    try:
        return _version("lackwalk")
    except PackageNotFoundError:
        return "0.0.0-dev"


__all__ = [
    # Lattice
    "CoinDirection",
    "CoinFamily",
    "CoinSpec",
    "LatticeGeometry",
    "WalkState",
    "build_lattice",
    "build_initial_state",
    "neighbor",
    # Operators
    "MarkedSet",
    "apply_loop_oracle",
    "apply_akr_oracle",
    "apply_grover_diffusion",
    "apply_skw_coin",
    "apply_flipflop_shift",
    "step",
    # Dense reference
    "DenseUnitary",
    "build_dense_step",
    "dense_evolve",
    # Search
    "PeakResult",
    "ProbabilityTrace",
    "Termination",
    "evolve_trace",
    "find_first_peak",
    "run_search",
    "success_probability",
    # Experiments
    "ClusterSpec",
    "FitModel",
    "FitResult",
    "make_marked_block",
    "make_marked_diagonal",
    "make_marked_run",
    "make_marked_list",
    "sweep_loop_weight",
    "scaling_run",
    "compare_families",
    "fit_model",
    "fit_scaling",
    # Logging
    "setup_logging",
    "get_logger",
    # Version
    "get_version",
]
