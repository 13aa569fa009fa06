"""
Dense reference evolution.

Builds the full ((d+1)N) x ((d+1)N) step matrix by explicit Kronecker
products and evolves small instances by matrix-vector products. It shares
no kernel code with `lackwalk.operators`: the shift is assembled from
`neighbor()` one basis vector at a time, so agreement between the two is a
meaningful check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from lackwalk.lattice import (
    CoinFamily,
    CoinSpec,
    LatticeGeometry,
    WalkState,
    coin_state,
    neighbor,
)
from lackwalk.operators import MarkedSet

logger = logging.getLogger(__name__)

MAX_DENSE_DIMENSION = 512

__all__ = [
    "MAX_DENSE_DIMENSION",
    "DenseInstanceTooLarge",
    "DenseUnitary",
    "build_dense_step",
    "dense_evolve",
]


class DenseInstanceTooLarge(ValueError):
    """Instance exceeds the dense reference cap."""


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    """Explicit step matrix U = S · C with the configuration it was built for."""

    entries: NDArray[np.float64]
    geometry: LatticeGeometry
    spec: CoinSpec
    marked: MarkedSet

    @property
    def dimension(self) -> int:
        return int(self.entries.shape[0])

    def orthogonality_error(self) -> float:
        """Max-norm of U^T U - I."""
        gram = self.entries.T @ self.entries
        return float(np.max(np.abs(gram - np.eye(self.dimension))))


def _shift_matrix(geometry: LatticeGeometry) -> NDArray[np.float64]:
    coin = geometry.coin_size
    shift = np.zeros((geometry.state_size, geometry.state_size))
    for v in range(geometry.vertex_count):
        for direction in geometry.directions:
            target = neighbor(geometry, v, direction)
            shift[target * coin + direction.opposite.value, v * coin + direction.value] = 1.0
        loop = v * coin + geometry.loop_index
        shift[loop, loop] = 1.0
    return shift


def _coin_matrix(
    geometry: LatticeGeometry, spec: CoinSpec, marked: MarkedSet
) -> NDArray[np.float64]:
    n = geometry.vertex_count
    coin = geometry.coin_size
    psi = coin_state(geometry.degree, spec.loop_weight)
    grover = 2.0 * np.outer(psi, psi) - np.eye(coin)

    projector = np.zeros((n, n))
    for v in marked.indices(geometry):
        projector[v, v] = 1.0
    identity_v = np.eye(n)

    if spec.family is CoinFamily.G:
        loop = np.zeros((coin, coin))
        loop[geometry.loop_index, geometry.loop_index] = 1.0
        oracle = np.eye(n * coin) - 2.0 * np.kron(projector, loop)
        return np.kron(identity_v, grover) @ oracle
    if spec.family is CoinFamily.AKR:
        return np.kron(identity_v - 2.0 * projector, grover)
    return np.kron(identity_v - projector, grover) - np.kron(projector, np.eye(coin))


def build_dense_step(
    geometry: LatticeGeometry, spec: CoinSpec, marked: MarkedSet
) -> DenseUnitary:
    """Assemble the explicit step matrix for a small instance.

    Raises:
        DenseInstanceTooLarge: If (d+1)·N exceeds MAX_DENSE_DIMENSION
    """
    if geometry.state_size > MAX_DENSE_DIMENSION:
        raise DenseInstanceTooLarge(
            f"dense reference is capped at dimension {MAX_DENSE_DIMENSION} "
            f"(instance has {geometry.state_size}); use lackwalk.search for larger lattices"
        )
    entries = _shift_matrix(geometry) @ _coin_matrix(geometry, spec, marked)
    entries.setflags(write=False)
    logger.debug(
        "Built dense step: dim=%d family=%s M=%d",
        geometry.state_size,
        spec.family.value,
        marked.size,
    )
    return DenseUnitary(entries=entries, geometry=geometry, spec=spec, marked=marked)


def dense_evolve(u: DenseUnitary, state: WalkState, steps: int) -> WalkState:
    """Return U^steps |state> by repeated multiplication; the input is left untouched."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0 (got {steps})")
    if state.amplitudes.shape[0] != u.dimension:
        raise ValueError(
            f"state length {state.amplitudes.shape[0]} does not match "
            f"matrix dimension {u.dimension}"
        )
    amplitudes = state.amplitudes.copy()
    for _ in range(steps):
        amplitudes = u.entries @ amplitudes
    return WalkState(state.geometry, amplitudes)
