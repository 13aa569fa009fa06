"""
Search operators acting on a WalkState.

One search step is U = S · C, with the coin C chosen by the coin family:

    G    loop oracle, then Grover diffusion on every vertex
    AKR  full coin-block sign flip at marked vertices, then diffusion
    SKW  diffusion at unmarked vertices, -I at marked vertices

and S the flip-flop shift. All operators mutate the state in place and
return it.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from lackwalk.lattice import (
    CoinDirection,
    CoinFamily,
    CoinSpec,
    LatticeGeometry,
    WalkState,
    coin_state,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MarkedSet",
    "apply_akr_oracle",
    "apply_flipflop_shift",
    "apply_grover_diffusion",
    "apply_loop_oracle",
    "apply_skw_coin",
    "shift_permutation",
    "step",
    "translate_state",
]


@dataclass(frozen=True)
class MarkedSet:
    """Ordered set of marked vertex ids.

    Attributes:
        vertices: Distinct vertex ids in generation order.
        provenance: How the set was produced, e.g. "block:2x1@0", "diag", "run:3@8", "list".
    """

    vertices: Tuple[int, ...]
    provenance: str = "list"

    def __post_init__(self) -> None:
        vertices = tuple(int(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise ValueError("marked vertices must be distinct")
        object.__setattr__(self, "vertices", vertices)

    @classmethod
    def of(cls, vertices: Iterable[int], provenance: str = "list") -> "MarkedSet":
        return cls(tuple(vertices), provenance)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def indices(self, geometry: LatticeGeometry) -> NDArray[np.intp]:
        """Vertex ids as an index array, validated against `geometry`."""
        return _validated_indices(self.vertices, geometry.vertex_count)

    def translated(self, geometry: LatticeGeometry, shift: Sequence[int]) -> "MarkedSet":
        """The same set moved by a lattice vector (periodic)."""
        dx = int(shift[0])
        dy = int(shift[1]) if len(shift) > 1 else 0
        if geometry.dimension == 1 and dy:
            raise ValueError("1D lattice has no y translation")
        moved = []
        for v in self.vertices:
            coords = geometry.coords(v)
            if geometry.dimension == 1:
                moved.append(geometry.index(coords[0] + dx))
            else:
                moved.append(geometry.index(coords[0] + dx, coords[1] + dy))
        return MarkedSet(tuple(moved), f"{self.provenance}+({dx},{dy})")


@functools.lru_cache(maxsize=256)
def _validated_indices(vertices: Tuple[int, ...], vertex_count: int) -> NDArray[np.intp]:
    idx = np.asarray(vertices, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= vertex_count):
        bad = [v for v in vertices if not 0 <= v < vertex_count]
        raise ValueError(f"marked vertex {bad[0]} outside [0, {vertex_count})")
    idx.setflags(write=False)
    return idx


def apply_loop_oracle(state: WalkState, marked: MarkedSet) -> WalkState:
    """Negate the self-loop amplitude at every marked vertex."""
    idx = marked.indices(state.geometry)
    state.blocks[idx, state.geometry.loop_index] *= -1.0
    return state


def apply_akr_oracle(state: WalkState, marked: MarkedSet) -> WalkState:
    """Negate the whole coin block at every marked vertex."""
    idx = marked.indices(state.geometry)
    state.blocks[idx] *= -1.0
    return state


def apply_grover_diffusion(state: WalkState, spec: CoinSpec) -> WalkState:
    """Reflect every coin block about |psi_c>: b -> 2<psi_c|b> psi_c - b."""
    psi = coin_state(state.geometry.degree, spec.loop_weight)
    blocks = state.blocks
    # Row-wise products keep each vertex's arithmetic identical wherever it sits.
    overlap = (blocks * psi).sum(axis=1)
    np.subtract(np.multiply.outer(2.0 * overlap, psi), blocks, out=blocks)
    return state


def apply_skw_coin(state: WalkState, spec: CoinSpec, marked: MarkedSet) -> WalkState:
    """Grover diffusion at unmarked vertices, -I at marked vertices."""
    idx = marked.indices(state.geometry)
    saved = state.blocks[idx]
    apply_grover_diffusion(state, spec)
    state.blocks[idx] = -saved
    return state


@functools.lru_cache(maxsize=32)
def shift_permutation(geometry: LatticeGeometry) -> NDArray[np.intp]:
    """Gather indices of the flip-flop shift: new = old[perm].

    Amplitude at (X+, v) moves to (X-, v + x), (X-, v) to (X+, v - x), the
    same for Y, and the loop stays put. S is an involution, so perm is its
    own inverse.
    """
    side = geometry.side
    coin = geometry.coin_size
    vertices = np.arange(geometry.vertex_count, dtype=np.intp)
    x = vertices % side
    y = vertices // side if geometry.dimension == 2 else np.zeros_like(vertices)

    def vertex(xs: NDArray[np.intp], ys: NDArray[np.intp]) -> NDArray[np.intp]:
        if geometry.dimension == 1:
            return xs % side
        return (ys % side) * side + (xs % side)

    # Destination (X-, w) is fed by (X+, w - x); destination (X+, w) by (X-, w + x).
    sources = {
        CoinDirection.X_MINUS: vertex(x - 1, y),
        CoinDirection.X_PLUS: vertex(x + 1, y),
        CoinDirection.Y_MINUS: vertex(x, y - 1),
        CoinDirection.Y_PLUS: vertex(x, y + 1),
    }
    perm = np.empty(geometry.state_size, dtype=np.intp)
    blocks = perm.reshape(geometry.vertex_count, coin)
    for direction in geometry.directions:
        blocks[:, direction.value] = sources[direction] * coin + direction.opposite.value
    blocks[:, geometry.loop_index] = vertices * coin + geometry.loop_index
    perm.setflags(write=False)
    return perm


def apply_flipflop_shift(state: WalkState) -> WalkState:
    """Flip-flop shift through a double buffer (read old, write new, swap)."""
    perm = shift_permutation(state.geometry)
    target = state.scratch()
    np.take(state.amplitudes, perm, out=target)
    state.swap_in(target)
    return state


def step(state: WalkState, spec: CoinSpec, marked: MarkedSet) -> WalkState:
    """One search step U = S · C for the coin family in `spec`.

    Raises:
        ValueError: If `marked` is empty or holds vertices outside the lattice
    """
    if marked.size == 0:
        raise ValueError("search needs at least one marked vertex")
    marked.indices(state.geometry)
    if spec.family is CoinFamily.G:
        apply_loop_oracle(state, marked)
        apply_grover_diffusion(state, spec)
    elif spec.family is CoinFamily.AKR:
        apply_akr_oracle(state, marked)
        apply_grover_diffusion(state, spec)
    else:
        apply_skw_coin(state, spec, marked)
    return apply_flipflop_shift(state)


def translate_state(state: WalkState, shift: Sequence[int]) -> WalkState:
    """New state with every coin block moved by a lattice vector (periodic)."""
    geometry = state.geometry
    dx = int(shift[0])
    dy = int(shift[1]) if len(shift) > 1 else 0
    if geometry.dimension == 1:
        if dy:
            raise ValueError("1D lattice has no y translation")
        moved = np.roll(state.blocks, dx, axis=0)
    else:
        grid = state.blocks.reshape(geometry.side, geometry.side, geometry.coin_size)
        moved = np.roll(grid, (dy, dx), axis=(0, 1))
    return WalkState(geometry, moved.reshape(-1).copy())
