"""
Lattice geometry, coin/vertex indexing and the walk state container.

The walk lives on the space coin ⊗ vertex of a periodic 1D ring or 2D square
torus. Every vertex carries d+1 real coin amplitudes (d edge directions plus
one self-loop), stored vertex-major with the loop component last:

    amplitudes[v * (d + 1) + c]

Amplitudes are real: the initial state, the Grover diffusion, the sign-flip
oracles and the flip-flop shift all have real matrix elements, so a real
state stays real under every operator in this package.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "CoinDirection",
    "CoinFamily",
    "CoinSpec",
    "LatticeGeometry",
    "WalkState",
    "build_initial_state",
    "build_lattice",
    "coin_state",
    "neighbor",
]


class CoinDirection(enum.IntEnum):
    """Coin basis states. Values are block offsets for the edge directions."""

    X_PLUS = 0
    X_MINUS = 1
    Y_PLUS = 2
    Y_MINUS = 3
    LOOP = 4

    @property
    def opposite(self) -> "CoinDirection":
        """Direction the flip-flop shift turns this one into."""
        if self is CoinDirection.LOOP:
            return self
        return CoinDirection(self.value ^ 1)


class CoinFamily(str, enum.Enum):
    """Marked-vertex coin used by the search."""

    G = "g"
    AKR = "akr"
    SKW = "skw"


@dataclass(frozen=True)
class CoinSpec:
    """Coin family plus self-loop weight a."""

    family: CoinFamily
    loop_weight: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", CoinFamily(self.family))
        weight = float(self.loop_weight)
        if not math.isfinite(weight) or weight <= 0.0:
            raise ValueError(
                f"loop_weight must be a positive finite number (got {self.loop_weight})"
            )
        object.__setattr__(self, "loop_weight", weight)


@dataclass(frozen=True)
class LatticeGeometry:
    """Periodic lattice: a ring of `side` vertices or a `side` x `side` torus."""

    dimension: int
    side: int

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2 (got {self.dimension})")
        if self.side < 2:
            raise ValueError(f"side must be >= 2 (got {self.side})")

    @property
    def degree(self) -> int:
        return 2 * self.dimension

    @property
    def coin_size(self) -> int:
        return self.degree + 1

    @property
    def loop_index(self) -> int:
        return self.degree

    @property
    def vertex_count(self) -> int:
        return self.side**self.dimension

    @property
    def state_size(self) -> int:
        return self.coin_size * self.vertex_count

    @property
    def directions(self) -> Tuple[CoinDirection, ...]:
        """Edge directions available on this lattice, in block order."""
        return tuple(CoinDirection(i) for i in range(self.degree))

    def coin_offset(self, direction: CoinDirection) -> int:
        """Position of `direction` inside a vertex coin block."""
        if direction is CoinDirection.LOOP:
            return self.loop_index
        if direction.value >= self.degree:
            raise ValueError(f"{direction.name} is not a direction of a {self.dimension}D lattice")
        return int(direction.value)

    def index(self, x: int, y: int = 0) -> int:
        """Vertex id of coordinates (x, y); index = y * side + x."""
        if self.dimension == 1:
            if y != 0:
                raise ValueError("1D lattice has no y coordinate")
            return x % self.side
        return (y % self.side) * self.side + (x % self.side)

    def coords(self, vertex: int) -> Tuple[int, ...]:
        """Coordinates of a vertex id: (x,) in 1D, (x, y) in 2D."""
        self.check_vertex(vertex)
        if self.dimension == 1:
            return (vertex,)
        return (vertex % self.side, vertex // self.side)

    def check_vertex(self, vertex: int) -> None:
        if not 0 <= vertex < self.vertex_count:
            raise ValueError(f"vertex {vertex} outside [0, {self.vertex_count})")


def build_lattice(dimension: int, side: int) -> LatticeGeometry:
    """Build a periodic lattice geometry.

    Args:
        dimension: 1 (ring) or 2 (square torus)
        side: Vertices per axis, at least 2

    Returns:
        Validated geometry

    Raises:
        ValueError: If dimension is not 1 or 2, or side < 2
    """
    return LatticeGeometry(dimension=int(dimension), side=int(side))


def neighbor(geometry: LatticeGeometry, vertex: int, direction: CoinDirection) -> int:
    """Periodic neighbor of `vertex` along an edge direction.

    The self-loop is not an edge to another vertex and is rejected; the shift
    keeps loop amplitude in place on its own.
    """
    direction = CoinDirection(direction)
    if direction is CoinDirection.LOOP:
        raise ValueError("LOOP has no neighbor; the shift leaves loop amplitude in place")
    geometry.coin_offset(direction)
    coords = geometry.coords(vertex)
    x = coords[0]
    y = coords[1] if geometry.dimension == 2 else 0
    if direction is CoinDirection.X_PLUS:
        x += 1
    elif direction is CoinDirection.X_MINUS:
        x -= 1
    elif direction is CoinDirection.Y_PLUS:
        y += 1
    else:
        y -= 1
    return geometry.index(x, y)


@functools.lru_cache(maxsize=64)
def _coin_state_cached(degree: int, loop_weight: float) -> NDArray[np.float64]:
    psi = np.ones(degree + 1, dtype=np.float64)
    psi[degree] = math.sqrt(loop_weight)
    psi /= math.sqrt(degree + loop_weight)
    psi.setflags(write=False)
    return psi


def coin_state(degree: int, loop_weight: float) -> NDArray[np.float64]:
    """Weighted uniform coin state |psi_c> of length degree + 1.

    Edge components are 1/sqrt(d+a) and the loop component sqrt(a)/sqrt(d+a).
    The returned array is shared and read-only.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1 (got {degree})")
    if not math.isfinite(loop_weight) or loop_weight <= 0.0:
        raise ValueError(f"loop_weight must be a positive finite number (got {loop_weight})")
    return _coin_state_cached(int(degree), float(loop_weight))


@dataclass(eq=False)
class WalkState:
    """Amplitude vector over coin ⊗ vertex space.

    Single-writer: operators mutate `amplitudes` in place, except the shift,
    which writes into the scratch buffer and swaps it in.
    """

    geometry: LatticeGeometry
    amplitudes: NDArray[np.float64]
    _scratch: Optional[NDArray[np.float64]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.float64)
        if self.amplitudes.shape != (self.geometry.state_size,):
            raise ValueError(
                f"amplitude vector must have length {self.geometry.state_size} "
                f"(got shape {self.amplitudes.shape})"
            )

    @property
    def blocks(self) -> NDArray[np.float64]:
        """(N, d+1) view: one row of coin amplitudes per vertex."""
        return self.amplitudes.reshape(self.geometry.vertex_count, self.geometry.coin_size)

    def norm_squared(self) -> float:
        return float(np.dot(self.amplitudes, self.amplitudes))

    def copy(self) -> "WalkState":
        return WalkState(self.geometry, self.amplitudes.copy())

    def swap_in(self, target: NDArray[np.float64]) -> None:
        """Publish `target` as the new amplitudes; the old array becomes scratch."""
        self._scratch = self.amplitudes
        self.amplitudes = target

    def scratch(self) -> NDArray[np.float64]:
        if self._scratch is None or self._scratch.shape != self.amplitudes.shape:
            self._scratch = np.empty_like(self.amplitudes)
        return self._scratch


def build_initial_state(geometry: LatticeGeometry, spec: CoinSpec) -> WalkState:
    """Equal superposition |psi_c> ⊗ |psi_v> over coin and vertex space."""
    psi = coin_state(geometry.degree, spec.loop_weight)
    amplitudes = np.tile(psi / math.sqrt(geometry.vertex_count), geometry.vertex_count)
    return WalkState(geometry, amplitudes)
