"""Shared state containers, neighbor search and explicit time integration.

All per-step updates in this package are bulk-synchronous: every operation
reads one snapshot of the swarm state and produces the next one.  The
containers here are value-like (plain arrays) so snapshots can be handed
around freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np


class OrderInversionError(RuntimeError):
    """Raised when an Euler step would invert the 1D agent ordering.

    Callers treat this as "dt too large" and retry with a halved step.
    """


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator so seeded runs reproduce bitwise."""
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# State containers
# ---------------------------------------------------------------------------

@dataclass
class Swarm1D:
    """Ordered agents on a line segment [0, L].

    positions: strictly increasing, positions[0] == 0 (the origin rides on
        the leftmost agent).
    X: per-agent pseudo-coordinate, dimensionless, target range [0, 1].
    velocities: per-agent signed speed.
    beta: pseudo-coordinate boundary value carried by the rightmost agent
        (X[-1] mirrors it whenever the boundary condition is active).
    """

    positions: np.ndarray
    X: np.ndarray
    velocities: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)

    @property
    def N(self) -> int:
        return self.positions.size

    @property
    def length(self) -> float:
        return float(self.positions[-1])

    def validate(self) -> None:
        if self.positions.size < 2:
            raise ValueError("need at least 2 agents")
        if not np.all(np.diff(self.positions) > 0):
            raise ValueError("positions must be strictly increasing")
        if abs(self.positions[0]) > 0:
            raise ValueError("positions[0] must be 0")


@dataclass
class Swarm2D:
    """Planar swarm with an identified boundary chain.

    boundary_order lists agent ids along the (simple, closed) boundary
    polygon; every other agent is interior.  ``is_boundary`` is the
    per-agent role flag.
    """

    positions: np.ndarray          # (N, 2)
    R: np.ndarray                  # (N, 2) pseudo-coordinates
    velocities: np.ndarray         # (N, 2)
    boundary_order: np.ndarray     # (Nb,) agent ids, cyclic
    is_boundary: np.ndarray = field(default=None)  # (N,) bool

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.boundary_order = np.asarray(self.boundary_order, dtype=int)
        if self.is_boundary is None:
            flags = np.zeros(self.positions.shape[0], dtype=bool)
            flags[self.boundary_order] = True
            self.is_boundary = flags

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    @property
    def interior_ids(self) -> np.ndarray:
        return np.nonzero(~self.is_boundary)[0]

    def chain_positions(self) -> np.ndarray:
        return self.positions[self.boundary_order]

    def validate(self) -> None:
        ids = np.sort(self.boundary_order)
        if np.unique(ids).size != ids.size:
            raise ValueError("boundary_order repeats an agent id")
        if not np.array_equal(np.nonzero(self.is_boundary)[0], ids):
            raise ValueError("roles inconsistent with boundary_order")


@dataclass
class SimConfig:
    """Run parameters shared by the 1D and 2D experiment drivers.

    Mode-specific fields are simply unused by the other mode.  ``seed``
    fixes every random draw in a run; identical configs reproduce
    trajectories bitwise on one platform.
    """

    mode: str = "1d"                 # "1d" | "2d" | "oracle"
    N: int = 100
    seed: int = 0
    dt: float | None = None          # None -> driver default
    radius: float | None = None      # neighbor / communication radius
    kernel_width: float | None = None  # density kernel half-width d
    K: int = 1000                    # motion iterations (2D: stage 3)
    k1: int = 0                      # 2D stage-1 iterations
    k2: int = 0                      # 2D stage-2 rounds
    tolerance: float = 1e-9          # pseudo-localization stop tolerance
    max_pseudoloc_iters: int | None = None
    profile: str = "uniform"         # target density profile name
    profile_params: dict = field(default_factory=dict)
    L_star: float = 1.0              # 1D target domain length
    m_interp: int = 1000             # target-table sample count
    prelocalize: bool = True         # 1D: converge X before moving
    pseudoloc_rounds_per_step: int = 1
    # 2D geometry
    target_center: tuple = (0.6, 0.0)
    target_radius: float = 0.5
    init_boundary: str = "ellipse"
    init_params: dict = field(default_factory=dict)
    n_boundary: int = 0              # 0 -> driver picks from N
    grid_h: float = 1.0 / 64.0       # target-map grid cell size
    # 2D estimator knobs
    grad_offset: float | None = None  # finite-difference shift, None -> radius/2
    gradient_method: str = "meanshift"  # or "jacobian"
    viscous: bool = True             # include graph-Laplacian velocity diffusion
    rho_floor_factor: float = 0.1
    v_cap_factor: float = 0.1
    # output
    out_dir: str | None = None
    metrics_stride: int = 1
    snapshot_stride: int = 0
    acceptance: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.mode not in ("1d", "2d", "oracle"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.N < 3:
            raise ValueError("N must be >= 3")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")


# ---------------------------------------------------------------------------
# Neighbor search: uniform binning with cell size = radius
# ---------------------------------------------------------------------------

@dataclass
class NeighborIndex:
    """Radius graph over a point snapshot.

    adjacency[i] lists the ids j with 0 < |r_j - r_i| <= radius (self
    excluded, ties included); degrees[i] == len(adjacency[i]).  The rule is
    symmetric.  Edge arrays (edge_i, edge_j) enumerate every directed pair
    once per direction, which is what the vectorized per-agent sums in the
    2D estimators consume.
    """

    radius: float
    adjacency: list
    degrees: np.ndarray
    edge_i: np.ndarray
    edge_j: np.ndarray
    _points: np.ndarray = None
    _order: np.ndarray = None
    _sorted_keys: np.ndarray = None
    _origin: np.ndarray = None
    _ncells: np.ndarray = None

    @property
    def n_points(self) -> int:
        return self._points.shape[0]

    def query_points(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Pairs (qi, aj) with |points[qi] - p_aj| <= radius, self included."""
        points = _as_points(points)
        return _candidate_pairs(points, self._points, self.radius,
                                self._origin, self._ncells,
                                self._order, self._sorted_keys)

    def ball_count_and_sum(self, points: np.ndarray, values: np.ndarray,
                           weights: np.ndarray | None = None):
        """Counts and (weighted) value sums over the radius ball at each query point."""
        qi, aj = self.query_points(points)
        m = _as_points(points).shape[0]
        if weights is None:
            counts = np.bincount(qi, minlength=m).astype(float)
            sums = np.bincount(qi, weights=values[aj], minlength=m)
        else:
            counts = np.bincount(qi, weights=weights[aj], minlength=m)
            sums = np.bincount(qi, weights=weights[aj] * values[aj], minlength=m)
        return counts, sums


def _as_points(positions) -> np.ndarray:
    pts = np.asarray(positions, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def _cell_coords(pts, origin, radius):
    return np.floor((pts - origin) / radius).astype(np.int64)


def _keys(cells, ncells):
    # cells may run from -2 to ncells+1 after clipping; shift into a dense range
    shifted = cells + 2
    key = shifted[:, 0]
    for d in range(1, cells.shape[1]):
        key = key * (ncells[d] + 4) + shifted[:, d]
    return key


def _candidate_pairs(query, pts, radius, origin, ncells, order, sorted_keys):
    dim = pts.shape[1]
    qcells = np.clip(_cell_coords(query, origin, radius), -1, ncells)
    qi_all, aj_all = [], []
    for offset in product((-1, 0, 1), repeat=dim):
        tkeys = _keys(qcells + np.asarray(offset, dtype=np.int64), ncells)
        starts = np.searchsorted(sorted_keys, tkeys, side="left")
        ends = np.searchsorted(sorted_keys, tkeys, side="right")
        counts = ends - starts
        total = int(counts.sum())
        if total == 0:
            continue
        qi = np.repeat(np.arange(query.shape[0]), counts)
        run = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        aj = order[np.repeat(starts, counts) + run]
        qi_all.append(qi)
        aj_all.append(aj)
    if not qi_all:
        return (np.empty(0, dtype=np.int64),) * 2
    qi = np.concatenate(qi_all)
    aj = np.concatenate(aj_all)
    d2 = np.sum((query[qi] - pts[aj]) ** 2, axis=1)
    keep = d2 <= radius * radius
    return qi[keep], aj[keep]


def build_neighbor_index(positions, radius: float) -> NeighborIndex:
    """Radius-graph adjacency via uniform binning (cell size = radius).

    Deterministic: neighbor lists come out sorted by id.  Equivalent to the
    brute-force O(N^2) pairwise rule.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = _as_points(positions)
    if not np.all(np.isfinite(pts)):
        raise ValueError("positions must be finite")
    n = pts.shape[0]
    origin = pts.min(axis=0)
    ncells = np.maximum(_cell_coords(pts.max(axis=0)[None, :], origin, radius)[0] + 1, 1)
    keys = _keys(np.clip(_cell_coords(pts, origin, radius), -1, ncells), ncells)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    qi, aj = _candidate_pairs(pts, pts, radius, origin, ncells, order, sorted_keys)
    keep = qi != aj
    ei, ej = qi[keep], aj[keep]
    # sort edges by (i, j) for reproducible adjacency lists
    sort = np.lexsort((ej, ei))
    ei, ej = ei[sort], ej[sort]
    degrees = np.bincount(ei, minlength=n)
    adjacency = np.split(ej, np.cumsum(degrees)[:-1])
    return NeighborIndex(radius=float(radius), adjacency=list(adjacency),
                         degrees=degrees, edge_i=ei, edge_j=ej,
                         _points=pts, _order=order, _sorted_keys=sorted_keys,
                         _origin=origin, _ncells=ncells)


# ---------------------------------------------------------------------------
# Time integration and chain geometry
# ---------------------------------------------------------------------------

def integrate_step(state, velocities, dt: float):
    """Explicit Euler position update; returns a new state snapshot.

    For 1D states the left-to-right agent order must survive the step;
    otherwise OrderInversionError signals the caller to halve dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = np.asarray(velocities, dtype=float)
    if v.shape != state.positions.shape:
        raise ValueError("velocity shape does not match agent count")
    new_pos = state.positions + v * dt
    if isinstance(state, Swarm1D) and not np.all(np.diff(new_pos) > 0):
        raise OrderInversionError(f"agent order inverted at dt={dt}")
    return replace(state, positions=new_pos)


def polyline_arclengths(chain) -> tuple[np.ndarray, float]:
    """Cumulative arclengths s_i (s_0 = 0) and perimeter of a closed chain."""
    pts = np.asarray(chain, dtype=float)
    if pts.shape[0] < 3:
        raise ValueError("chain needs at least 3 points")
    closed = np.vstack([pts, pts[0]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    if np.any(seg == 0):
        raise ValueError("repeated consecutive chain points")
    s = np.concatenate([[0.0], np.cumsum(seg[:-1])])
    return s, float(seg.sum())
