"""Passage times and geodesics on the square, tube, torus and cylinders.

All geometries reduce to one primitive: multi-source Dijkstra on a
rectangular block of lattice vertices, optionally wrapped in one or both
directions (the tube and torus quotients).  Geodesics on wrapped graphs are
reported *lifted* to the plane, starting from the representative of the
source vertex inside the block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .env import HORIZONTAL, VERTICAL, Edge, Environment, Mode, Vertex
from .errors import InvalidParameter, WindowOverflow

TIE_BREAK = "lexicographic(time, hops, vertex-index)"


@dataclass(frozen=True)
class Square:
    """B(n) = [0, n]^2 with edge set E(n)."""

    n: int


@dataclass(frozen=True)
class Cylinder:
    """[0, n] x [y_offset, y_offset + K]."""

    n: int
    K: int
    y_offset: int = 0


@dataclass(frozen=True)
class TubeQuotient:
    """{0..n} x Z_n: the strip S(n) with period-n vertical identification."""

    n: int


@dataclass(frozen=True)
class TorusWinding:
    """Z_n x Z_n, the doubly identified square."""

    n: int


@dataclass(frozen=True)
class Window:
    """Planar rectangle [x0, x1] x [y0, y1] without identification."""

    x0: int
    x1: int
    y0: int
    y1: int


RegionSpec = Union[Square, Cylinder, TubeQuotient, TorusWinding, Window]


@dataclass(frozen=True)
class GeodesicResult:
    time: float
    path: tuple
    source: Vertex
    target: Vertex
    target_set: str = "point"
    tie_break: str = TIE_BREAK

    @property
    def hops(self) -> int:
        return len(self.path) - 1


@dataclass(frozen=True)
class SpanReport:
    vertical_span: int
    x0: Vertex


@dataclass
class _Grid:
    x0: int
    y0: int
    wh: np.ndarray
    wv: np.ndarray
    wrapx: bool = False
    wrapy: bool = False

    @property
    def shape(self):
        return self.wh.shape

    def index(self, i, j):
        return i * self.wh.shape[1] + j

    def column(self, i):
        ny = self.wh.shape[1]
        return np.arange(i * ny, (i + 1) * ny, dtype=np.int64)

    def row(self, j):
        nx, ny = self.wh.shape
        return np.arange(nx, dtype=np.int64) * ny + j


def _check_n(n, lo=1):
    if isinstance(n, bool) or int(n) != n or n < lo:
        raise InvalidParameter(f"size parameter must be an integer >= {lo}, got {n!r}")


def _edge_weights(env: Environment, x0, y0, nx, ny, d):
    ii, jj = np.meshgrid(np.arange(nx, dtype=np.int64), np.arange(ny, dtype=np.int64), indexing="ij")
    w = env.weights(ii.ravel() + x0, jj.ravel() + y0, np.full(nx * ny, d, dtype=np.int64))
    return w.reshape(nx, ny)


def _rectangle(env, x0, y0, nx, ny) -> _Grid:
    wh = _edge_weights(env, x0, y0, nx, ny, HORIZONTAL)
    wv = _edge_weights(env, x0, y0, nx, ny, VERTICAL)
    wh[nx - 1, :] = np.inf
    wv[:, ny - 1] = np.inf
    return _Grid(x0, y0, wh, wv)


def _require_periodic(env: Environment, n: int):
    if env.mode is Mode.UNIT:
        return
    if env.mode is not Mode.PERIODIC or env.n != n:
        raise InvalidParameter(f"need a periodic environment with period {n}, got {env.mode.value} (n={env.n})")


def build_grid(env: Environment, region: RegionSpec) -> _Grid:
    if isinstance(region, Square):
        _check_n(region.n)
        return _rectangle(env, 0, 0, region.n + 1, region.n + 1)
    if isinstance(region, Cylinder):
        _check_cylinder(region.n, region.K)
        return _rectangle(env, 0, region.y_offset, region.n + 1, region.K + 1)
    if isinstance(region, Window):
        if region.x1 < region.x0 or region.y1 < region.y0:
            raise InvalidParameter(f"empty window {region}")
        return _rectangle(env, region.x0, region.y0, region.x1 - region.x0 + 1, region.y1 - region.y0 + 1)
    if isinstance(region, TubeQuotient):
        n = region.n
        _check_n(n)
        _require_periodic(env, n)
        wh = _edge_weights(env, 0, 0, n + 1, n, HORIZONTAL)
        wh[n, :] = np.inf
        wv = _edge_weights(env, 0, 0, n + 1, n, VERTICAL)
        return _Grid(0, 0, wh, wv, wrapx=False, wrapy=True)
    if isinstance(region, TorusWinding):
        n = region.n
        _check_n(n)
        _require_periodic(env, n)
        wh = _edge_weights(env, 0, 0, n, n, HORIZONTAL)
        wv = _edge_weights(env, 0, 0, n, n, VERTICAL)
        return _Grid(0, 0, wh, wv, wrapx=True, wrapy=True)
    raise InvalidParameter(f"unknown region {region!r}")


_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _run(grid: _Grid, sources, target_mask, guard_mask=None, stop=True):
    nv = grid.wh.size
    if guard_mask is None:
        guard_mask = np.zeros(nv, dtype=np.bool_)
    return _kernels.grid_dijkstra(
        grid.wh, grid.wv, grid.wrapx, grid.wrapy,
        np.ascontiguousarray(sources, dtype=np.int64),
        np.ascontiguousarray(target_mask, dtype=np.bool_),
        np.ascontiguousarray(guard_mask, dtype=np.bool_),
        stop,
    )


def _trace(grid: _Grid, pred, pred_dir, v) -> tuple:
    dirs = []
    while pred[v] >= 0:
        dirs.append(pred_dir[v])
        v = pred[v]
    ny = grid.wh.shape[1]
    i, j = divmod(int(v), ny)
    x, y = grid.x0 + i, grid.y0 + j
    path = [Vertex(x, y)]
    for k in reversed(dirs):
        dx, dy = _STEPS[k]
        x += dx
        y += dy
        path.append(Vertex(x, y))
    return tuple(path)


def _result(grid, out, target_set) -> GeodesicResult:
    dist, _hops, pred, pred_dir, hit, _guard = out
    if hit < 0:
        raise RuntimeError("target set unreachable; region graph is disconnected")
    path = _trace(grid, pred, pred_dir, hit)
    return GeodesicResult(float(dist[hit]), path, path[0], path[-1], target_set)


def _vertex_index(grid: _Grid, region, v) -> int:
    x, y = int(v[0]), int(v[1])
    nx, ny = grid.shape
    i, j = x - grid.x0, y - grid.y0
    if not (0 <= i < nx and 0 <= j < ny):
        raise InvalidParameter(f"vertex {(x, y)} lies outside {region}")
    return grid.index(i, j)


def point_to_point(env: Environment, region: RegionSpec, x, y) -> GeodesicResult:
    """Minimal passage time between two vertices of ``region``.

    Vertices of quotient regions are given by their representatives
    (x in [0, n], y in [0, n) for the tube; both in [0, n) for the torus).
    """
    grid = build_grid(env, region)
    s = _vertex_index(grid, region, x)
    t = _vertex_index(grid, region, y)
    mask = np.zeros(grid.wh.size, dtype=np.bool_)
    mask[t] = True
    return _result(grid, _run(grid, [s], mask), "point")


def _side_to_side(grid: _Grid, label: str) -> GeodesicResult:
    nx = grid.shape[0]
    mask = np.zeros(grid.wh.size, dtype=np.bool_)
    mask[grid.column(nx - 1)] = True
    return _result(grid, _run(grid, grid.column(0), mask), label)


def square_time(env: Environment, n: int) -> GeodesicResult:
    """Left-to-right crossing time of B(n) using i.i.d. weights on E(n)."""
    _check_n(n)
    if env.mode is Mode.PERIODIC:
        raise InvalidParameter("square_time needs an i.i.d. (or unit) environment")
    return _side_to_side(build_grid(env, Square(n)), "right side of B(n)")


def restricted_square_time(env: Environment, n: int, variant: int) -> GeodesicResult:
    """The three restricted square crossings whose minimum bounds T_n^sq below.

    1: left to right, no edge with both endpoints on the top row y = n;
    2: left to right, no edge with both endpoints on the bottom row y = 0;
    3: bottom to top, no edge with both endpoints on the right column x = n.
    """
    _check_n(n)
    if env.mode is Mode.PERIODIC:
        raise InvalidParameter("restricted_square_time needs an i.i.d. (or unit) environment")
    grid = build_grid(env, Square(n))
    mask = np.zeros(grid.wh.size, dtype=np.bool_)
    if variant == 1:
        grid.wh[:, n] = np.inf
        mask[grid.column(n)] = True
        sources = grid.column(0)
    elif variant == 2:
        grid.wh[:, 0] = np.inf
        mask[grid.column(n)] = True
        sources = grid.column(0)
    elif variant == 3:
        grid.wv[n, :] = np.inf
        mask[grid.row(n)] = True
        sources = grid.row(0)
    else:
        raise InvalidParameter(f"variant must be 1, 2 or 3, got {variant!r}")
    return _result(grid, _run(grid, sources, mask), f"restricted square variant {variant}")


def tube_time(env: Environment, n: int) -> GeodesicResult:
    """Crossing time of the tube via the quotient cylinder {0..n} x Z_n."""
    _check_n(n)
    return _side_to_side(build_grid(env, TubeQuotient(n)), "right side of S(n)")


def torus_time(env: Environment, n: int, window_factor: float = 2, max_retries: int = 4) -> GeodesicResult:
    """min over m of T^(n)((0, m), (n, m)) using certified planar windows.

    The window [-w, n+w] x [m-w, m+w] is accepted only if the target is
    settled before any window-boundary vertex; then every path leaving the
    window costs at least the returned time.  Otherwise w doubles.
    """
    _check_n(n)
    _require_periodic(env, n)
    if window_factor <= 0:
        raise InvalidParameter("window_factor must be positive")
    best = None
    for m in range(n):
        w = max(1, int(np.ceil(window_factor * n)))
        for attempt in range(max_retries + 1):
            region = Window(-w, n + w, m - w, m + w)
            grid = build_grid(env, region)
            nx, ny = grid.shape
            guard = np.zeros(grid.wh.size, dtype=np.bool_)
            guard[grid.column(0)] = True
            guard[grid.column(nx - 1)] = True
            guard[grid.row(0)] = True
            guard[grid.row(ny - 1)] = True
            target = np.zeros(grid.wh.size, dtype=np.bool_)
            target[grid.index(n + w, w)] = True
            out = _run(grid, [grid.index(w, w)], target, guard)
            if not out[5]:
                res = _result(grid, out, "source + n e1")
                if best is None or res.time < best.time:
                    best = res
                break
            if attempt == max_retries:
                raise WindowOverflow(m, w)
            w *= 2
    return best


def _check_cylinder(n, K):
    _check_n(n)
    if isinstance(K, bool) or int(K) != K or not 0 <= K <= n - 1:
        raise InvalidParameter(f"cylinder height K must satisfy 0 <= K <= n-1, got K={K!r}, n={n}")


def cylinder_time(env: Environment, n: int, K: int, y_offset: int = 0) -> GeodesicResult:
    """Left-to-right crossing time of [0, n] x [y_offset, y_offset + K]."""
    _check_cylinder(n, K)
    return _side_to_side(build_grid(env, Cylinder(n, K, y_offset)), "right side of cylinder")


def cylinder_arrival_times(env: Environment, n: int, K: int, y_offset: int = 0) -> np.ndarray:
    """T_{n,K}(y) for every vertex y, as an (n+1, K+1) array indexed [x, y - y_offset]."""
    _check_cylinder(n, K)
    grid = build_grid(env, Cylinder(n, K, y_offset))
    none = np.zeros(grid.wh.size, dtype=np.bool_)
    out = _run(grid, grid.column(0), none, stop=False)
    return out[0].reshape(grid.shape)


def vertical_span(g: GeodesicResult) -> SpanReport:
    if not g.path:
        raise InvalidParameter("empty path")
    x0 = g.path[0]
    return SpanReport(max(abs(v.y - x0.y) for v in g.path), x0)


def path_weight(env: Environment, path) -> float:
    """Sum of edge weights along ``path`` (planar, possibly lifted, coordinates)."""
    if len(path) < 2:
        return 0.0
    edges = [Edge.between(u, v) for u, v in zip(path[:-1], path[1:])]
    xs, ys, ds = zip(*edges)
    return float(np.sum(env.weights(np.array(xs), np.array(ys), np.array(ds))))


def is_self_avoiding(path) -> bool:
    return len(set(map(tuple, path))) == len(path)
