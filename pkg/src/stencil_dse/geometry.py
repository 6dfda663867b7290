"""Tiling geometry for the hexagonal-hybrid and rectangular-wavefront strategies.

Hexagonal hybrid tiling partitions the (t, s1) plane into hexagons of
time-height ``t_t`` with slope-1 sides; the remaining space dimensions get
classic rectangular tiles.  Hexagons come in two phases.  The *offset* phase
of band ``b`` spans times ``[b*t_t - t_t/2, b*t_t + t_t/2)`` and the *aligned*
phase spans ``[b*t_t, (b+1)*t_t)``.  A band is one wavefront of the cost
model; inside it the offset hexagons run before the aligned ones, which is
the order the legality oracle checks.

Rectangular wavefront tiling skews s1 by time (``s1 + t``) and cuts the
skewed space into ``t_t x t_s1`` boxes executed along anti-diagonals of the
(time-tile, s1-tile) grid.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import StencilKernel, Strategy, TileConfig
from .errors import DomainError, SizeError

BRUTE_FORCE_LIMIT = 10**6


def _ceil_div(a, b):
    return -(-a // b)


def hex_points(t_s1, t_t, slope=1):
    """Point count of a hexagon whose sides have the given integer slope."""
    if t_t < 2 or t_t % 2:
        raise DomainError(f"hexagon height t_t must be even and >= 2, got {t_t}")
    if t_s1 < 1:
        raise DomainError(f"t_s1 must be >= 1, got {t_s1}")
    half = t_t // 2
    return t_t * (t_s1 + 1) + 2 * slope * half * (half - 1)


def points_per_hex(t_s1, t_t):
    """Area ``t_t * (t_s1 + t_t/2)`` of the slope-1 hexagon."""
    return hex_points(t_s1, t_t, 1)


def hex_period(t_s1, t_t, slope=1):
    """Horizontal period of one hexagon phase."""
    return 2 * t_s1 + 2 + 2 * slope * (t_t // 2 - 1)


@dataclass(frozen=True)
class WavefrontSchedule:
    n_w: int
    tiles_per_wavefront: tuple
    tile_volume: int
    total_points_enumerated: int

    @property
    def n_tiles(self):
        return sum(self.tiles_per_wavefront)


def _check_dims(kernel: StencilKernel, tile: TileConfig):
    if kernel.space_dims != tile.space_dims:
        raise DomainError(
            f"tile is {tile.space_dims}D but kernel {kernel.name!r} is {kernel.space_dims}D")


def _inner_tiles(kernel, tile):
    n = _ceil_div(kernel.s2, tile.t_s2)
    if kernel.space_dims == 3:
        n *= _ceil_div(kernel.s3, tile.t_s3)
    return n


def _inner_volume(tile):
    return tile.t_s2 * (tile.t_s3 or 1)


def rect_tile_grid(kernel, tile):
    """Intersecting (time-tile, s1-tile) indices of the skewed rectangular tiling."""
    T, S1 = kernel.time_steps, kernel.s1
    c_t = _ceil_div(T, tile.t_t)
    c_1 = _ceil_div(S1 + T - 1, tile.t_s1)
    a, b = np.meshgrid(np.arange(c_t), np.arange(c_1), indexing="ij")
    t0 = a * tile.t_t
    t1 = np.minimum(t0 + tile.t_t, T) - 1
    u0 = b * tile.t_s1
    u1 = u0 + tile.t_s1 - 1
    hit = (u0 - t1 <= S1 - 1) & (u1 - t0 >= 0)
    return a[hit], b[hit]


def rect_diagonal_counts(kernel, tile):
    """Tiles per anti-diagonal ``a + b`` of ``rect_tile_grid``, without the dense grid.

    Each time tile ``a`` hits a contiguous run of s1 tiles, so a difference
    array over the diagonals is enough.
    """
    T, S1 = kernel.time_steps, kernel.s1
    c_t = _ceil_div(T, tile.t_t)
    c_1 = _ceil_div(S1 + T - 1, tile.t_s1)
    a = np.arange(c_t)
    t0 = a * tile.t_t
    t1 = np.minimum(t0 + tile.t_t, T) - 1
    lo = np.maximum(-((tile.t_s1 - 1 - t0) // tile.t_s1), 0)
    hi = np.minimum((S1 - 1 + t1) // tile.t_s1, c_1 - 1)
    diff = np.zeros(c_t + c_1 + 1, dtype=np.int64)
    np.add.at(diff, a + lo, 1)
    np.add.at(diff, a + hi + 1, -1)
    counts = np.cumsum(diff)[:c_t + c_1 - 1]
    return np.trim_zeros(counts, "b")


@functools.lru_cache(maxsize=65536)
def schedule(kernel: StencilKernel, tile: TileConfig) -> WavefrontSchedule:
    """Wavefront count, tiles per wavefront and padded point count of a tiling."""
    _check_dims(kernel, tile)
    inner = _inner_tiles(kernel, tile)
    if tile.strategy is Strategy.HEX_HYBRID:
        n_w = _ceil_div(kernel.time_steps, tile.t_t) + 1
        # both phases together place one hexagon per (t_s1 + t_t/2) columns of a band
        mean_width = tile.t_s1 + tile.t_t // 2
        per_band = _ceil_div(kernel.s1, mean_width) * inner
        counts = (per_band,) * n_w
        volume = points_per_hex(tile.t_s1, tile.t_t) * _inner_volume(tile)
    else:
        diag = rect_diagonal_counts(kernel, tile)
        if np.any(diag == 0):
            raise AssertionError("rectangular wavefront with no tiles")
        counts = tuple(int(c) * inner for c in diag)
        n_w = len(counts)
        volume = tile.t_t * tile.t_s1 * _inner_volume(tile)
    return WavefrontSchedule(n_w, counts, volume, sum(counts) * volume)


class TileId(NamedTuple):
    """Tile identity. ``step`` orders execution: lower steps finish first."""

    wavefront: int
    step: int
    position: tuple


def _hex_plane(t, s1, t_s1, t_t, slope):
    """Vectorized hexagon assignment on the (t, s1) plane.

    Returns (band, phase, column) with phase 0 = offset hexagon (runs first
    in its band) and 1 = aligned hexagon.
    """
    half = t_t // 2
    period = hex_period(t_s1, t_t, slope)
    row = t // t_t
    tau = t - row * t_t
    d = slope * np.minimum(tau, t_t - 1 - tau)
    y = s1 + d
    col = y // period
    x = y - col * period
    aligned = x < t_s1 + 1 + 2 * d
    band = np.where(aligned | (tau < half), row, row + 1)
    return band, aligned.astype(np.int64), col


def _rect_plane(t, s1, t_s1, t_t, slope):
    a = t // t_t
    b = (s1 + slope * t) // t_s1
    return a, b


def assign_tile(point, tile: TileConfig, kernel: StencilKernel, slope: int = 1) -> TileId:
    """Tile that owns an iteration point ``(t, s1, s2[, s3])``.

    ``slope`` widens the hexagon sides (or the skew of rectangular tiles);
    the cost model prices the slope-1 shape.
    """
    _check_dims(kernel, tile)
    if len(point) != kernel.space_dims + 1:
        raise DomainError(f"point {point} does not match a {kernel.space_dims}D kernel")
    t, s1 = int(point[0]), int(point[1])
    bounds = (kernel.time_steps,) + kernel.sizes
    if any(not 0 <= int(p) < n for p, n in zip(point, bounds)):
        raise DomainError(f"point {point} lies outside the iteration space")
    inner = [int(point[2]) // tile.t_s2]
    if kernel.space_dims == 3:
        inner.append(int(point[3]) // tile.t_s3)
    if tile.strategy is Strategy.HEX_HYBRID:
        band, phase, col = (int(v) for v in _hex_plane(np.int64(t), np.int64(s1),
                                                       tile.t_s1, tile.t_t, slope))
        return TileId(band, 2 * band + phase, (phase, col, *inner))
    a, b = (int(v) for v in _rect_plane(t, s1, tile.t_s1, tile.t_t, slope))
    return TileId(a + b, a + b, (a, b, *inner))


@dataclass
class PlaneAssignment:
    """Dense tile labels of a whole iteration space (brute force)."""

    step: np.ndarray       # execution step per point, shape (T, S1, S2[, S3])
    key: np.ndarray        # unique integer per tile, same shape
    wavefront: np.ndarray

    def tile_counts(self):
        _, counts = np.unique(self.key, return_counts=True)
        return counts


def _check_size(kernel, limit):
    if kernel.points > limit:
        raise SizeError(
            f"{kernel.points} points exceed the brute-force limit of {limit}")


def assign_all(kernel: StencilKernel, tile: TileConfig, slope: int = 1,
               limit: int = BRUTE_FORCE_LIMIT) -> PlaneAssignment:
    """Label every point of the iteration space with its tile."""
    _check_dims(kernel, tile)
    _check_size(kernel, limit)
    shape = (kernel.time_steps,) + kernel.sizes
    grids = np.indices(shape, dtype=np.int64)
    t, s1 = grids[0], grids[1]
    if tile.strategy is Strategy.HEX_HYBRID:
        band, phase, col = _hex_plane(t, s1, tile.t_s1, tile.t_t, slope)
        step = 2 * band + phase
        wave = band
        plane = step * (col.max() + 1) + col
    else:
        a, b = _rect_plane(t, s1, tile.t_s1, tile.t_t, slope)
        step = a + b
        wave = step
        plane = a * (b.max() + 1) + b
    key = plane
    for axis, extent in ((2, tile.t_s2), (3, tile.t_s3)):
        if axis < len(shape):
            idx = grids[axis] // extent
            key = key * (idx.max() + 1) + idx
    return PlaneAssignment(step=step, key=key, wavefront=wave)


@dataclass
class LegalityReport:
    checked_dependences: int
    violation_count: int
    violations: list     # sample of (point, source) pairs

    @property
    def legal(self):
        return self.violation_count == 0


def check_legality(kernel: StencilKernel, tile: TileConfig, slope: int = 1,
                   inner_deps: bool = False, limit: int = BRUTE_FORCE_LIMIT,
                   max_reported: int = 50) -> LegalityReport:
    """Brute-force check that every dependence is satisfied by the schedule.

    A point at time ``t >= 1`` reads ``(t-1, s1+d)`` for ``|d| <= r``.  The
    source must lie in the same tile or in a tile with a strictly smaller
    execution step.  With ``inner_deps`` the star offsets along s2/s3 are
    checked as well; the hybrid model runs inner classic tiles of a
    wavefront concurrently, so those offsets are outside its guarantee.
    """
    lab = assign_all(kernel, tile, slope, limit)
    r = kernel.stencil_order
    offsets = [(1, d) for d in range(-r, r + 1)]
    if inner_deps:
        for axis in range(2, kernel.space_dims + 1):
            offsets += [(axis, d) for d in range(-r, r + 1) if d]
    checked = 0
    count = 0
    sample = []
    dst = (slice(1, None),)
    src = (slice(None, -1),)
    for axis, d in offsets:
        dsl = list(dst) + [slice(None)] * kernel.space_dims
        ssl = list(src) + [slice(None)] * kernel.space_dims
        n = lab.key.shape[axis]
        if abs(d) >= n:
            continue
        if d > 0:
            dsl[axis], ssl[axis] = slice(0, n - d), slice(d, n)
        elif d < 0:
            dsl[axis], ssl[axis] = slice(-d, n), slice(0, n + d)
        dsl, ssl = tuple(dsl), tuple(ssl)
        ok = (lab.key[dsl] == lab.key[ssl]) | (lab.step[ssl] < lab.step[dsl])
        checked += ok.size
        bad = np.argwhere(~ok)
        count += len(bad)
        for idx in bad[: max(0, max_reported - len(sample))]:
            p = [int(v) + (s.start or 0) for v, s in zip(idx, dsl)]
            q = [int(v) + (s.start or 0) for v, s in zip(idx, ssl)]
            sample.append((tuple(p), tuple(q)))
    return LegalityReport(checked, count, sample)
