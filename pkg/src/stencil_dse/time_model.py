"""Analytical execution-time model.

A tiling runs as ``n_w`` wavefronts separated by a global synchronization.
Within wavefront ``i`` its ``w_i`` tiles are grouped ``k`` per SM and the
resulting ``ceil(w_i/k)`` SM loads execute in ``ceil(ceil(w_i/k)/n_sm)``
rounds.  A round costs ``max(compute, transfer)``: compute and global
memory traffic are assumed to overlap perfectly.
"""

from __future__ import annotations

import math
import functools
from dataclasses import dataclass

import numpy as np

from .core import ArchConfig, CalibrationSet, StencilKernel, Strategy, TileConfig
from .errors import DomainError, InfeasibleError
from .geometry import schedule
from .memory import feasible, tile_traffic


@dataclass(frozen=True)
class TimeBreakdown:
    t_alg: float
    t_ideal: float
    t_overhead: float
    t_sync_total: float
    t_prism_total: float
    t_compute_total: float
    t_transfer_total: float
    t_prism: float
    t_compute: float
    t_transfer: float
    compute_bound: bool
    gflops: float


def t_ideal(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet) -> float:
    """Time on a machine with no synchronization or transfer cost."""
    return kernel.points * calib.c_iter / (arch.n_sm * arch.n_v)


def _require_feasible(kernel, arch, tile):
    report = feasible(kernel, arch, tile)
    if not report.feasible:
        raise InfeasibleError(
            f"tile {tile} needs {report.bytes_per_tile} B x k={tile.k} of "
            f"{arch.m_sm} B shared memory ({report.binding_constraint.value})")
    return report


def _prism_parts(kernel, arch, calib, tile):
    sched = schedule(kernel, tile)
    t_compute = sched.tile_volume * calib.c_iter * tile.k / arch.n_v
    per_sm_transfer = tile_traffic(kernel, tile) / arch.bw_global
    return sched, t_compute, per_sm_transfer


def t_prism(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
            tile: TileConfig):
    """Time of one full round of tiles and whether it is compute bound.

    Each SM gets ``bw_global / n_sm`` of the bandwidth.  A tie between
    compute and transfer counts as compute bound.
    """
    _require_feasible(kernel, arch, tile)
    _, t_compute, per_sm = _prism_parts(kernel, arch, calib, tile)
    t_transfer = per_sm * arch.n_sm
    return max(t_compute, t_transfer), t_compute >= t_transfer


def wavefront_rounds(w: int, k: int, n_sm: int):
    """Split ``ceil(w/k)`` SM loads into the fewest rounds, balanced.

    Returns ``(rounds, [(n_rounds, active_sms), ...])``.
    """
    loads = -(-w // k)
    rounds = -(-loads // n_sm)
    q, rem = divmod(loads, rounds)
    groups = [(rounds - rem, q)]
    if rem:
        groups.append((rem, q + 1))
    return rounds, groups


def wavefront_time(w, k, n_sm, t_compute, per_sm_transfer):
    """(time, compute part, transfer part) of one wavefront with ``w`` tiles.

    When every round is full this is ``t_prism * ceil(ceil(w/k)/n_sm)``.  A
    partial last round spreads the loads evenly and lets active SMs use the
    bandwidth of idle ones, which keeps the time non-increasing in ``n_sm``.
    """
    rounds, groups = wavefront_rounds(w, k, n_sm)
    total = 0.0
    transfer = 0.0
    for count, active in groups:
        if count == 0:
            continue
        t_tr = active * per_sm_transfer
        total += count * max(t_compute, t_tr)
        transfer += count * t_tr
    return total, rounds * t_compute, transfer


@functools.lru_cache(maxsize=1 << 17)
def round_profile(kernel: StencilKernel, tile: TileConfig, n_sm: int):
    """Total rounds and ``{active SMs: rounds}`` over the whole schedule.

    Every round of every wavefront is classified by how many SMs it keeps
    busy; the float part of the model then only loops over at most
    ``n_sm`` distinct values.
    """
    sched = schedule(kernel, tile)
    w, mult = np.unique(np.asarray(sched.tiles_per_wavefront, dtype=np.int64),
                        return_counts=True)
    loads = -(-w // tile.k)
    rounds = -(-loads // n_sm)
    q, rem = np.divmod(loads, rounds)
    active = np.concatenate([q, q + 1])
    weight = np.concatenate([mult * (rounds - rem), mult * rem])
    by_active = np.bincount(active, weights=weight)
    profile = tuple((int(a), int(c)) for a, c in enumerate(by_active) if c)
    return int(np.dot(mult, rounds)), profile


def _all_wavefronts(kernel, tile, n_sm, t_compute, per_sm_transfer):
    """(prism, compute, transfer) totals: ``wavefront_time`` summed over the schedule."""
    total_rounds, profile = round_profile(kernel, tile, n_sm)
    prism = math.fsum(c * max(t_compute, a * per_sm_transfer) for a, c in profile)
    transfer = math.fsum(c * a * per_sm_transfer for a, c in profile)
    return prism, total_rounds * t_compute, transfer


def t_alg(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
          tile: TileConfig) -> TimeBreakdown:
    """Modeled execution time of ``kernel`` under ``tile`` on ``arch``."""
    _require_feasible(kernel, arch, tile)
    sched, t_compute, per_sm = _prism_parts(kernel, arch, calib, tile)
    prism_total, compute_total, transfer_total = _all_wavefronts(
        kernel, tile, arch.n_sm, t_compute, per_sm)
    sync_total = float(sched.n_w * calib.t_sync)
    total = sync_total + prism_total
    ideal = t_ideal(kernel, arch, calib)
    t_transfer = per_sm * arch.n_sm
    return TimeBreakdown(
        t_alg=total,
        t_ideal=ideal,
        t_overhead=total - ideal,
        t_sync_total=sync_total,
        t_prism_total=prism_total,
        t_compute_total=compute_total,
        t_transfer_total=transfer_total,
        t_prism=max(t_compute, t_transfer),
        t_compute=t_compute,
        t_transfer=t_transfer,
        compute_bound=t_compute >= t_transfer,
        gflops=kernel.total_ops / total,
    )


def overhead_closed_form(kernel: StencilKernel, calib: CalibrationSet,
                         tile: TileConfig) -> float:
    """``c_iter * S1 * T / (t_s1 + t_t/2)``: ranks compute-bound hexagonal tiles."""
    if tile.strategy is not Strategy.HEX_HYBRID:
        raise DomainError("the closed-form overhead applies to HexHybrid tiles only")
    return calib.c_iter * kernel.s1 * kernel.time_steps / (tile.t_s1 + tile.t_t / 2)


def gflops(kernel: StencilKernel, t_ns: float) -> float:
    """GFLOP/s of a run taking ``t_ns`` nanoseconds (ops per ns == GFLOP/s)."""
    if not t_ns > 0 or math.isinf(t_ns):
        raise DomainError(f"execution time must be positive and finite, got {t_ns}")
    return kernel.total_ops / t_ns
