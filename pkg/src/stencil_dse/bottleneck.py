"""Where the overhead goes, which resources saturate, and how k trades off."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .area import area
from .core import ArchConfig, CalibrationSet, StencilKernel, TileConfig
from .geometry import schedule
from .memory import FootprintReport, feasible, footprint
from .time_model import TimeBreakdown, _require_feasible, t_alg

log = logging.getLogger(__name__)

COMPONENTS = ("sync", "transfer_excess", "quantization", "padding")


class Resource(str, enum.Enum):
    SHARED_MEMORY = "SharedMemory"
    OCCUPANCY = "Occupancy"
    BANDWIDTH = "Bandwidth"
    AREA_BUDGET = "AreaBudget"
    NONE = "None"


@dataclass(frozen=True)
class BottleneckReport:
    components: dict
    binding_resources: tuple
    slack: dict
    overhead_total: float
    compute_bound: bool


def _clamp01(x):
    return min(1.0, max(0.0, x))


def saturation(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
               tile: TileConfig, timing: Optional[TimeBreakdown] = None) -> dict:
    """Slack in [0, 1] of shared memory, SM occupancy and bandwidth."""
    _require_feasible(kernel, arch, tile)
    if timing is None:
        timing = t_alg(kernel, arch, calib, tile)
    per_round = arch.n_sm * tile.k
    waves = schedule(kernel, tile).tiles_per_wavefront
    occupancy = math.fsum(1 - (w % per_round) / per_round for w in waves) / len(waves)
    return {
        Resource.SHARED_MEMORY.value: _clamp01(1 - tile.k * footprint(kernel, tile) / arch.m_sm),
        Resource.OCCUPANCY.value: _clamp01(occupancy),
        Resource.BANDWIDTH.value: _clamp01(1 - timing.t_transfer / timing.t_compute),
    }


def decompose(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
              tile: TileConfig, budget: Optional[float] = None,
              coeffs=None, rel_tol: float = 1e-9) -> BottleneckReport:
    """Split ``t_alg - t_ideal`` into sync, transfer excess, padding and quantization.

    Quantization is the remainder: idle lanes in partially filled rounds.
    With ``budget`` and ``coeffs`` the area budget is reported as a
    resource too; it binds when one more SM would not fit.
    """
    timing = t_alg(kernel, arch, calib, tile)
    sched = schedule(kernel, tile)
    lanes = arch.n_sm * arch.n_v
    sync = timing.t_sync_total
    transfer_excess = timing.t_prism_total - timing.t_compute_total
    padding = (sched.total_points_enumerated - kernel.points) * calib.c_iter / lanes
    quantization = timing.t_overhead - sync - transfer_excess - padding
    if quantization < -rel_tol * max(timing.t_alg, 1.0):
        log.warning("negative quantization overhead %.6g ns: model parts are inconsistent",
                    quantization)

    slack = saturation(kernel, arch, calib, tile, timing)
    binding = []
    if slack[Resource.SHARED_MEMORY.value] < 1 / (tile.k + 1):
        binding.append(Resource.SHARED_MEMORY)
    if quantization > rel_tol * max(timing.t_alg, 1.0):
        binding.append(Resource.OCCUPANCY)
    if not timing.compute_bound:
        binding.append(Resource.BANDWIDTH)
    if budget is not None and coeffs is not None:
        used = area(arch, coeffs)
        slack[Resource.AREA_BUDGET.value] = _clamp01(1 - used / budget)
        if area(replace(arch, n_sm=arch.n_sm + 1), coeffs) > budget:
            binding.append(Resource.AREA_BUDGET)
    if not binding:
        binding.append(Resource.NONE)

    components = dict(zip(COMPONENTS, (sync, transfer_excess, quantization, padding)))
    return BottleneckReport(components, tuple(binding), slack, timing.t_overhead,
                            timing.compute_bound)


@dataclass(frozen=True)
class SweepEntry:
    k: int
    timing: Optional[TimeBreakdown]
    footprint: FootprintReport

    @property
    def feasible(self):
        return self.footprint.feasible


@dataclass(frozen=True)
class HyperthreadingSweep:
    entries: tuple
    best_k: Optional[int]


def hyperthreading_sweep(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
                         tile_base: TileConfig, k_range: Iterable[int]) -> HyperthreadingSweep:
    """Evaluate ``tile_base`` at each k; infeasible k are kept but not timed."""
    entries = []
    for k in sorted(set(k_range)):
        tile = replace(tile_base, k=k)
        report = feasible(kernel, arch, tile)
        timing = t_alg(kernel, arch, calib, tile) if report.feasible else None
        entries.append(SweepEntry(k, timing, report))
    timed = [e for e in entries if e.timing is not None]
    best = min(timed, key=lambda e: (e.timing.t_alg, e.k)).k if timed else None
    return HyperthreadingSweep(tuple(entries), best)
