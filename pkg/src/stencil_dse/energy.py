"""Linear energy model built on top of the time model.

Energy has three parts: per-operation compute energy, per-byte memory
energy (global traffic plus one shared-memory access per tile point), and
static power integrated over the modeled run time.  1 pJ = 1e-3 nJ and
1 W x 1 ns = 1 nJ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import ArchConfig, CalibrationSet, StencilKernel, TileConfig
from .geometry import schedule
from .memory import tile_traffic
from .time_model import TimeBreakdown, t_alg

PJ_TO_NJ = 1e-3


@dataclass(frozen=True)
class EnergyBreakdown:
    e_dynamic_compute: float
    e_dynamic_memory: float
    e_static: float
    e_total: float
    edp: float


def energy(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
           tile: TileConfig, timing: Optional[TimeBreakdown] = None) -> EnergyBreakdown:
    """Energy (nJ) and energy-delay product (nJ x ns) of one run.

    Pass ``timing`` to reuse an existing ``t_alg`` evaluation.
    """
    if timing is None:
        timing = t_alg(kernel, arch, calib, tile)
    sched = schedule(kernel, tile)
    n_tiles = sched.n_tiles
    e_compute = sched.total_points_enumerated * kernel.ops_per_point * calib.e_op * PJ_TO_NJ
    e_global = n_tiles * tile_traffic(kernel, tile) * calib.e_glob
    e_shared = n_tiles * sched.tile_volume * kernel.bytes_per_element * calib.e_sh
    e_memory = (e_global + e_shared) * PJ_TO_NJ
    e_static = calib.p_static * timing.t_alg
    total = e_compute + e_memory + e_static
    return EnergyBreakdown(e_compute, e_memory, e_static, total, total * timing.t_alg)
