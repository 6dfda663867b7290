"""Shared-memory footprint, global traffic per tile and the feasibility predicate."""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass

from .core import ArchConfig, StencilKernel, Strategy, TileConfig

log = logging.getLogger(__name__)


class Binding(str, enum.Enum):
    NONE = "None"
    HALF_CAPACITY = "HalfCapacity"
    K_CAPACITY = "KCapacity"


@dataclass(frozen=True)
class FootprintReport:
    bytes_per_tile: int
    bytes_with_k: int
    traffic_bytes_per_tile: int
    feasible: bool
    binding_constraint: Binding


def _slab_cells(kernel: StencilKernel, tile: TileConfig, halo: int):
    s1_extent = tile.t_s1
    if tile.strategy is Strategy.HEX_HYBRID:
        # widest row of the hexagon
        s1_extent += tile.t_t
    cells = (s1_extent + halo) * (tile.t_s2 + halo)
    if kernel.space_dims == 3:
        cells *= tile.t_s3 + halo
    return cells


@functools.lru_cache(maxsize=1 << 17)
def footprint(kernel: StencilKernel, tile: TileConfig) -> int:
    """Shared-memory bytes one tile keeps resident (all live buffers, with halo)."""
    halo = 2 * kernel.stencil_order
    return kernel.live_buffers * kernel.bytes_per_element * _slab_cells(kernel, tile, halo)


@functools.lru_cache(maxsize=1 << 17)
def tile_traffic(kernel: StencilKernel, tile: TileConfig) -> int:
    """Global-memory bytes a tile moves: load its haloed slab, store its interior once."""
    halo = 2 * kernel.stencil_order
    loaded = _slab_cells(kernel, tile, halo)
    stored = _slab_cells(kernel, tile, 0)
    return kernel.bytes_per_element * (loaded + stored)


def feasible(kernel: StencilKernel, arch: ArchConfig, tile: TileConfig) -> FootprintReport:
    """A tile fits if it uses at most half an SM's shared memory and k copies fit."""
    fp = footprint(kernel, tile)
    with_k = tile.k * fp
    if 2 * fp > arch.m_sm:
        binding = Binding.HALF_CAPACITY
    elif with_k > arch.m_sm:
        binding = Binding.K_CAPACITY
    else:
        binding = Binding.NONE
    return FootprintReport(fp, with_k, tile_traffic(kernel, tile),
                           binding is Binding.NONE, binding)


def minimal_tile(kernel: StencilKernel, strategy=Strategy.HEX_HYBRID) -> TileConfig:
    t_t = 2 if Strategy.parse(strategy) is Strategy.HEX_HYBRID else 1
    return TileConfig(strategy, 1, 1, t_t, 1 if kernel.space_dims == 3 else None, 1)


def check_capacity(kernel: StencilKernel, arch: ArchConfig) -> bool:
    """Warn and return False when not even the minimal tile fits on ``arch``."""
    fp = footprint(kernel, minimal_tile(kernel))
    if arch.m_sm < 2 * fp:
        log.warning("arch with %d B shared memory cannot hold the minimal %d B tile of %s",
                    arch.m_sm, fp, kernel.name)
        return False
    return True
