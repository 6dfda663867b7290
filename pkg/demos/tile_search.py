"""
Picking a tile for Jacobi 2D
============================

Exhaustive search over both tiling strategies, then the same search pruned
to a handful of hexagonal tiles ranked by the closed-form overhead.
"""

import time

from stencil_dse import (ArchConfig, data_path, load_calibration, load_kernel,
                         prune_by_closed_form, supertune)
from stencil_dse.core import read_json
from stencil_dse.tuner import grids_from_json

kernel = load_kernel(data_path("kernels", "jacobi2d.json"))
calib = load_calibration(data_path("golden_calib.json"))
grids = grids_from_json(read_json(data_path("tile_grids.json")))[2]
arch = ArchConfig(n_sm=16, n_v=128, m_sm=48 * 1024, bw_global=384.0)

start = time.perf_counter()
full = supertune(kernel, arch, calib, grids, top=5)
print(f"exhaustive: {full.feasible_count} feasible tiles in {time.perf_counter() - start:.2f}s")
for strategy, cand in full.per_strategy.items():
    print(f"  best {strategy.value:14s} {cand.tile.t_s1:3d} x {cand.tile.t_s2:3d} x "
          f"t_t={cand.tile.t_t:<3d} k={cand.tile.k}  {cand.time.gflops:8.1f} GFLOP/s")

# The pruned search only times the compute-bound hexagons with the widest
# faces, which is where the closed form says the overhead is lowest.
hex_grid = [g for g in grids if g.strategy.value == "HexHybrid"][0]
shortlist = prune_by_closed_form(kernel, arch, calib, hex_grid, keep=5)
print("closed-form shortlist:", [(t.t_s1, t.t_t, t.k) for t in shortlist])
pruned = supertune(kernel, arch, calib, grids, top=5, prune_keep=5)
print(f"pruned winner reaches {pruned.best.time.gflops / full.best.time.gflops:.1%} "
      f"of the exhaustive winner")
