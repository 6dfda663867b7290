"""
A quick architecture search
===========================

A coarse slice of the shipped architecture grid, two kernels, and a
250 mm^2 budget.  The full six-kernel run lives behind the command line
``stencil-dse codesign``.
"""

from stencil_dse import (ArchGridSpec, WorkloadSuite, codesign, data_path, load_calibration,
                         load_kernel, pareto, resource_allocation)
from stencil_dse.core import read_json
from stencil_dse.tuner import grids_from_json

calib = load_calibration(data_path("golden_calib.json"))
grids = grids_from_json(read_json(data_path("tile_grids.json")))
suite = WorkloadSuite.normalized([
    (load_kernel(data_path("kernels", "jacobi2d.json")), 1),
    (load_kernel(data_path("kernels", "heat3d.json")), 1),
])
space = ArchGridSpec(n_sm=(4, 8, 12, 16), n_v=(128, 256), m_sm_kib=(32, 64, 128),
                     l2_kib=(1536,), mem_ctrl_count=(4, 8), bw_per_mem_ctrl=48.0)

points = codesign(suite, space, calib.area_coeffs, calib, grids, budget=250.0)
front = pareto(points).points
print(f"{len(points)} designs fit, {len(front)} on the frontier")
print(" area   GFLOP/s  SMs lanes  KiB   mem  vec  other")
for p in front:
    mem, vec, other = resource_allocation(p, calib.area_coeffs)
    print(f"{p.area:6.1f} {p.weighted_gflops:8.1f} {p.arch.n_sm:4d} {p.arch.n_v:5d} "
          f"{p.arch.m_sm_kib:4d}  {mem:.2f} {vec:.2f} {other:.2f}")
