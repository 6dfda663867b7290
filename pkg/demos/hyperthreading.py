"""
When more tiles per SM pay off
==============================

The sweep fixture is bandwidth bound: each round waits on global memory.
Keeping several tiles resident per SM packs more compute into every round
until shared memory runs out.
"""

from stencil_dse import (data_path, decompose, hyperthreading_sweep, load_arch,
                         load_calibration, load_kernel, load_tile)

kernel = load_kernel(data_path("sweep", "kernel.json"))
arch = load_arch(data_path("sweep", "arch.json"))
calib = load_calibration(data_path("golden_calib.json"))
tile = load_tile(data_path("sweep", "tile.json"))

sweep = hyperthreading_sweep(kernel, arch, calib, tile, range(1, 13))
for e in sweep.entries:
    if e.timing is None:
        print(f"k={e.k:2d}  does not fit ({e.footprint.binding_constraint.value}, "
              f"{e.footprint.bytes_with_k} B)")
    else:
        print(f"k={e.k:2d}  {e.timing.t_alg / 1e6:8.3f} ms  {e.timing.gflops:8.1f} GFLOP/s")
print("best k:", sweep.best_k)

# Where the remaining time goes at k=1, and which resource is the limit.
report = decompose(kernel, arch, calib, tile)
print({k: round(v) for k, v in report.components.items()})
print("binding:", [r.value for r in report.binding_resources])
