"""
A 16 x 8 grid, four time steps, two SMs
=======================================

The smallest fixture that exercises every part of the time model.  Every
number printed below can be checked by hand.
"""

from stencil_dse import (data_path, decompose, energy, load_arch, load_calibration,
                         load_kernel, load_tile, schedule, t_alg)

kernel = load_kernel(data_path("toy", "kernel.json"))
arch = load_arch(data_path("toy", "arch.json"))
calib = load_calibration(data_path("toy", "calib.json"))
tile = load_tile(data_path("toy", "tile.json"))

# Hexagons of width 4 and height 2 need three bands to cover four time
# steps.  Each band holds four hexagons, each carrying 10 x 8 points.
sched = schedule(kernel, tile)
print("wavefronts:", sched.n_w, "tiles per wavefront:", sched.tiles_per_wavefront)
print("points per tile:", sched.tile_volume)

# One round of tiles costs 80 points x 8 ns / 32 lanes = 20 ns.  Four tiles
# on two SMs take two rounds, plus a 100 ns barrier: 3 x (100 + 40) ns.
tb = t_alg(kernel, arch, calib, tile)
print(f"t_alg = {tb.t_alg} ns, t_ideal = {tb.t_ideal} ns")

# The 356 ns of overhead is almost all synchronization.  The rest is the
# padding hexagons that stick out of the 16 x 4 plane.
for name, ns in decompose(kernel, arch, calib, tile).components.items():
    print(f"  {name:16s} {ns:8.1f} ns")

en = energy(kernel, arch, calib, tile, tb)
print(f"energy {en.e_total:.3f} nJ, EDP {en.edp:.1f} nJ*ns")
