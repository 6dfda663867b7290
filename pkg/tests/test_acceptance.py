"""End-to-end acceptance checks, one test (or group) per criterion.

Each test prints a one-line verdict; a summary of all criteria is printed
at the end of the pytest run.
"""

import filecmp
import itertools
import math
import os
import random
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stencil_dse import (AreaCoeffs, ArchConfig, CalibrationSet, DesignPoint, StencilKernel,
                         TileConfig, TileGridSpec, area, calibrate, check_legality, data_path,
                         decompose, energy, feasible, footprint, load_suite, overhead_closed_form,
                         pareto, points_per_hex, schedule, supertune, t_alg, t_ideal, tune)
from stencil_dse.core import (COEFF_NAMES, arch_from_dict, calibration_from_dict,
                              kernel_from_dict, read_json)
from stencil_dse.cli import main
from stencil_dse.area import area_features
from stencil_dse.geometry import assign_all
from stencil_dse.tuner import grids_from_json

from conftest import GOLDEN, SYNTH_COEFFS
from oracles import dominance_filter, hex_tiles_plane

crit = pytest.mark.criterion


def verdict(number, ok, detail):
    print(f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


# -- 1 ---------------------------------------------------------------------

def _partition_fixtures(n):
    rng = random.Random(2024)
    out = []
    while len(out) < n:
        dims = rng.choice((2, 2, 3))
        strategy = rng.choice(("HexHybrid", "HexHybrid", "RectWavefront"))
        T = rng.randint(4, 80)
        S1 = rng.randint(8, 200)
        t_t = 2 * rng.randint(1, 6) if strategy == "HexHybrid" else rng.randint(1, 10)
        if dims == 2:
            sizes = (S1, rng.randint(3, 64))
            tile = TileConfig(strategy, rng.randint(1, 12), rng.randint(1, 32), t_t)
        else:
            sizes = (S1, rng.randint(3, 16), rng.randint(3, 16))
            tile = TileConfig(strategy, rng.randint(1, 12), rng.randint(1, 8), t_t,
                              t_s3=rng.randint(1, 8))
        kernel = StencilKernel("rand", dims, sizes, T, 1, 1, 4, 2)
        if kernel.points <= 10**6:
            out.append((kernel, tile))
    return out


@crit(1, "geometry partition oracle and r=1 legality")
def test_criterion_1_partition_and_legality():
    start = time.perf_counter()
    fixtures = _partition_fixtures(24)
    problems = []
    for kernel, tile in fixtures:
        lab = assign_all(kernel, tile)
        if lab.tile_counts().sum() != kernel.points:
            problems.append(("count", kernel, tile))
        if tile.strategy.value == "HexHybrid":
            tiles, claims = hex_tiles_plane(kernel.s1, kernel.time_steps, tile.t_s1, tile.t_t)
            if not (claims == 1).all():
                problems.append(("oracle-cover", kernel, tile))
            corner = (0,) * (kernel.space_dims - 1)
            for pts in tiles.values():
                ts, ss = zip(*pts)
                if np.unique(lab.key[(list(ts), list(ss)) + corner]).size != 1:
                    problems.append(("oracle-tile", kernel, tile))
                    break
        rep = check_legality(kernel, tile)
        if not rep.legal:
            problems.append(("legality", kernel, tile, rep.violation_count))
    elapsed = time.perf_counter() - start
    verdict(1, not problems and elapsed < 60,
            f"{len(fixtures)} fixtures, {len(problems)} problems, {elapsed:.1f}s")


# -- 2 ---------------------------------------------------------------------

@crit(2, "hexagon tiling density within [1.0, 1.10]")
def test_criterion_2_density():
    worst = 0.0
    best = math.inf
    cases = [(t_s1, t_t) for t_s1 in (1, 2, 4, 8, 16, 32) for t_t in (2, 4, 8, 16)]
    for i, (t_s1, t_t) in enumerate(cases):
        base = 50 * (t_s1 + t_t)
        S1, T = base + 7 * i, base + 3 * i
        k = StencilKernel("d", 2, (S1, 8), T, 1, 1, 4, 2)
        s = schedule(k, TileConfig("HexHybrid", t_s1, 8, t_t))
        density = s.n_tiles * points_per_hex(t_s1, t_t) / (S1 * T)
        worst, best = max(worst, density), min(best, density)
    # the explicit tile oracle agrees on a few smaller planes
    for t_s1, t_t in ((4, 4), (2, 6), (8, 2)):
        n = 50 * (t_s1 + t_t)
        tiles, _ = hex_tiles_plane(n, n, t_s1, t_t)
        density = len(tiles) * points_per_hex(t_s1, t_t) / (n * n)
        worst, best = max(worst, density), min(best, density)
    verdict(2, 1.0 <= best and worst <= 1.10,
            f"density range [{best:.4f}, {worst:.4f}] over {len(cases) + 3} cases")


# -- 3 ---------------------------------------------------------------------

def _scenarios():
    return read_json(data_path("closed_form_scenarios.json"))


@crit(3, "closed-form ranking on golden scenarios")
def test_criterion_3_closed_form_ranking():
    positions = []
    exact = True
    for sc in _scenarios():
        kernel = kernel_from_dict(sc["kernel"])
        arch = arch_from_dict(sc["arch"])
        calib = calibration_from_dict(sc["calib"])
        grid = TileGridSpec.from_dict(sc["grid"])
        res = tune(kernel, arch, calib, grid, top=10**6)
        ranked = [c.tile for c in res.top_k]
        assert all(c.time.compute_bound for c in res.top_k), sc["name"]
        face = max(t.t_s1 + t.t_t / 2 for t in ranked)
        top = [t for t in ranked if t.t_s1 + t.t_t / 2 == face]
        positions.append(max(ranked.index(t) for t in top))
        cf = {t: overhead_closed_form(kernel, calib, t) for t in ranked}
        lo = min(cf.values())
        exact &= {t for t, v in cf.items() if v == lo} == set(top)
    ok = exact and len(positions) == 10 and max(positions) < 5
    verdict(3, ok, f"max-face rank positions {positions}, argmin/argmax agree: {exact}")


# -- 4 ---------------------------------------------------------------------

@crit(4, "hand-derived toy fixture")
def test_criterion_4_toy(toy):
    tb = t_alg(*toy)
    rep = decompose(*toy)
    got = (tb.t_alg, tb.t_ideal, rep.components["sync"], rep.components["transfer_excess"],
           rep.components["padding"], rep.components["quantization"])
    want = (420.0, 64.0, 300.0, 0.0, 56.0, 0.0)
    ok = all(math.isclose(g, w, rel_tol=1e-9, abs_tol=1e-9 * 420) for g, w in zip(got, want))
    verdict(4, ok, f"(t_alg, t_ideal, sync, transfer, padding, quantization) = {got}")


# -- 5 ---------------------------------------------------------------------

@crit(5, "Pareto frontier equals the O(n^2) dominance filter")
def test_criterion_5_pareto():
    rng = random.Random(99)
    points = []
    for i in range(1000):
        # a noisy rising curve with integer ties keeps the frontier large and tie-heavy
        a = float(rng.randint(50, 500))
        g = float(round(math.sqrt(a) * 100 + rng.gauss(0, 20)))
        points.append(DesignPoint(ArchConfig(i + 1, 32, 1024, 1.0), a, (), g))
    start = time.perf_counter()
    front = pareto(points).points
    elapsed = time.perf_counter() - start
    got = sorted((p.area, p.weighted_gflops, p.arch.n_sm) for p in front)
    want = dominance_filter([(p.area, p.weighted_gflops, p.arch.n_sm) for p in points])
    verdict(5, got == want and elapsed < 1.0,
            f"{len(front)} frontier points of 1000, exact match {got == want}, {elapsed*1e3:.1f} ms")


# -- 6 ---------------------------------------------------------------------

def _anchor_archs(rng, n):
    return [ArchConfig(rng.randint(2, 48), 32 * rng.randint(1, 8), 1024 * rng.randint(8, 128),
                       100.0, l2_bytes=1024 * rng.randint(256, 6144),
                       mem_ctrl_count=rng.randint(1, 12)) for _ in range(n)]


@crit(6, "area calibration round trip")
def test_criterion_6_area_exact():
    rng = random.Random(6)
    truth = SYNTH_COEFFS
    anchors = [(a, area(a, truth)) for a in _anchor_archs(rng, 8)]
    fitted = calibrate(anchors, COEFF_NAMES)
    worst = max(abs(getattr(fitted, n) - getattr(truth, n)) / getattr(truth, n)
                for n in COEFF_NAMES)
    verdict(6, worst <= 1e-9, f"max relative coefficient error {worst:.2e}")


FACTORIAL = [ArchConfig(n, v, m * 1024, 100.0, l2_bytes=l2 * 1024, mem_ctrl_count=mc)
             for n, v, m, l2, mc in itertools.product((8, 32), (64, 256), (32, 96), (1024, 4096),
                                                      (4, 12))]
HELD_OUT = ArchConfig(20, 128, 64 * 1024, 100.0, l2_bytes=2048 * 1024, mem_ctrl_count=8)


@crit(6, "area calibration round trip")
def test_criterion_6_area_noisy_holdout():
    truth = SYNTH_COEFFS
    true_area = area(HELD_OUT, truth)
    # the fit is linear in the noise, so the worst case over |noise| <= 2% is exact
    feats = np.array([[area_features(a)[n] for n in COEFF_NAMES] for a in FACTORIAL])
    clean = np.array([area(a, truth) for a in FACTORIAL])
    x = np.array([area_features(HELD_OUT)[n] for n in COEFF_NAMES])
    bound = 0.02 * np.abs((x @ np.linalg.pinv(feats)) * clean).sum() / true_area
    rng = random.Random(6)
    worst = 0.0
    for _ in range(200):
        noisy = [(a, y * (1 + rng.uniform(-0.02, 0.02))) for a, y in zip(FACTORIAL, clean)]
        fitted = calibrate(noisy, COEFF_NAMES)
        worst = max(worst, abs(area(HELD_OUT, fitted) - true_area) / true_area)
    verdict(6, worst <= 0.02 and bound <= 0.02 + 1e-12,
            f"held-out error: worst of 200 noisy fits {worst:.4f}, analytic bound {bound:.4f}")


# -- 7 ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def lattice_case():
    kernel = kernel_from_dict(read_json(data_path("kernels", "jacobi2d.json")))
    arch = ArchConfig(8, 128, 48 * 1024, 150.0)
    calib = replace(calibration_from_dict(read_json(data_path("golden_calib.json"))),
                    p_static=40.0)
    grids = grids_from_json(read_json(data_path("tile_grids.json")))[2]
    return kernel, arch, calib, grids


@crit(7, "optimization lattice")
def test_criterion_7_lattice(lattice_case):
    kernel, arch, calib, grids = lattice_case
    sup = supertune(kernel, arch, calib, grids)
    per = [tune(kernel, arch, calib, g).best.value for g in grids]
    edp = supertune(kernel, arch, calib, grids, "edp").best.energy.edp
    t_best = supertune(kernel, arch, calib, grids, "time").best.energy.edp
    e_best = supertune(kernel, arch, calib, grids, "energy").best.energy.edp
    ok = all(sup.best.value <= v for v in per) and edp <= t_best and edp <= e_best
    verdict(7, ok, f"supertune {sup.best.value:.1f} vs per-strategy {[round(v, 1) for v in per]}; "
                   f"edp {edp:.4g} <= ({t_best:.4g}, {e_best:.4g})")


@crit(7, "optimization lattice")
def test_criterion_7_invariance(lattice_case):
    kernel, arch, calib, grids = lattice_case
    base = supertune(kernel, arch, calib, grids, top=20, workers=1)
    rng = random.Random(1)
    shuffled = []
    for g in reversed(grids):
        d = g.to_dict()
        for key, val in d.items():
            if isinstance(val, dict):
                vals = list(val["values"])
                rng.shuffle(vals)
                d[key] = vals
        shuffled.append(TileGridSpec.from_dict(d))
    perm = supertune(kernel, arch, calib, shuffled, top=20, workers=1)
    par = supertune(kernel, arch, calib, grids, top=20, workers=3)
    ok = base.top_k == perm.top_k == par.top_k
    verdict(7, ok, "top-20 identical under grid permutation and 3 workers")


# -- 8 ---------------------------------------------------------------------

kernels2d = st.builds(lambda s1, s2, t, r, b: StencilKernel("m", 2, (s1, s2), t, r, 3, b, 2),
                      st.integers(16, 300), st.integers(16, 200), st.integers(1, 64),
                      st.integers(0, 2), st.sampled_from((4, 8)))
tiles = st.builds(lambda hexa, t_s1, t_s2, t_t, k: TileConfig(
    "HexHybrid" if hexa else "RectWavefront", t_s1, t_s2, 2 * t_t if hexa else t_t, k=k),
    st.booleans(), st.integers(1, 24), st.integers(1, 64), st.integers(1, 8), st.integers(1, 4))


@crit(8, "monotonicity suite")
@settings(max_examples=150, deadline=None)
@given(kernels2d, tiles, st.integers(1, 40), st.integers(1, 8), st.floats(0.5, 1e4),
       st.floats(0, 5000))
def test_criterion_8_time_monotone(kernel, tile, n_sm, lanes, bw, t_sync):
    calib = CalibrationSet(c_iter=2.0, t_sync=t_sync)
    arch = ArchConfig(n_sm, 32 * lanes, 256 * 1024, bw)
    if not feasible(kernel, arch, tile).feasible:
        return
    base = t_alg(kernel, arch, calib, tile).t_alg
    more_sm = replace(arch, n_sm=n_sm + 1)
    more_v = replace(arch, n_v=arch.n_v + 32)
    assert t_ideal(kernel, more_sm, calib) <= t_ideal(kernel, arch, calib)
    assert t_ideal(kernel, more_v, calib) <= t_ideal(kernel, arch, calib)
    assert t_alg(kernel, more_sm, calib, tile).t_alg <= base * (1 + 1e-12)
    assert t_alg(kernel, more_v, calib, tile).t_alg <= base * (1 + 1e-12)


@crit(8, "monotonicity suite")
@settings(max_examples=100, deadline=None)
@given(kernels2d, tiles, st.sampled_from(("e_op", "e_glob", "e_sh", "p_static")),
       st.floats(0.001, 100))
def test_criterion_8_energy_monotone(kernel, tile, coef, bump):
    arch = ArchConfig(8, 64, 256 * 1024, 100.0)
    calib = CalibrationSet(c_iter=2.0, t_sync=10.0, e_op=1.0, e_glob=1.0, e_sh=1.0, p_static=1.0)
    if not feasible(kernel, arch, tile).feasible:
        return
    lo = energy(kernel, arch, calib, tile).e_total
    hi = energy(kernel, arch, replace(calib, **{coef: getattr(calib, coef) + bump}), tile).e_total
    assert hi >= lo


@crit(8, "monotonicity suite")
@settings(max_examples=100, deadline=None)
@given(st.sampled_from(COEFF_NAMES), st.floats(0.001, 50), st.integers(1, 64),
       st.integers(1, 8), st.integers(1, 128), st.integers(0, 4096), st.integers(1, 16))
def test_criterion_8_area_monotone(name, bump, n_sm, lanes, m_kib, l2, mc):
    arch = ArchConfig(n_sm, 32 * lanes, m_kib * 1024, 1.0, l2_bytes=l2 * 1024, mem_ctrl_count=mc)
    grown = AreaCoeffs(**dict(SYNTH_COEFFS.as_dict(), **{name: getattr(SYNTH_COEFFS, name) + bump}))
    assert area(arch, grown) >= area(arch, SYNTH_COEFFS)


@crit(8, "monotonicity suite")
@settings(max_examples=200, deadline=None)
@given(kernels2d, tiles, st.integers(1, 96), st.sampled_from(("t_s1", "t_s2", "t_t", "k")))
def test_criterion_8_feasibility_antitone(kernel, tile, m_kib, field):
    arch = ArchConfig(4, 64, m_kib * 1024, 1.0)
    step = 2 if field == "t_t" and tile.strategy.value == "HexHybrid" else 1
    bigger = replace(tile, **{field: getattr(tile, field) + step})
    if feasible(kernel, arch, bigger).feasible:
        assert feasible(kernel, arch, tile).feasible
    assert footprint(kernel, bigger) >= footprint(kernel, tile)


# -- 9 ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def golden_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("codesign")
    argv = ["codesign", "--suite", data_path("suite.json"),
            "--space", data_path("arch_space.json"), "--calib", data_path("golden_calib.json"),
            "--grids", data_path("tile_grids.json"), "--budget", "400", "--out-dir", str(out),
            "--out", os.devnull]
    start = time.perf_counter()
    code = main(argv)
    return code, out, time.perf_counter() - start


@crit(9, "golden codesign regression")
def test_criterion_9_byte_identical(golden_run):
    code, out, elapsed = golden_run
    same = [filecmp.cmp(out / name, os.path.join(GOLDEN, name), shallow=False)
            for name in ("design_points.csv", "pareto.csv", "sensitivity.csv")]
    verdict(9, code == 0 and all(same) and elapsed < 120,
            f"exit {code}, files identical {same}, {elapsed:.1f}s")


@crit(9, "golden codesign regression")
def test_criterion_9_qualitative(golden_run):
    code, out, _ = golden_run
    rows = (out / "sensitivity.csv").read_text().splitlines()[1:]
    best = {}
    for line in rows:
        name, n_sm, n_v, m_kib, mc, *_ = line.split(",")
        best[name] = (int(n_sm), int(n_v), int(m_kib), int(mc))
    suite = load_suite(data_path("suite.json"))
    dims = {k.name: k.space_dims for k in suite.kernels}
    distinct = len(set(best.values())) == len(best) == 6
    m3 = min(best[n][2] for n in best if dims[n] == 3)
    m2 = max(best[n][2] for n in best if dims[n] == 2)
    verdict(9, code == 0 and distinct and m3 >= m2,
            f"best archs {best}; pairwise distinct {distinct}; min 3D M_SM {m3} KiB "
            f">= max 2D M_SM {m2} KiB")
