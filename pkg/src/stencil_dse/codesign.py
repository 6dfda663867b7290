"""Architecture/tiling codesign under an area budget.

The outer loop enumerates accelerator configurations that fit the budget;
the inner loop tunes every kernel of a weighted suite on each of them.
Design points are then filtered to the (area, weighted GFLOP/s) Pareto
frontier.
"""

from __future__ import annotations

import csv
import functools
import io
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .area import area, area_parts
from .core import (KIB, AreaCoeffs, ArchConfig, CalibrationSet, StencilKernel, WorkloadSuite,
                   tile_to_dict)
from .errors import EmptyDesignSpace, EmptyFeasibleSpace, ParseError, ValidationError
from .tuner import Objective, TileGridSpec, _parse_range, parallel_map, supertune

ARCH_FIELDS = ("n_sm", "n_v", "m_sm_kib", "l2_kib", "mem_ctrl_count", "bw_global_gb_s")


@dataclass(frozen=True)
class ArchGridSpec:
    """Ranges of architecture parameters; shared memory and L2 in KiB.

    Bandwidth is either a list of fixed values or, with
    ``bw_per_mem_ctrl``, proportional to the memory-controller count so
    that bandwidth has an area price.
    """

    n_sm: tuple
    n_v: tuple
    m_sm_kib: tuple
    bw_global: tuple = ()
    l2_kib: tuple = (0,)
    mem_ctrl_count: tuple = (1,)
    bw_per_mem_ctrl: Optional[float] = None

    def __post_init__(self):
        if bool(self.bw_global) == (self.bw_per_mem_ctrl is not None):
            raise ValidationError("bw_global_gb_s",
                                  "give exactly one of bw_global_gb_s and bw_per_mem_ctrl_gb_s")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ArchGridSpec":
        if not isinstance(data, Mapping):
            raise ParseError("arch grid must be a JSON object")
        for key in ("n_sm", "n_v", "m_sm_kib"):
            if key not in data:
                raise ParseError(f"arch grid is missing {key!r}")
        bw = data.get("bw_global_gb_s", [])
        bw = tuple(sorted(set(bw if isinstance(bw, list) else [bw])))
        return cls(
            n_sm=_parse_range("n_sm", data["n_sm"]),
            n_v=_parse_range("n_v", data["n_v"]),
            m_sm_kib=_parse_range("m_sm_kib", data["m_sm_kib"]),
            bw_global=bw,
            l2_kib=_parse_range("l2_kib", data.get("l2_kib", [0])),
            mem_ctrl_count=_parse_range("mem_ctrl_count", data.get("mem_ctrl_count", [1])),
            bw_per_mem_ctrl=data.get("bw_per_mem_ctrl_gb_s"),
        )

    def to_dict(self) -> dict:
        d = {"n_sm": list(self.n_sm), "n_v": list(self.n_v), "m_sm_kib": list(self.m_sm_kib),
             "l2_kib": list(self.l2_kib), "mem_ctrl_count": list(self.mem_ctrl_count)}
        if self.bw_per_mem_ctrl is not None:
            d["bw_per_mem_ctrl_gb_s"] = self.bw_per_mem_ctrl
        else:
            d["bw_global_gb_s"] = list(self.bw_global)
        return d

    def archs(self):
        bws = self.bw_global or (None,)
        for n_sm, n_v, m_kib, l2, mc, bw in itertools.product(
                self.n_sm, self.n_v, self.m_sm_kib, self.l2_kib, self.mem_ctrl_count, bws):
            if bw is None:
                bw = mc * self.bw_per_mem_ctrl
            yield ArchConfig(n_sm=n_sm, n_v=n_v, m_sm=m_kib * KIB, bw_global=bw,
                             l2_bytes=l2 * KIB, mem_ctrl_count=mc)


@dataclass(frozen=True)
class KernelResult:
    name: str
    tile: Optional[object]      # TileConfig, or None when nothing fits
    gflops: float


@dataclass(frozen=True)
class DesignPoint:
    arch: ArchConfig
    area: float
    per_kernel: tuple
    weighted_gflops: float


@dataclass(frozen=True)
class ParetoSet:
    points: tuple


def enumerate_archs(space: ArchGridSpec, coeffs: AreaCoeffs, budget: float) -> list:
    """``(arch, area)`` for every grid point within ``budget`` mm^2, in grid order."""
    out = [(arch, area(arch, coeffs)) for arch in space.archs()]
    out = [(a, x) for a, x in out if x <= budget]
    if not out:
        raise EmptyDesignSpace(f"no architecture fits within {budget} mm^2")
    out.sort(key=lambda pair: pair[0].sort_key())
    return out


def grids_for(kernel: StencilKernel, grids) -> list:
    """Tile grids applicable to ``kernel``.

    ``grids`` is a TileGridSpec, a sequence of them (matched by
    dimensionality), or a mapping keyed by kernel name or space_dims.
    """
    if isinstance(grids, TileGridSpec):
        grids = [grids]
    if isinstance(grids, Mapping):
        found = grids.get(kernel.name, grids.get(kernel.space_dims))
        if found is None:
            raise ValidationError("grids", f"no tile grid for kernel {kernel.name!r}")
        return grids_for(kernel, found)
    chosen = [g for g in grids if (g.t_s3 is not None) == (kernel.space_dims == 3)]
    if not chosen:
        raise ValidationError("grids", f"no {kernel.space_dims}D tile grid for {kernel.name!r}")
    return chosen


def evaluate_design(arch_area, suite, calib, grids, objective=Objective.TIME,
                    prune_keep=None) -> DesignPoint:
    """Tune every suite kernel on one architecture; empty tile spaces score zero."""
    arch, arch_area_mm2 = arch_area
    results = []
    for kernel, _ in suite.entries:
        try:
            res = supertune(kernel, arch, calib, grids_for(kernel, grids), objective,
                            top=1, workers=1, prune_keep=prune_keep)
            results.append(KernelResult(kernel.name, res.best.tile, res.best.time.gflops))
        except EmptyFeasibleSpace:
            results.append(KernelResult(kernel.name, None, 0.0))
    weighted = math.fsum(w * r.gflops for (_, w), r in zip(suite.entries, results))
    return DesignPoint(arch, arch_area_mm2, tuple(results), weighted)


def codesign(suite: WorkloadSuite, space: ArchGridSpec, coeffs: AreaCoeffs,
             calib: CalibrationSet, grids, budget: float, objective=Objective.TIME,
             workers: Optional[int] = None, prune_keep: Optional[int] = None) -> list:
    """Every in-budget design point, in architecture order."""
    archs = enumerate_archs(space, coeffs, budget)
    fn = functools.partial(evaluate_design, suite=suite, calib=calib, grids=grids,
                           objective=Objective.parse(objective), prune_keep=prune_keep)
    return parallel_map(fn, archs, workers)


def pareto_front(items, area_of, perf_of, tiebreak):
    """Items not dominated in (smaller area, larger perf), sorted by area.

    Among identical (area, perf) pairs only the smallest ``tiebreak`` survives.
    """
    ordered = sorted(items, key=lambda it: (area_of(it), -perf_of(it), tiebreak(it)))
    front = []
    best = -math.inf
    for it in ordered:
        if perf_of(it) > best:
            front.append(it)
            best = perf_of(it)
    return front


def pareto(points: Sequence[DesignPoint]) -> ParetoSet:
    if not points:
        raise ValidationError("points", "pareto needs at least one design point")
    front = pareto_front(points, lambda p: p.area, lambda p: p.weighted_gflops,
                         lambda p: p.arch.sort_key())
    return ParetoSet(tuple(front))


def resource_allocation(point: DesignPoint, coeffs: AreaCoeffs):
    """Fractions of die area spent on memory (shared + L2), vector lanes and the rest."""
    parts = area_parts(point.arch, coeffs)
    total = math.fsum(parts.values())
    if not total > 0:
        raise ValidationError("area", "resource allocation needs a positive area")
    memory = (parts["shmem"] + parts["l2"]) / total
    vector = parts["vector"] / total
    return memory, vector, parts["other"] / total


def best_per_kernel(points: Sequence[DesignPoint]) -> dict:
    """Highest-GFLOP/s design for each kernel (ties: smaller area, then arch order)."""
    best = {}
    for p in points:
        for i, r in enumerate(p.per_kernel):
            key = (-r.gflops, p.area, p.arch.sort_key())
            if r.name not in best or key < best[r.name][0]:
                best[r.name] = (key, p, i)
    return {name: (p, p.per_kernel[i]) for name, (_, p, i) in best.items()}


# --------------------------------------------------------------------------
# CSV output

TILE_COLUMNS = ("strategy", "t_s1", "t_s2", "t_s3", "t_t", "k")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def point_columns(points: Sequence[DesignPoint]) -> list:
    cols = ["area_mm2", "weighted_gflops", "n_sm", "n_v", "m_sm_kib", "l2_kib",
            "mem_ctrl_count", "bw_global_gb_s"]
    if points:
        for r in points[0].per_kernel:
            cols += [f"{r.name}_{c}" for c in TILE_COLUMNS] + [f"{r.name}_gflops"]
    return cols


def point_row(point: DesignPoint) -> dict:
    a = point.arch
    row = {"area_mm2": point.area, "weighted_gflops": point.weighted_gflops,
           "n_sm": a.n_sm, "n_v": a.n_v, "m_sm_kib": a.m_sm_kib,
           "l2_kib": a.l2_bytes // KIB if a.l2_bytes % KIB == 0 else a.l2_kib,
           "mem_ctrl_count": a.mem_ctrl_count, "bw_global_gb_s": a.bw_global}
    for r in point.per_kernel:
        tile = tile_to_dict(r.tile) if r.tile is not None else {}
        for c in TILE_COLUMNS:
            row[f"{r.name}_{c}"] = tile.get(c)
        row[f"{r.name}_gflops"] = r.gflops
    return row


def points_to_csv(points: Sequence[DesignPoint]) -> str:
    buf = io.StringIO()
    cols = point_columns(points)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for p in points:
        row = point_row(p)
        writer.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def allocation_to_csv(points: Sequence[DesignPoint], coeffs: AreaCoeffs,
                      frontier: Sequence[DesignPoint] = ()) -> str:
    on_front = {id(p) for p in frontier}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["area_mm2", "weighted_gflops", "n_sm", "n_v", "m_sm_kib",
                     "frac_memory", "frac_vector", "frac_other", "pareto"])
    for p in points:
        mem, vec, other = resource_allocation(p, coeffs)
        writer.writerow([_fmt(p.area), _fmt(p.weighted_gflops), p.arch.n_sm, p.arch.n_v,
                         p.arch.m_sm_kib, _fmt(mem), _fmt(vec), _fmt(other),
                         int(id(p) in on_front)])
    return buf.getvalue()


def sensitivity_to_csv(points: Sequence[DesignPoint]) -> str:
    """Best architecture per kernel: the analog of a workload-sensitivity table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kernel", "n_sm", "n_v", "m_sm_kib", "mem_ctrl_count", "bw_global_gb_s",
                     "area_mm2", "gflops"])
    for name, (p, r) in best_per_kernel(points).items():
        a = p.arch
        writer.writerow([name, a.n_sm, a.n_v, a.m_sm_kib, a.mem_ctrl_count, _fmt(a.bw_global),
                         _fmt(p.area), _fmt(r.gflops)])
    return buf.getvalue()


def pareto_csv_rows(text: str):
    """Frontier of a points CSV (needs ``area_mm2`` and ``weighted_gflops`` columns)."""
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or not {"area_mm2", "weighted_gflops"} <= set(reader.fieldnames):
        raise ParseError("points CSV needs area_mm2 and weighted_gflops columns")
    rows = list(reader)
    if not rows:
        raise ValidationError("points", "pareto needs at least one design point")
    try:
        keyed = [(float(r["area_mm2"]), float(r["weighted_gflops"]), i, r)
                 for i, r in enumerate(rows)]
    except ValueError as exc:
        raise ParseError(f"non-numeric area/gflops value: {exc}") from None
    arch_cols = [c for c in ("n_sm", "n_v", "m_sm_kib", "l2_kib", "mem_ctrl_count")
                 if c in reader.fieldnames]

    def tiebreak(item):
        row = item[3]
        try:
            return tuple(float(row[c]) for c in arch_cols) + (item[2],)
        except ValueError:
            return (item[2],)

    front = pareto_front(keyed, lambda it: it[0], lambda it: it[1], tiebreak)
    return reader.fieldnames, [it[3] for it in front]


def rows_to_csv(fieldnames, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
