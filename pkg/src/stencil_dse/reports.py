"""Plain-dict views of model results, shaped for JSON and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math

from .core import arch_to_dict, tile_to_dict


def clean(obj):
    """Recursively make ``obj`` strict-JSON safe (non-finite floats become strings)."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def time_dict(tb) -> dict:
    return {
        "t_alg_ns": tb.t_alg,
        "t_ideal_ns": tb.t_ideal,
        "t_overhead_ns": tb.t_overhead,
        "t_sync_total_ns": tb.t_sync_total,
        "t_prism_total_ns": tb.t_prism_total,
        "t_compute_total_ns": tb.t_compute_total,
        "t_transfer_total_ns": tb.t_transfer_total,
        "t_prism_ns": tb.t_prism,
        "t_compute_ns": tb.t_compute,
        "t_transfer_ns": tb.t_transfer,
        "compute_bound": tb.compute_bound,
        "gflops": tb.gflops,
    }


def energy_dict(eb) -> dict:
    return {
        "e_dynamic_compute_nj": eb.e_dynamic_compute,
        "e_dynamic_memory_nj": eb.e_dynamic_memory,
        "e_static_nj": eb.e_static,
        "e_total_nj": eb.e_total,
        "edp_nj_ns": eb.edp,
    }


def footprint_dict(fr) -> dict:
    return {
        "bytes_per_tile": fr.bytes_per_tile,
        "bytes_with_k": fr.bytes_with_k,
        "traffic_bytes_per_tile": fr.traffic_bytes_per_tile,
        "feasible": fr.feasible,
        "binding_constraint": fr.binding_constraint.value,
    }


def candidate_dict(cand) -> dict:
    return {"tile": tile_to_dict(cand.tile), "value": cand.value,
            "time": time_dict(cand.time), "energy": energy_dict(cand.energy)}


def tune_dict(kernel, arch, result) -> dict:
    d = {
        "kernel": kernel.name,
        "arch": arch_to_dict(arch),
        "objective": result.objective.value,
        "evaluated_count": result.evaluated_count,
        "feasible_count": result.feasible_count,
        "best": candidate_dict(result.best),
        "top_k": [candidate_dict(c) for c in result.top_k],
    }
    if result.per_strategy:
        d["per_strategy"] = {s.value: candidate_dict(c)
                             for s, c in sorted(result.per_strategy.items(),
                                                key=lambda kv: kv[0].value)}
        d["winner"] = result.best.tile.strategy.value
    return d


TOP_K_COLUMNS = ("rank", "strategy", "t_s1", "t_s2", "t_s3", "t_t", "k", "value",
                 "t_alg_ns", "e_total_nj", "edp_nj_ns", "gflops", "compute_bound")


def top_k_csv(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TOP_K_COLUMNS)
    for rank, c in enumerate(result.top_k, 1):
        t = c.tile
        writer.writerow([rank, t.strategy.value, t.t_s1, t.t_s2,
                         "" if t.t_s3 is None else t.t_s3, t.t_t, t.k, repr(c.value),
                         repr(c.time.t_alg), repr(c.energy.e_total), repr(c.energy.edp),
                         repr(c.time.gflops), int(c.time.compute_bound)])
    return buf.getvalue()


def bottleneck_dict(kernel, tile, report, sweep=None) -> dict:
    d = {
        "kernel": kernel.name,
        "tile": tile_to_dict(tile),
        "components_ns": dict(report.components),
        "overhead_total_ns": report.overhead_total,
        "binding_resources": [r.value for r in report.binding_resources],
        "slack": dict(report.slack),
        "compute_bound": report.compute_bound,
    }
    if sweep is not None:
        d["sweep"] = [{
            "k": e.k,
            "feasible": e.feasible,
            "binding_constraint": e.footprint.binding_constraint.value,
            "bytes_with_k": e.footprint.bytes_with_k,
            "t_alg_ns": e.timing.t_alg if e.timing else None,
            "gflops": e.timing.gflops if e.timing else None,
        } for e in sweep.entries]
        d["best_k"] = sweep.best_k
    return d


def design_point_dict(point) -> dict:
    return {
        "arch": arch_to_dict(point.arch),
        "area_mm2": point.area,
        "weighted_gflops": point.weighted_gflops,
        "per_kernel": [{"kernel": r.name, "gflops": r.gflops,
                        "tile": tile_to_dict(r.tile) if r.tile is not None else None}
                       for r in point.per_kernel],
    }
