"""Tile-size optimization over a declared grid.

``tune`` evaluates every feasible tile of one strategy, ``supertune`` takes
the minimum across strategies, and ``prune_by_closed_form`` narrows a
hexagonal grid to the compute-bound tiles with the largest hexagon face.
Results never depend on evaluation order: candidates are ranked by
``(objective value, tile.sort_key())``.
"""

from __future__ import annotations

import enum
import functools
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .core import ArchConfig, CalibrationSet, StencilKernel, Strategy, TileConfig
from .energy import EnergyBreakdown, energy
from .errors import DomainError, EmptyFeasibleSpace, ParseError, ValidationError
from .memory import check_capacity, feasible
from .time_model import TimeBreakdown, overhead_closed_form, t_alg

THREADS_ENV = "STENCIL_DSE_THREADS"


class Objective(str, enum.Enum):
    TIME = "time"
    ENERGY = "energy"
    EDP = "edp"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError("objective", f"unknown objective {value!r}") from None


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(THREADS_ENV, f"must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(THREADS_ENV, f"must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items, workers=None):
    """Ordered map; uses a process pool when more than one worker is allowed."""
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _parse_range(name, spec):
    if spec is None:
        return None
    if isinstance(spec, list):
        values = spec
    elif isinstance(spec, Mapping):
        if "values" in spec:
            values = spec["values"]
        elif "min" in spec and "max" in spec:
            step = spec.get("step", 1)
            if not isinstance(step, int) or step < 1:
                raise ValidationError(name, f"step must be a positive integer, got {step!r}")
            values = list(range(spec["min"], spec["max"] + 1, step))
        else:
            raise ParseError(f"grid parameter {name!r} needs 'values' or 'min'/'max'")
    elif isinstance(spec, int) and not isinstance(spec, bool):
        values = [spec]
    else:
        raise ParseError(f"grid parameter {name!r} has unsupported form {spec!r}")
    if not values or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise ValidationError(name, "grid values must be a non-empty list of integers")
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class TileGridSpec:
    """Finite Cartesian grid of tile parameters for one strategy."""

    strategy: Strategy
    t_s1: tuple
    t_s2: tuple
    t_t: tuple
    t_s3: Optional[tuple] = None
    k: tuple = (1,)

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        for name in ("t_s1", "t_s2", "t_t", "t_s3", "k"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _parse_range(name, list(value)))

    @classmethod
    def from_dict(cls, data: Mapping) -> "TileGridSpec":
        if not isinstance(data, Mapping) or "strategy" not in data:
            raise ParseError("tile grid must be an object with a 'strategy'")
        for key in ("t_s1", "t_s2", "t_t"):
            if key not in data:
                raise ParseError(f"tile grid is missing {key!r}")
        return cls(
            strategy=data["strategy"],
            t_s1=_parse_range("t_s1", data["t_s1"]),
            t_s2=_parse_range("t_s2", data["t_s2"]),
            t_t=_parse_range("t_t", data["t_t"]),
            t_s3=_parse_range("t_s3", data.get("t_s3")),
            k=_parse_range("k", data.get("k", [1])),
        )

    def to_dict(self) -> dict:
        d = {"strategy": self.strategy.value, "t_s1": {"values": list(self.t_s1)},
             "t_s2": {"values": list(self.t_s2)}, "t_t": {"values": list(self.t_t)}}
        if self.t_s3 is not None:
            d["t_s3"] = {"values": list(self.t_s3)}
        d["k"] = {"values": list(self.k)}
        return d

    @classmethod
    def default(cls, strategy=Strategy.HEX_HYBRID, space_dims=2) -> "TileGridSpec":
        """Powers of two in s1/t, warp multiples in s2, k up to 4."""
        strategy = Strategy.parse(strategy)
        t_t = (2, 4, 8, 16, 32) if strategy is Strategy.HEX_HYBRID else (1, 2, 4, 8, 16, 32)
        return cls(strategy, t_s1=(1, 2, 4, 8, 16, 32, 64), t_s2=(32, 64, 96, 128, 256),
                   t_t=t_t, t_s3=(1, 2, 4, 8, 16) if space_dims == 3 else None,
                   k=(1, 2, 3, 4))

    def size(self) -> int:
        n = len(self.t_s1) * len(self.t_s2) * len(self.t_t) * len(self.k)
        return n * (len(self.t_s3) if self.t_s3 else 1)

    def candidates(self, space_dims: int) -> Iterator[TileConfig]:
        """Every structurally valid tile of the grid, in tie-break order."""
        return iter(_candidates(self, space_dims))

    def _build_candidates(self, space_dims):
        if space_dims == 3 and self.t_s3 is None:
            raise DomainError("a 3D kernel needs a t_s3 range in the tile grid")
        if space_dims == 2 and self.t_s3 is not None:
            raise DomainError("a 2D kernel cannot take a t_s3 range")
        s3_values = self.t_s3 if space_dims == 3 else (None,)
        for t_t, t_s1, t_s2, t_s3, k in itertools.product(
                self.t_t, self.t_s1, self.t_s2, s3_values, self.k):
            if self.strategy is Strategy.HEX_HYBRID and t_t % 2:
                continue
            yield TileConfig(self.strategy, t_s1, t_s2, t_t, t_s3, k)


@functools.lru_cache(maxsize=256)
def _candidates(grid, space_dims):
    return tuple(grid._build_candidates(space_dims))


def enumerate_tiles(kernel: StencilKernel, arch: ArchConfig,
                    grid: TileGridSpec) -> Iterator[TileConfig]:
    """Lazily yield the feasible tiles of ``grid``; raise if there are none."""
    found = False
    for tile in grid.candidates(kernel.space_dims):
        if feasible(kernel, arch, tile).feasible:
            found = True
            yield tile
    if not found:
        check_capacity(kernel, arch)
        raise EmptyFeasibleSpace(
            f"no tile of the {grid.strategy.value} grid fits {kernel.name!r} "
            f"in {arch.m_sm} B of shared memory")


@dataclass(frozen=True)
class Candidate:
    tile: TileConfig
    time: TimeBreakdown
    energy: EnergyBreakdown
    value: float

    def rank_key(self):
        return (self.value, self.tile.sort_key())


@dataclass(frozen=True)
class TuneResult:
    best: Candidate
    top_k: tuple
    evaluated_count: int
    feasible_count: int
    objective: Objective
    per_strategy: Mapping = field(default_factory=dict)


def _objective_value(objective, timing, en):
    if objective is Objective.TIME:
        return timing.t_alg
    if objective is Objective.ENERGY:
        return en.e_total
    return en.edp


def evaluate(kernel, arch, calib, tile, objective=Objective.TIME) -> Candidate:
    """Time, energy and objective value of one feasible tile."""
    objective = Objective.parse(objective)
    timing = t_alg(kernel, arch, calib, tile)
    en = energy(kernel, arch, calib, tile, timing)
    return Candidate(tile, timing, en, _objective_value(objective, timing, en))


def _rank(candidates, objective, evaluated, top):
    ranked = sorted(candidates, key=Candidate.rank_key)
    return TuneResult(ranked[0], tuple(ranked[:top]), evaluated, len(ranked),
                      Objective.parse(objective))


def _evaluate_many(kernel, arch, calib, tiles, objective, workers):
    fn = functools.partial(evaluate, kernel, arch, calib, objective=objective)
    return parallel_map(fn, tiles, workers)


def tune(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
         grid: TileGridSpec, objective=Objective.TIME, top: int = 10,
         workers: Optional[int] = None, prune_keep: Optional[int] = None) -> TuneResult:
    """Exhaustive search of ``grid`` for the tile minimizing ``objective``.

    With ``prune_keep`` only the closed-form shortlist is evaluated.
    """
    objective = Objective.parse(objective)
    if prune_keep is not None:
        tiles = prune_by_closed_form(kernel, arch, calib, grid, prune_keep)
    else:
        tiles = list(enumerate_tiles(kernel, arch, grid))
    evaluated = grid.size()
    cands = _evaluate_many(kernel, arch, calib, tiles, objective, workers)
    return _rank(cands, objective, evaluated, top)


def supertune(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
              grids: Sequence[TileGridSpec], objective=Objective.TIME, top: int = 10,
              workers: Optional[int] = None, prune_keep: Optional[int] = None) -> TuneResult:
    """Minimum over strategies of the per-strategy tuning results."""
    objective = Objective.parse(objective)
    per_strategy = {}
    pool = []
    evaluated = feasible_count = 0
    for grid in grids:
        keep = prune_keep if grid.strategy is Strategy.HEX_HYBRID else None
        try:
            res = tune(kernel, arch, calib, grid, objective, top, workers, keep)
        except EmptyFeasibleSpace:
            evaluated += grid.size()
            continue
        evaluated += res.evaluated_count
        feasible_count += res.feasible_count
        pool.extend(res.top_k)
        prev = per_strategy.get(grid.strategy)
        if prev is None or res.best.rank_key() < prev.rank_key():
            per_strategy[grid.strategy] = res.best
    if not pool:
        raise EmptyFeasibleSpace(f"no strategy has a feasible tile for {kernel.name!r}")
    ranked = sorted(pool, key=Candidate.rank_key)
    return TuneResult(ranked[0], tuple(ranked[:top]), evaluated, feasible_count,
                      objective, per_strategy)


def prune_by_closed_form(kernel: StencilKernel, arch: ArchConfig, calib: CalibrationSet,
                         grid: TileGridSpec, keep: int) -> list:
    """Compute-bound feasible tiles ranked by the closed-form overhead; first ``keep``."""
    if grid.strategy is not Strategy.HEX_HYBRID:
        raise DomainError("closed-form pruning needs a HexHybrid grid")
    if keep < 1:
        raise ValidationError("keep", f"must be >= 1, got {keep}")
    bound = [tile for tile in enumerate_tiles(kernel, arch, grid)
             if t_alg(kernel, arch, calib, tile).compute_bound]
    if not bound:
        raise EmptyFeasibleSpace(f"no compute-bound tile for {kernel.name!r}")
    bound.sort(key=lambda tile: (overhead_closed_form(kernel, calib, tile), tile.sort_key()))
    return bound[:keep]


def grids_from_json(data):
    """A grid object, a list of them, or a mapping of kernel name / dims to either."""
    if isinstance(data, list):
        return [TileGridSpec.from_dict(g) for g in data]
    if isinstance(data, Mapping) and "strategy" in data:
        return [TileGridSpec.from_dict(data)]
    if isinstance(data, Mapping):
        return {int(key) if key.isdigit() else key: grids_from_json(value)
                for key, value in data.items()}
    raise ParseError("tile grid file must hold an object or an array")
