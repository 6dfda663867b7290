"""Domain types and JSON ingestion.

Units used throughout the package: time in nanoseconds, memory in bytes
(KiB in files), area in mm^2, energy in nanojoules.  Bandwidth is stored in
bytes per nanosecond, which is numerically equal to GB/s.
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

from .errors import ParseError, ValidationError

KIB = 1024
WARP = 32


class Strategy(str, enum.Enum):
    HEX_HYBRID = "HexHybrid"
    RECT_WAVEFRONT = "RectWavefront"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValidationError("strategy", f"unknown strategy {value!r}") from None


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value):
    return (isinstance(value, (int, float)) and not isinstance(value, bool)
            and not math.isnan(value))


def _require_int(name, value, minimum):
    if not _is_int(value):
        raise ValidationError(name, f"must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(name, f"must be >= {minimum}, got {value}")


def _require_real(name, value, *, positive=False):
    if not _is_real(value):
        raise ValidationError(name, f"must be a number, got {value!r}")
    if positive and not value > 0:
        raise ValidationError(name, f"must be > 0, got {value}")
    if not positive and value < 0:
        raise ValidationError(name, f"must be >= 0, got {value}")


@dataclass(frozen=True)
class StencilKernel:
    """Shape of a stencil program: grid sizes, time steps and per-point cost."""

    name: str
    space_dims: int
    sizes: tuple
    time_steps: int
    stencil_order: int
    ops_per_point: int
    bytes_per_element: int
    live_buffers: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("name", "must be a non-empty string")
        if self.space_dims not in (2, 3) or not _is_int(self.space_dims):
            raise ValidationError("space_dims", f"must be 2 or 3, got {self.space_dims!r}")
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if len(self.sizes) != self.space_dims:
            raise ValidationError(
                "sizes", f"expected {self.space_dims} sizes, got {len(self.sizes)}")
        for s in self.sizes:
            _require_int("sizes", s, 1)
        _require_int("time_steps", self.time_steps, 1)
        _require_int("stencil_order", self.stencil_order, 0)
        _require_int("ops_per_point", self.ops_per_point, 1)
        if self.bytes_per_element not in (4, 8) or not _is_int(self.bytes_per_element):
            raise ValidationError("bytes_per_element", "must be 4 or 8")
        _require_int("live_buffers", self.live_buffers, 1)
        if any(s <= 2 * self.stencil_order for s in self.sizes):
            raise ValidationError("sizes", "sizes must exceed 2·r (grid wider than halo)")

    @property
    def s1(self):
        return self.sizes[0]

    @property
    def s2(self):
        return self.sizes[1]

    @property
    def s3(self):
        return self.sizes[2] if self.space_dims == 3 else None

    @property
    def points(self):
        """Number of points in the (space x time) iteration domain."""
        return math.prod(self.sizes) * self.time_steps

    @property
    def total_ops(self):
        return self.points * self.ops_per_point


@dataclass(frozen=True)
class ArchConfig:
    """An accelerator configuration. ``m_sm`` and ``l2_bytes`` are in bytes."""

    n_sm: int
    n_v: int
    m_sm: int
    bw_global: float
    l2_bytes: int = 0
    mem_ctrl_count: int = 1

    def __post_init__(self):
        _require_int("n_sm", self.n_sm, 1)
        _require_int("n_v", self.n_v, 1)
        if self.n_v % WARP:
            raise ValidationError("n_v", f"n_v must be multiple of {WARP}, got {self.n_v}")
        _require_int("m_sm", self.m_sm, 1)
        if self.m_sm % KIB:
            raise ValidationError("m_sm", f"must be a multiple of {KIB} bytes, got {self.m_sm}")
        _require_real("bw_global", self.bw_global, positive=True)
        _require_int("l2_bytes", self.l2_bytes, 0)
        _require_int("mem_ctrl_count", self.mem_ctrl_count, 1)

    @property
    def m_sm_kib(self):
        return self.m_sm // KIB

    @property
    def l2_kib(self):
        return self.l2_bytes / KIB

    def sort_key(self):
        return (self.n_sm, self.n_v, self.m_sm, self.l2_bytes, self.mem_ctrl_count,
                self.bw_global)


@dataclass(frozen=True)
class TileConfig:
    """One tiling instance: strategy, tile extents and hyperthreading factor ``k``."""

    strategy: Strategy
    t_s1: int
    t_s2: int
    t_t: int
    t_s3: Optional[int] = None
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        _require_int("t_s1", self.t_s1, 1)
        _require_int("t_s2", self.t_s2, 1)
        _require_int("t_t", self.t_t, 1)
        if self.t_s3 is not None:
            _require_int("t_s3", self.t_s3, 1)
        _require_int("k", self.k, 1)
        if self.strategy is Strategy.HEX_HYBRID and self.t_t % 2:
            raise ValidationError("t_t", f"HexHybrid requires an even t_t, got {self.t_t}")

    @property
    def space_dims(self):
        return 2 if self.t_s3 is None else 3

    def sort_key(self):
        """Deterministic tie-break key (strategy, t_t, t_s1, t_s2, t_s3, k)."""
        return (self.strategy.value, self.t_t, self.t_s1, self.t_s2, self.t_s3 or 0, self.k)


COEFF_NAMES = ("a_fixed", "a_sm_fixed", "a_lane", "a_shmem", "a_l2", "a_mc")
_COEFF_FILE_KEYS = {
    "a_fixed": "a_fixed",
    "a_sm_fixed": "a_sm_fixed",
    "a_lane": "a_lane",
    "a_shmem": "a_shmem_kib",
    "a_l2": "a_l2_kib",
    "a_mc": "a_mc",
}


@dataclass(frozen=True)
class AreaCoeffs:
    """Coefficients of the block-additive silicon area model (mm^2 units)."""

    a_fixed: float = 0.0
    a_sm_fixed: float = 0.0
    a_lane: float = 0.0
    a_shmem: float = 0.0
    a_l2: float = 0.0
    a_mc: float = 0.0

    def __post_init__(self):
        for name in COEFF_NAMES:
            _require_real(name, getattr(self, name))
        if not self.a_fixed + self.a_sm_fixed + self.a_lane > 0:
            raise ValidationError("a_fixed", "a_fixed + a_sm_fixed + a_lane must be > 0")

    def as_dict(self):
        return {name: getattr(self, name) for name in COEFF_NAMES}


@dataclass(frozen=True)
class CalibrationSet:
    """Machine/model constants. Energy coefficients stay in their file units (pJ, W)."""

    c_iter: float
    t_sync: float = 0.0
    e_op: float = 0.0
    e_glob: float = 0.0
    e_sh: float = 0.0
    p_static: float = 0.0
    area_coeffs: AreaCoeffs = field(default_factory=lambda: AreaCoeffs(a_fixed=1.0))

    def __post_init__(self):
        _require_real("c_iter", self.c_iter, positive=True)
        for name in ("t_sync", "e_op", "e_glob", "e_sh", "p_static"):
            _require_real(name, getattr(self, name))
        if not isinstance(self.area_coeffs, AreaCoeffs):
            raise ValidationError("area_coeffs", "must be an AreaCoeffs")


@dataclass(frozen=True)
class WorkloadSuite:
    """Weighted list of kernels. Weights are normalized to sum to one."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((k, w) for k, w in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValidationError("entries", "suite needs at least one kernel")
        for kernel, weight in entries:
            if not isinstance(kernel, StencilKernel):
                raise ValidationError("kernel", "suite entries must hold StencilKernels")
            _require_real("weight", weight, positive=True)
        if abs(sum(w for _, w in entries) - 1.0) > 1e-9:
            raise ValidationError("weight", "weights must sum to 1 (use WorkloadSuite.normalized)")

    @classmethod
    def normalized(cls, entries):
        entries = list(entries)
        for _, weight in entries:
            _require_real("weight", weight, positive=True)
        if not entries:
            raise ValidationError("entries", "suite needs at least one kernel")
        total = math.fsum(w for _, w in entries)
        return cls(tuple((k, w / total) for k, w in entries))

    @property
    def kernels(self):
        return [k for k, _ in self.entries]

    @property
    def weights(self):
        return [w for _, w in self.entries]


# --------------------------------------------------------------------------
# JSON ingestion


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: malformed JSON ({exc})") from exc


def _require_keys(data, keys, what):
    if not isinstance(data, Mapping):
        raise ParseError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ParseError(f"{what} is missing keys: {', '.join(missing)}")


KERNEL_KEYS = ("name", "space_dims", "sizes", "time_steps", "stencil_order",
               "ops_per_point", "bytes_per_element", "live_buffers")
ARCH_KEYS = ("n_sm", "n_v", "m_sm_kib", "bw_global_gb_s")
CALIB_KEYS = ("c_iter_ns", "t_sync_ns", "e_op_pj", "e_glob_pj_b", "e_sh_pj_b",
              "p_static_w", "area_coeffs")


def kernel_from_dict(data: Mapping[str, Any]) -> StencilKernel:
    _require_keys(data, KERNEL_KEYS, "kernel")
    if not isinstance(data["sizes"], list):
        raise ValidationError("sizes", "must be an array")
    return StencilKernel(**{k: data[k] for k in KERNEL_KEYS})


def kernel_to_dict(kernel: StencilKernel) -> dict:
    d = {k: getattr(kernel, k) for k in KERNEL_KEYS}
    d["sizes"] = list(kernel.sizes)
    return d


def _kib_to_bytes(name, value):
    _require_real(name, value)
    nbytes = value * KIB
    if nbytes != int(nbytes):
        raise ValidationError(name, f"{value} KiB is not a whole number of bytes")
    return int(nbytes)


def arch_from_dict(data: Mapping[str, Any]) -> ArchConfig:
    _require_keys(data, ARCH_KEYS, "arch")
    return ArchConfig(
        n_sm=data["n_sm"],
        n_v=data["n_v"],
        m_sm=_kib_to_bytes("m_sm", data["m_sm_kib"]),
        bw_global=data["bw_global_gb_s"],
        l2_bytes=_kib_to_bytes("l2_bytes", data.get("l2_kib", 0)),
        mem_ctrl_count=data.get("mem_ctrl_count", 1),
    )


def _num(x):
    # integral floats serialize as ints so files stay tidy and round-trip exactly
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def arch_to_dict(arch: ArchConfig) -> dict:
    return {
        "n_sm": arch.n_sm,
        "n_v": arch.n_v,
        "m_sm_kib": arch.m_sm_kib,
        "bw_global_gb_s": arch.bw_global,
        "l2_kib": _num(arch.l2_kib),
        "mem_ctrl_count": arch.mem_ctrl_count,
    }


def coeffs_from_dict(data: Mapping[str, Any]) -> AreaCoeffs:
    _require_keys(data, list(_COEFF_FILE_KEYS.values()), "area_coeffs")
    return AreaCoeffs(**{name: data[key] for name, key in _COEFF_FILE_KEYS.items()})


def coeffs_to_dict(coeffs: AreaCoeffs) -> dict:
    return {key: getattr(coeffs, name) for name, key in _COEFF_FILE_KEYS.items()}


def calibration_from_dict(data: Mapping[str, Any]) -> CalibrationSet:
    _require_keys(data, CALIB_KEYS, "calibration")
    return CalibrationSet(
        c_iter=data["c_iter_ns"],
        t_sync=data["t_sync_ns"],
        e_op=data["e_op_pj"],
        e_glob=data["e_glob_pj_b"],
        e_sh=data["e_sh_pj_b"],
        p_static=data["p_static_w"],
        area_coeffs=coeffs_from_dict(data["area_coeffs"]),
    )


def calibration_to_dict(calib: CalibrationSet) -> dict:
    return {
        "c_iter_ns": calib.c_iter,
        "t_sync_ns": calib.t_sync,
        "e_op_pj": calib.e_op,
        "e_glob_pj_b": calib.e_glob,
        "e_sh_pj_b": calib.e_sh,
        "p_static_w": calib.p_static,
        "area_coeffs": coeffs_to_dict(calib.area_coeffs),
    }


def tile_from_dict(data: Mapping[str, Any]) -> TileConfig:
    _require_keys(data, ("strategy", "t_s1", "t_s2", "t_t"), "tile")
    return TileConfig(
        strategy=data["strategy"],
        t_s1=data["t_s1"],
        t_s2=data["t_s2"],
        t_t=data["t_t"],
        t_s3=data.get("t_s3"),
        k=data.get("k", 1),
    )


def tile_to_dict(tile: TileConfig) -> dict:
    d = {"strategy": tile.strategy.value, "t_s1": tile.t_s1, "t_s2": tile.t_s2}
    if tile.t_s3 is not None:
        d["t_s3"] = tile.t_s3
    d["t_t"] = tile.t_t
    d["k"] = tile.k
    return d


def suite_from_list(data: Sequence[Any], base_dir: str = ".") -> WorkloadSuite:
    """Build a suite from ``[{kernel: path-or-object, weight}, ...]``.

    Relative kernel paths are resolved against ``base_dir``.
    """
    if not isinstance(data, list):
        raise ParseError("suite must be a JSON array")
    entries = []
    for item in data:
        _require_keys(item, ("kernel", "weight"), "suite entry")
        ref = item["kernel"]
        if isinstance(ref, str):
            kernel = load_kernel(os.path.join(base_dir, ref))
        else:
            kernel = kernel_from_dict(ref)
        entries.append((kernel, item["weight"]))
    return WorkloadSuite.normalized(entries)


def suite_to_list(suite: WorkloadSuite) -> list:
    return [{"kernel": kernel_to_dict(k), "weight": w} for k, w in suite.entries]


def load_kernel(path) -> StencilKernel:
    return kernel_from_dict(_read_json(path))


def load_arch(path) -> ArchConfig:
    return arch_from_dict(_read_json(path))


def load_calibration(path) -> CalibrationSet:
    return calibration_from_dict(_read_json(path))


def load_tile(path) -> TileConfig:
    return tile_from_dict(_read_json(path))


def load_suite(path) -> WorkloadSuite:
    return suite_from_list(_read_json(path), os.path.dirname(os.path.abspath(path)))


def read_json(path):
    """Read a UTF-8 JSON file, mapping I/O and syntax failures to ParseError."""
    return _read_json(path)
