"""Analytical cost models and design-space search for tiled GPU stencils."""

import os

from .area import area, area_parts, calibrate
from .bottleneck import BottleneckReport, decompose, hyperthreading_sweep, saturation
from .codesign import ArchGridSpec, DesignPoint, ParetoSet, codesign, enumerate_archs, pareto, resource_allocation
from .core import (AreaCoeffs, ArchConfig, CalibrationSet, StencilKernel, Strategy, TileConfig,
                   WorkloadSuite, load_arch, load_calibration, load_kernel, load_suite, load_tile)
from .energy import EnergyBreakdown, energy
from .errors import (DomainError, EmptyDesignSpace, EmptyFeasibleSpace, InfeasibleError,
                     NegativeCoeffError, ParseError, RankError, SizeError, StencilDSEError,
                     ValidationError)
from .geometry import assign_tile, check_legality, points_per_hex, schedule
from .memory import FootprintReport, feasible, footprint, tile_traffic
from .time_model import TimeBreakdown, gflops, overhead_closed_form, t_alg, t_ideal, t_prism
from .tuner import Objective, TileGridSpec, TuneResult, enumerate_tiles, prune_by_closed_form, supertune, tune

__all__ = [
    "ArchConfig",
    "ArchGridSpec",
    "area",
    "area_parts",
    "AreaCoeffs",
    "assign_tile",
    "BottleneckReport",
    "calibrate",
    "CalibrationSet",
    "check_legality",
    "codesign",
    "data_path",
    "decompose",
    "DesignPoint",
    "DomainError",
    "EmptyDesignSpace",
    "EmptyFeasibleSpace",
    "energy",
    "EnergyBreakdown",
    "enumerate_archs",
    "enumerate_tiles",
    "feasible",
    "footprint",
    "FootprintReport",
    "gflops",
    "hyperthreading_sweep",
    "InfeasibleError",
    "load_arch",
    "load_calibration",
    "load_kernel",
    "load_suite",
    "load_tile",
    "NegativeCoeffError",
    "Objective",
    "overhead_closed_form",
    "pareto",
    "ParetoSet",
    "ParseError",
    "points_per_hex",
    "prune_by_closed_form",
    "RankError",
    "resource_allocation",
    "saturation",
    "schedule",
    "SizeError",
    "StencilDSEError",
    "StencilKernel",
    "Strategy",
    "supertune",
    "t_alg",
    "t_ideal",
    "t_prism",
    "tile_traffic",
    "TileConfig",
    "TileGridSpec",
    "TimeBreakdown",
    "tune",
    "TuneResult",
    "ValidationError",
    "WorkloadSuite",
]

__version__ = "0.1.0"


def data_path(*parts) -> str:
    """Filesystem path of a fixture shipped in ``stencil_dse/data``."""
    return os.path.join(os.path.dirname(__file__), "data", *parts)
