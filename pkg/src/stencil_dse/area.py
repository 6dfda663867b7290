"""Block-additive silicon area model and its least-squares calibration."""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import COEFF_NAMES, KIB, AreaCoeffs, load_arch, read_json
from .errors import NegativeCoeffError, ParseError, RankError, ValidationError


def area_features(arch) -> dict:
    """Multiplier of each coefficient in the area sum for ``arch``."""
    m_sm_kib = arch.m_sm / KIB
    return {
        "a_fixed": 1.0,
        "a_sm_fixed": float(arch.n_sm),
        "a_lane": float(arch.n_sm * arch.n_v),
        "a_shmem": arch.n_sm * m_sm_kib,
        "a_l2": arch.l2_bytes / KIB,
        "a_mc": float(arch.mem_ctrl_count),
    }


def area(arch, coeffs: AreaCoeffs) -> float:
    """Die area in mm^2.

    ``a_fixed + n_sm*(a_sm_fixed + a_lane*n_v + a_shmem*m_sm_KiB)
    + a_l2*l2_KiB + a_mc*mem_ctrl_count``
    """
    per_sm = coeffs.a_sm_fixed + coeffs.a_lane * arch.n_v + coeffs.a_shmem * (arch.m_sm / KIB)
    return (coeffs.a_fixed + arch.n_sm * per_sm + coeffs.a_l2 * (arch.l2_bytes / KIB)
            + coeffs.a_mc * arch.mem_ctrl_count)


def area_parts(arch, coeffs: AreaCoeffs) -> dict:
    """Area split into shared memory, L2, vector lanes and everything else."""
    return {
        "shmem": arch.n_sm * coeffs.a_shmem * (arch.m_sm / KIB),
        "l2": coeffs.a_l2 * (arch.l2_bytes / KIB),
        "vector": arch.n_sm * coeffs.a_lane * arch.n_v,
        "other": coeffs.a_fixed + arch.n_sm * coeffs.a_sm_fixed + coeffs.a_mc * arch.mem_ctrl_count,
    }


def calibrate(anchors: Sequence, free: Iterable[str], fixed: Optional[AreaCoeffs] = None,
              neg_tol: float = 1e-12) -> AreaCoeffs:
    """Least-squares fit of the ``free`` coefficients; the rest come from ``fixed``.

    ``anchors`` is a sequence of ``(ArchConfig, measured_mm2)`` pairs.
    Without ``fixed`` the coefficients not being fitted are held at zero.
    """
    requested = set(free)
    unknown = requested - set(COEFF_NAMES)
    free = [name for name in COEFF_NAMES if name in requested]
    if unknown:
        raise ValidationError("free", f"unknown coefficients {sorted(unknown)}")
    if not free:
        raise ValidationError("free", "nothing to calibrate")
    anchors = list(anchors)
    if len(anchors) < len(free):
        raise RankError(f"{len(anchors)} anchors cannot determine {len(free)} coefficients")

    base = fixed.as_dict() if fixed is not None else dict.fromkeys(COEFF_NAMES, 0.0)
    rows, rhs = [], []
    for arch, measured in anchors:
        feats = area_features(arch)
        rows.append([feats[name] for name in free])
        held = sum(base[name] * feats[name] for name in COEFF_NAMES if name not in free)
        rhs.append(measured - held)
    A = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    if np.linalg.matrix_rank(A) < len(free):
        raise RankError("anchor set is degenerate for the requested coefficients")
    # column scaling keeps the fit well conditioned when features span decades
    scale = np.linalg.norm(A, axis=0)
    x, *_ = np.linalg.lstsq(A / scale, b, rcond=None)
    x = x / scale

    fitted = dict(base)
    fitted.update({name: float(v) for name, v in zip(free, x)})
    bound = neg_tol * max(1.0, max(abs(v) for v in fitted.values()))
    negative = [name for name in free if fitted[name] < -bound]
    if negative:
        raise NegativeCoeffError(fitted, f"negative fitted coefficients: {', '.join(negative)}")
    for name in free:
        fitted[name] = max(fitted[name], 0.0)
    return AreaCoeffs(**fitted)


def load_anchors(path) -> list:
    """Read ``[{arch: path, area_mm2}, ...]``; arch paths are relative to the file."""
    data = read_json(path)
    if not isinstance(data, list):
        raise ParseError(f"{path}: anchor file must be a JSON array")
    base = os.path.dirname(os.path.abspath(path))
    anchors = []
    for item in data:
        if not isinstance(item, Mapping) or "arch" not in item or "area_mm2" not in item:
            raise ParseError(f"{path}: anchor entries need 'arch' and 'area_mm2'")
        anchors.append((load_arch(os.path.join(base, item["arch"])), item["area_mm2"]))
    return anchors
