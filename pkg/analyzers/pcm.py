"""
Partial Curve Mapping dissimilarity between two throughput curves.

Both curves are put in the reference's frame (time span, value range) and the
area enclosed between them is summed. Two area rules:

- ``trapezoidal``: points are paired at equal normalised time and the gap is
  integrated with the trapezoidal rule over the vertices of both curves plus a
  uniform grid of ``resample_count`` points, which resolves crossings.
- ``arc_length``: points are paired at equal fractions of each curve's own arc
  length, over the breakpoints of both curves, and the quadrilaterals between
  consecutive pairs are summed.

Both rules keep every vertex of both curves. Within one frame (``time_only``, or a
reference with zero value range) the result does not depend on argument order.
"""

from typing import Tuple

import numpy as np

from models.detector_models import PcmConfig
from models.workload_models import ThroughputTrace
from utils.errors import ValidationError

RANGE_EPSILON = 1e-12


def _as_xy(curve) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(curve, ThroughputTrace):
        return curve.times, curve.values
    arr = np.asarray(curve, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("curve must be a sequence of (t, value) pairs")
    return arr[:, 0], arr[:, 1]


def _arc_fractions(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    steps = np.hypot(np.diff(x), np.diff(y))
    cumulative = np.concatenate([[0.0], np.cumsum(steps)])
    total = cumulative[-1]
    if total <= RANGE_EPSILON:
        return np.linspace(0.0, 1.0, len(x))
    return cumulative / total


def normalize_pair(candidate, reference, cfg: PcmConfig = PcmConfig()):
    """Both curves in the reference frame; returns ((cx, cy), (rx, ry))"""
    ct, cy = _as_xy(candidate)
    rt, ry = _as_xy(reference)
    if len(ct) < 2 or len(rt) < 2:
        raise ValidationError("PCM needs curves with at least 2 points")

    t0, span = rt[0], rt[-1] - rt[0]
    if span <= 0:
        raise ValidationError("reference curve must span a positive time interval")
    if np.any(np.diff(ct) <= 0):
        raise ValidationError("candidate curve times must be strictly increasing")
    low = float(ry.min())
    value_range = float(ry.max()) - low
    scale = value_range if cfg.normalization == "reference_range" and value_range > RANGE_EPSILON else 1.0
    return ((ct - t0) / span, (cy - low) / scale), ((rt - t0) / span, (ry - low) / scale)


def _trapezoidal_area(cx, cy, rx, ry, resample_count: int) -> float:
    low, high = max(cx[0], rx[0]), min(cx[-1], rx[-1])
    if high <= low:
        raise ValidationError("curves do not overlap in time")
    grid = np.union1d(np.union1d(cx, rx), np.linspace(low, high, resample_count))
    grid = grid[(grid >= low) & (grid <= high)]
    gap = np.abs(np.interp(grid, cx, cy) - np.interp(grid, rx, ry))
    return float(np.sum(0.5 * (gap[:-1] + gap[1:]) * np.diff(grid)))


def _arc_length_area(cx, cy, rx, ry) -> float:
    c_frac = _arc_fractions(cx, cy)
    r_frac = _arc_fractions(rx, ry)
    s = np.union1d(c_frac, r_frac)
    px, py = np.interp(s, c_frac, cx), np.interp(s, c_frac, cy)
    qx, qy = np.interp(s, r_frac, rx), np.interp(s, r_frac, ry)

    # Quadrilateral P_k P_k+1 Q_k+1 Q_k: half the cross product of its diagonals
    d1x, d1y = qx[1:] - px[:-1], qy[1:] - py[:-1]
    d2x, d2y = qx[:-1] - px[1:], qy[:-1] - py[1:]
    return float(np.sum(0.5 * np.abs(d1x * d2y - d1y * d2x)))


def pcm_distance(candidate, reference, cfg: PcmConfig = PcmConfig()) -> float:
    """Non-negative dissimilarity; 0 for identical curves"""
    (cx, cy), (rx, ry) = normalize_pair(candidate, reference, cfg)
    if cfg.area_rule == "arc_length":
        return _arc_length_area(cx, cy, rx, ry)
    return _trapezoidal_area(cx, cy, rx, ry, cfg.resample_count)
