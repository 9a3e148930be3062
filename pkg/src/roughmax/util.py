"""Small numeric helpers used by several modules."""

from __future__ import annotations

import math

import numpy as np

from .errors import InsufficientDataError

# Ordered, fixed-size chunking keeps every reduction bit-stable regardless of
# how the work would be split across workers.
CHUNK = 1 << 16
COMPENSATED_THRESHOLD = 1 << 20


def chunked_sum(values: np.ndarray) -> complex | float:
    """Deterministic sum: pairwise per fixed chunk, exact fsum of the chunk totals.

    Below COMPENSATED_THRESHOLD terms plain pairwise summation is already
    accurate to ~1e-13 relative; above it the fsum of chunk totals keeps the
    accumulated error independent of length.
    """
    v = np.asarray(values)
    if v.size <= COMPENSATED_THRESHOLD:
        return complex(v.sum()) if np.iscomplexobj(v) else float(v.sum())
    parts = [v[i:i + CHUNK].sum() for i in range(0, v.size, CHUNK)]
    if np.iscomplexobj(v):
        return complex(math.fsum(p.real for p in parts),
                       math.fsum(p.imag for p in parts))
    return math.fsum(float(p) for p in parts)


def log_spaced(lo: float, hi: float, n: int) -> np.ndarray:
    """n log-spaced points in [lo, hi], endpoints included."""
    if lo <= 0 or hi < lo:
        raise ValueError(f"log grid needs 0 < lo <= hi, got [{lo}, {hi}]")
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log2(y) against log2(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("need at least two points for a slope")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires positive data")
    return float(np.polyfit(np.log2(x), np.log2(y), 1)[0])


def dist_to_nearest_int(t: np.ndarray | float) -> np.ndarray | float:
    """Distance to the nearest integer, |t - round(t)| with round-half-even."""
    t = np.asarray(t, dtype=float)
    d = np.abs(t - np.rint(t))
    return float(d) if d.ndim == 0 else d
