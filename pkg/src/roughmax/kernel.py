"""Smoothed averaging kernels on the integer set, and their autocorrelation.

The kernel at scale N places mass eta(n/N)/norm on every set element n, with
eta a fixed smooth cutoff (1 on [1, 2], supported in (1/2, 4)) and norm either
the exact element count up to N or the inverse-function value phi(N).

The autocorrelation splits, away from zero, into a slowly varying profile

    G_N(x) = phi(N)^-2 * sum_n phi'(n) phi'(n + |x|) eta(n/N) eta((n+|x|)/N)

plus a small error; the decomposition report measures the size of both pieces
and the smoothness of G_N across a dyadic sweep of scales.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InsufficientDataError, RangeError
from .growth import InverseFunction
from .seqset import SequenceSet, count
from .signals import Signal, autocorrelation_signal, convolve
from .util import loglog_slope

__all__ = [
    "Normalization", "Kernel", "DecompositionReport", "eta",
    "build_kernel", "autocorrelation", "compute_gn", "gn_profile",
    "decomposition_report", "estimate_chi",
]


# ---------------------------------------------------------------------------
# the cutoff
# ---------------------------------------------------------------------------

def _bump_ratio(u: np.ndarray) -> np.ndarray:
    """exp(-1/u) / (exp(-1/u) + exp(-1/(1-u))) on (0, 1): a smooth 0 -> 1 step."""
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    a = np.exp(-1.0 / u)
    b = np.exp(-1.0 / (1.0 - u))
    return a / (a + b)


def eta(t) -> np.ndarray | float:
    """Fixed smooth cutoff: 0 off (1/2, 4), 1 on [1, 2], smooth joins between.

    The rise on (1/2, 1) and fall on (2, 4) are the standard exp(-1/t) bump
    steps, pinned here once so every experiment is reproducible.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[(t >= 1.0) & (t <= 2.0)] = 1.0
    m = (t > 0.5) & (t < 1.0)
    if m.any():
        out[m] = _bump_ratio(2.0 * t[m] - 1.0)
    m = (t > 2.0) & (t < 4.0)
    if m.any():
        out[m] = 1.0 - _bump_ratio((t[m] - 2.0) / 2.0)
    return float(out) if out.ndim == 0 else out


class Normalization(enum.Enum):
    COUNT_EXACT = "count"   # exact |set ∩ [1, N]|
    PHI_APPROX = "phi"      # phi(N)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """Nonnegative averaging kernel at scale N; immutable."""

    scale_n: int
    normalization: Normalization
    norm_value: float
    signal: Signal

    def mass(self) -> float:
        return self.signal.sum()


def build_kernel(s: SequenceSet, phi: InverseFunction, n: int,
                 normalization: Normalization = Normalization.COUNT_EXACT) -> Kernel:
    """Kernel value eta(m/N)/norm at every set element m with eta(m/N) != 0."""
    n = int(n)
    if 4 * n > s.n_max:
        raise RangeError(f"kernel at N = {n} needs n_max >= 4N, have {s.n_max}")
    cnt = count(s, n)
    if cnt == 0:
        raise DegenerateError(f"no set elements in [1, {n}]")
    if normalization is Normalization.COUNT_EXACT:
        norm = float(cnt)
    else:
        norm = float(phi.value(float(n)))
    lo = int(np.searchsorted(s.elements, n // 2, side="right"))
    hi = int(np.searchsorted(s.elements, 4 * n, side="left"))
    els = s.elements[lo:hi]
    vals = np.asarray(eta(els / float(n)), dtype=float) / norm
    if els.size == 0:
        raise DegenerateError(f"no set elements in the support window of N = {n}")
    dense = np.zeros(int(els[-1] - els[0] + 1))
    dense[els - els[0]] = vals
    k = Kernel(n, normalization, norm, Signal(int(els[0]), dense))
    total = k.mass()
    if not (0.0 < total <= 8.0):
        raise DegenerateError(f"kernel mass {total} outside (0, 8]")
    return k


def autocorrelation(k: Kernel, method: str = "fast") -> Signal:
    """K correlated with its reflection; exactly even by construction."""
    return autocorrelation_signal(k.signal, method)


# ---------------------------------------------------------------------------
# the slowly varying profile G_N
# ---------------------------------------------------------------------------

def _density_window(phi: InverseFunction, n: int) -> tuple[int, np.ndarray]:
    """(first index, phi'(m) * eta(m/N)) over the cutoff support window."""
    lo = n // 2 + 1
    hi = 4 * n - 1
    m = np.arange(lo, hi + 1, dtype=float)
    w = np.asarray(phi.deriv(m, 1), dtype=float) * np.asarray(eta(m / n), dtype=float)
    return lo, w


def compute_gn(phi: InverseFunction, n: int, x: int) -> float:
    """G_N(x) by direct summation; the reference path for single points."""
    ax = abs(int(x))
    lo, w = _density_window(phi, n)
    if ax >= w.size:
        return 0.0
    phin = float(phi.value(float(n)))
    if ax == 0:
        return float(np.dot(w, w)) / phin ** 2
    return float(np.dot(w[:-ax], w[ax:])) / phin ** 2


def gn_profile(phi: InverseFunction, n: int) -> Signal:
    """G_N at every lag at once: the autocorrelation of the density window.

    Matches compute_gn pointwise (transform-based, 1e-9 per coefficient) but
    costs O(N log N) for the whole profile, so the large-lag region can be
    scanned exhaustively instead of sampled.
    """
    lo, w = _density_window(phi, n)
    phin = float(phi.value(float(n)))
    prof = autocorrelation_signal(Signal(lo, w), "fast")
    return prof * (1.0 / phin ** 2)


# ---------------------------------------------------------------------------
# decomposition report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionReport:
    """Scale-N measurements of the autocorrelation decomposition.

    small_x_bound  max of N * |autocorr(x)| over 0 < |x| <= phi(N)
    gn_sup         max of N * |G_N(x)| over |x| > phi(N)
    en_sup         max of |autocorr(x) - G_N(x)| over |x| > phi(N)
    gn_lipschitz   max of N^2 |G_N(x+d) - G_N(x)| / d, d in {1,2,4,8},
                   both points beyond phi(N)
    mass           total autocorrelation mass (equals kernel mass squared)
    """

    scale_n: int
    small_x_bound: float
    gn_sup: float
    en_sup: float
    gn_lipschitz: float
    mass: float


_LIPSCHITZ_STEPS = (1, 2, 4, 8)


def decomposition_report(k: Kernel, phi: InverseFunction) -> DecompositionReport:
    n = k.scale_n
    phin = float(phi.value(float(n)))
    cut = int(math.floor(phin))

    acorr = autocorrelation(k)
    gn = gn_profile(phi, n)

    half = max(acorr.support[1], gn.support[1], cut + 1)
    xs = np.arange(0, half + 1)
    a = acorr(xs)
    g = gn(xs)

    small = float(np.max(np.abs(a[1:cut + 1]))) if cut >= 1 else 0.0
    large_a = a[cut + 1:]
    large_g = g[cut + 1:]
    en_sup = float(np.max(np.abs(large_a - large_g))) if large_a.size else 0.0
    gn_sup = float(np.max(np.abs(large_g))) * n if large_g.size else 0.0

    lip = 0.0
    tail = g[cut + 1:]
    for d in _LIPSCHITZ_STEPS:
        if tail.size > d:
            lip = max(lip, float(np.max(np.abs(tail[d:] - tail[:-d]))) / d)
    return DecompositionReport(
        scale_n=n,
        small_x_bound=n * small,
        gn_sup=gn_sup,
        en_sup=en_sup,
        gn_lipschitz=n * n * lip,
        mass=acorr.sum(),
    )


def estimate_chi(reports: list[DecompositionReport]) -> float:
    """Error-decay exponent: -(slope of log2 en_sup against log2 N) - 1."""
    if len({r.scale_n for r in reports}) < 4:
        raise InsufficientDataError("need reports at >= 4 distinct scales")
    ns = np.array([r.scale_n for r in reports], dtype=float)
    es = np.array([r.en_sup for r in reports], dtype=float)
    return -loglog_slope(ns, es) - 1.0
