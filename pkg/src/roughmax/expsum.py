"""Exponential sums over the cutoff window and their second-derivative bounds.

Every operation returns both the exactly computed sum and the bound the
van der Corput machinery predicts for it, so sweeps over dyadic scales can
check that the ratio stays trend-bounded.  The slowly varying factor that
would appear in the c = 1 regime is constantly 1 for c > 1, which is the only
regime wired into the bounds here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyRangeError, PreconditionError, ValidationError
from .growth import InverseFunction
from .kernel import eta
from .util import chunked_sum, dist_to_nearest_int


# ---------------------------------------------------------------------------
# sawtooth and its truncated Fourier series
# ---------------------------------------------------------------------------

def sawtooth(t: float) -> float:
    """Fractional part minus one half; -1/2 at integers."""
    t = float(t)
    return (t - math.floor(t)) - 0.5


@dataclass(frozen=True)
class SawtoothTruncation:
    """Partial Fourier sum of the sawtooth at one point, with its error cap."""

    t: float
    m_terms: int
    value: complex           # conjugate-symmetric sum; imaginary part ~ 0
    residual_bound: float    # min(1, 1/(M * dist to nearest integer))


def sawtooth_truncation(t: float, m_terms: int) -> SawtoothTruncation:
    """Sum of e^{-2 pi i m t} / (2 pi i m) over 0 < |m| <= M, with error cap."""
    if m_terms < 1:
        raise ValidationError(f"truncation order M = {m_terms} must be >= 1")
    m = np.arange(1, m_terms + 1, dtype=float)
    z = np.exp(-2j * np.pi * m * float(t))
    value = complex(chunked_sum((z - np.conj(z)) / (2j * np.pi * m)))
    norm = dist_to_nearest_int(t)
    bound = 1.0 if norm == 0.0 else min(1.0, 1.0 / (m_terms * norm))
    return SawtoothTruncation(float(t), int(m_terms), value, bound)


def coefficient_bound(m: int, m_terms: int) -> float:
    """Cap for the m-th Fourier coefficient of the min(1, 1/(M||t||)) envelope."""
    if m == 0:
        return math.log(m_terms + 1.0) / m_terms
    return min(math.log(m_terms + 1.0) / m_terms, 1.0 / abs(m),
               m_terms / float(m) ** 2)


# ---------------------------------------------------------------------------
# summation by parts
# ---------------------------------------------------------------------------

def abel_sum(u, g: Callable[[int], complex], a: int = 0) -> complex:
    """sum u(n) g(n) over n = a+1..b via partial sums of u.

    Evaluates U(b) g(b) - sum_{n=a+1}^{b-1} U(n) (g(n+1) - g(n)) with
    U(t) = sum_{a+1 <= n <= t} u(n); an exact identity, so it matches the
    direct sum to rounding error on any input.
    """
    u = np.asarray(u)
    if u.size == 0:
        raise EmptyRangeError("summation by parts needs a nonempty range")
    b = a + u.size
    big_u = np.cumsum(u)
    ns = np.arange(a + 1, b)
    gv = np.array([g(int(n)) for n in ns] + [g(int(b))])
    total = big_u[-1] * gv[-1]
    if ns.size:
        total = total - chunked_sum(big_u[:-1] * (gv[1:] - gv[:-1]))
    return complex(total) if np.iscomplexobj(u) or np.iscomplexobj(gv) else float(total)


# ---------------------------------------------------------------------------
# phase sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpSumResult:
    actual: complex
    actual_abs: float
    bound: float
    ratio: float
    params: dict


def _window(n: int, x: int) -> tuple[float, float]:
    """(N_1, N_2): the n-range on which both cutoff factors can be nonzero."""
    n1 = max(n / 2.0, n / 2.0 - x)
    n2 = min(4.0 * n, 4.0 * n - x)
    return n1, n2


def _range_points(n1: float, n_prime: float) -> np.ndarray:
    lo = int(math.floor(n1)) + 1
    hi = int(math.floor(n_prime))
    if hi < lo:
        raise EmptyRangeError(f"empty summation range ({n1}, {n_prime}]")
    return np.arange(lo, hi + 1, dtype=float)


def _validate_window(n: int, x: int, n_prime: float | None) -> tuple[np.ndarray, float]:
    n1, n2 = _window(n, x)
    if n1 >= n2:
        raise EmptyRangeError(f"window ({n1}, {n2}] is empty for N={n}, x={x}")
    if n_prime is None:
        n_prime = n2
    if not (n1 < n_prime <= n2):
        raise ValidationError(f"N' = {n_prime} outside ({n1}, {n2}]")
    return _range_points(n1, n_prime), n_prime


def single_phase_sum(phi: InverseFunction, n: int, x: int, alpha: float,
                     l: int, m: int, p: int, q: int,
                     n_prime: float | None = None) -> ExpSumResult:
    """Sum of e^{2 pi i (alpha l n + m phi(n + p x + q))} over the window.

    The predicted cap is |m|^(1/2) * N / phi(N)^(1/2): one second-derivative
    estimate applied to the phase, whose curvature is controlled by the
    product identity for y^2 phi''(y).
    """
    if m == 0:
        raise ValidationError("phase multiplier m must be nonzero")
    if p not in (0, 1) or q not in (0, 1):
        raise ValidationError("shift selectors p, q must lie in {0, 1}")
    if l < 1:
        raise ValidationError(f"linear multiplier l = {l} must be >= 1")
    ns, n_prime = _validate_window(n, x, n_prime)
    args = ns + p * x + q
    phase = alpha * l * ns + m * np.asarray(phi.value(args), dtype=float)
    actual = complex(chunked_sum(np.exp(2j * np.pi * phase)))
    bound = math.sqrt(abs(m)) * n / math.sqrt(float(phi.value(float(n))))
    return ExpSumResult(actual, abs(actual), bound, abs(actual) / bound,
                        dict(N=n, x=x, alpha=alpha, l=l, m=m, p=p, q=q,
                             N_prime=n_prime))


def two_phase_sum(phi: InverseFunction, n: int, x: int, alpha: float, l: int,
                  m1: int, m2: int, kappa: float,
                  n_prime: float | None = None) -> ExpSumResult:
    """Sum with the two-point phase m1 phi(n) + m2 phi(n + x).

    Requires the separation x >= phi(N)^kappa; the cap is
    m^(2/3) N^(4/3) phi(N)^(-(1+kappa)/3) with m = max(|m1|, |m2|).
    """
    if m1 == 0 or m2 == 0:
        raise ValidationError("phase multipliers m1, m2 must be nonzero")
    if not (0.0 <= kappa <= 1.0):
        raise ValidationError(f"kappa = {kappa} outside [0, 1]")
    if l < 1:
        raise ValidationError(f"linear multiplier l = {l} must be >= 1")
    phin = float(phi.value(float(n)))
    if x < phin ** kappa:
        raise PreconditionError(
            f"separation x = {x} below phi(N)^kappa = {phin ** kappa:.6g}; "
            "the two-point bound does not apply")
    ns, n_prime = _validate_window(n, x, n_prime)
    phase = (alpha * l * ns
             + m1 * np.asarray(phi.value(ns), dtype=float)
             + m2 * np.asarray(phi.value(ns + x), dtype=float))
    actual = complex(chunked_sum(np.exp(2j * np.pi * phase)))
    m = max(abs(m1), abs(m2))
    bound = m ** (2.0 / 3.0) * n ** (4.0 / 3.0) * phin ** (-(1.0 + kappa) / 3.0)
    return ExpSumResult(actual, abs(actual), bound, abs(actual) / bound,
                        dict(N=n, x=x, alpha=alpha, l=l, m1=m1, m2=m2,
                             kappa=kappa, N_prime=n_prime))


def weighted_sum_bound_check(phi: InverseFunction, n: int, x: int, alpha: float,
                             l: int, weight: Callable[[np.ndarray], np.ndarray],
                             mode: str, m: int = 1, m1: int = 1, m2: int = 1,
                             kappa: float = 1.0, p: int = 0, q: int = 0,
                             n_prime: float | None = None) -> ExpSumResult:
    """Phase sum carrying an arithmetic weight, with the summed-by-parts cap.

    The cap multiplies the unweighted bound by sup|F| + N sup|F(n+1) - F(n)|,
    both taken over the realized range.
    """
    if mode not in ("single", "two"):
        raise ValidationError(f"mode {mode!r} not in {{single, two}}")
    if mode == "single":
        base = single_phase_sum(phi, n, x, alpha, l, m, p, q, n_prime)
    else:
        base = two_phase_sum(phi, n, x, alpha, l, m1, m2, kappa, n_prime)
    n1, _ = _window(n, x)
    ns = _range_points(n1, base.params["N_prime"])
    f_here = np.asarray(weight(ns), dtype=float)
    f_next = np.asarray(weight(ns + 1.0), dtype=float)
    sup_f = float(np.max(np.abs(f_here)))
    sup_df = float(np.max(np.abs(f_next - f_here)))
    if mode == "single":
        args = ns + p * x + q
        phase = alpha * l * ns + m * np.asarray(phi.value(args), dtype=float)
    else:
        phase = (alpha * l * ns
                 + m1 * np.asarray(phi.value(ns), dtype=float)
                 + m2 * np.asarray(phi.value(ns + x), dtype=float))
    actual = complex(chunked_sum(np.exp(2j * np.pi * phase) * f_here))
    bound = base.bound * (sup_f + n * sup_df)
    params = dict(base.params)
    params.update(mode=mode, sup_weight=sup_f, sup_weight_diff=sup_df)
    return ExpSumResult(actual, abs(actual), bound, abs(actual) / bound, params)


def min_norm_sum(phi: InverseFunction, n: int, x: int, m_terms: int,
                 p: int, q: int) -> tuple[float, float]:
    """Sum of min(1, 1/(M ||phi(n + p x + q)||)) across the cutoff window.

    Returns (actual, bound) with the cap N log M / M
    + N sqrt(M) log M / sqrt(phi(N)).
    """
    if m_terms < 2:
        raise ValidationError(f"M = {m_terms} must be >= 2")
    if p not in (0, 1) or q not in (0, 1):
        raise ValidationError("shift selectors p, q must lie in {0, 1}")
    n1, n2 = _window(n, x)
    if n1 >= n2:
        return 0.0, _min_norm_bound(phi, n, m_terms)
    ns = _range_points(n1, n2)
    vals = np.asarray(phi.value(ns + p * x + q), dtype=float)
    norms = dist_to_nearest_int(vals)
    with np.errstate(divide="ignore"):
        caps = np.minimum(1.0, 1.0 / (m_terms * norms))
    w = np.asarray(eta(ns / n), dtype=float) * np.asarray(eta((ns + x) / n), dtype=float)
    actual = float(chunked_sum(caps * w))
    return actual, _min_norm_bound(phi, n, m_terms)


def _min_norm_bound(phi: InverseFunction, n: int, m_terms: int) -> float:
    phin = float(phi.value(float(n)))
    logm = math.log(m_terms)
    return n * logm / m_terms + n * math.sqrt(m_terms) * logm / math.sqrt(phin)


# ---------------------------------------------------------------------------
# designated sweeps
# ---------------------------------------------------------------------------

ALPHA_GOLDEN = 0.6180339887498949


def resonant_alpha(phi: InverseFunction, n: int, slope_mult: float) -> float:
    """The alpha that cancels the phase slope at the window center.

    With this alpha the linear term tunes slope_mult * phi' to an integer at
    n = 2N, which is where the phase sum actually attains its cap; probing it
    turns the sweep into a worst-case test instead of a lottery over
    accidental resonances.
    """
    s = slope_mult * float(phi.deriv(2.0 * n, 1))
    return float(math.ceil(s) - s) % 1.0


def _alpha_probes(phi: InverseFunction, n: int, slope_mult: float) -> tuple:
    return (0.0, resonant_alpha(phi, n, slope_mult), 0.25, ALPHA_GOLDEN)


def ratio_sweep(phi: InverseFunction, mode: str, m: int, k_lo: int, k_hi: int,
                kappa: float = 1.0) -> list[ExpSumResult]:
    """Worst-ratio-per-scale sweep for the phase-sum bounds.

    For each dyadic N = 2^k the ratio is maximized over a fixed probe set of
    linear coefficients alpha (zero, the slope-cancelling value, 1/4, and the
    golden ratio); the returned per-scale results are what trend-boundedness
    assertions run on.
    """
    if mode not in ("single", "two"):
        raise ValidationError(f"mode {mode!r} not in {{single, two}}")
    out = []
    for k in range(k_lo, k_hi + 1):
        n = 1 << k
        best: ExpSumResult | None = None
        if mode == "single":
            probes = _alpha_probes(phi, n, m)
            for al in probes:
                r = single_phase_sum(phi, n, 0, al, 1, m, 0, 0)
                if best is None or r.ratio > best.ratio:
                    best = r
        else:
            x = int(math.ceil(float(phi.value(float(n))) ** kappa))
            probes = _alpha_probes(phi, n, 2 * m)
            for al in probes:
                r = two_phase_sum(phi, n, x, al, 1, m, m, kappa)
                if best is None or r.ratio > best.ratio:
                    best = r
        out.append(best)
    return out
