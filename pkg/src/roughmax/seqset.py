"""The integer set {floor(h(m)) : m integer} with dual membership tests.

Floors are never trusted to plain float arithmetic: any value landing within
a few ulps (or within the inversion tolerance band) of an integer is settled
by a high-precision sign test of h(r) - y at the nearest integer r, so the
enumeration path and the inverse-function path stay exactly consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import (
    DomainError,
    FloorAmbiguityError,
    RangeError,
    SequenceOverflowError,
    ValidationError,
)
from .growth import MP_DPS, GrowthFunction, InverseFunction
from .util import chunked_sum

N_MAX_CAP = 1 << 40
P_MIN_WINDOW = 1 << 16
MP_ZERO_BAND = mpmath.mpf("1e-40")


# ---------------------------------------------------------------------------
# guarded floors
# ---------------------------------------------------------------------------

def _sign_at_integer(g: GrowthFunction, r: int, y: int) -> int:
    """Sign of h(r) - y, with |h(r) - y| below 1e-40 * y treated as exact zero."""
    with mpmath.workdps(MP_DPS):
        s = g.value_mp(r) - y
        if abs(s) <= MP_ZERO_BAND * max(1, abs(y)):
            return 0
        return 1 if s > 0 else -1


def floor_neg_phi(phi: InverseFunction, p: int, tol: float | None = None,
                  resolve: bool = True) -> int:
    """floor(-phi(p)) with the floor decided, never guessed.

    If phi(p) falls within 10 * tol * |phi(p)| of an integer the float floor is
    undecidable; with ``resolve`` the value is settled by a high-precision sign
    test at the nearest integer, otherwise a FloorAmbiguityError is raised so
    the caller can retry at higher precision.
    """
    tol = phi.tol if tol is None else tol
    x = float(phi.value(float(p), tol=tol))
    r = round(x)
    band = max(10.0 * tol * abs(x), 8.0 * math.ulp(x))
    if abs(x - r) > band:
        return -math.ceil(x)
    if not resolve:
        raise FloorAmbiguityError(
            f"phi({p}) = {x!r} is within {band:.3e} of integer {r}",
            value=x, nearest=r)
    s = _sign_at_integer(phi.source, r, p)
    # s < 0: h(r) < p so phi(p) > r and ceil = r + 1; otherwise ceil = r
    return -(r + 1) if s < 0 else -r


def contains_via_inverse(phi: InverseFunction, p: int) -> bool:
    """Inverse-function membership test: floor(-phi(p)) - floor(-phi(p+1)) == 1.

    Valid for p at and above the empirical threshold of the generated set;
    ambiguous floors are retried at a 1000x tighter tolerance before the
    high-precision resolution kicks in.
    """
    if p < phi.y0 * (1.0 - 1e-12):
        raise DomainError(f"p = {p} below the inverse domain start {phi.y0}")
    floors = []
    for q in (p, p + 1):
        try:
            floors.append(floor_neg_phi(phi, q, resolve=False))
        except FloorAmbiguityError:
            try:
                floors.append(floor_neg_phi(phi, q, tol=phi.tol * 1e-3,
                                            resolve=False))
            except FloorAmbiguityError:
                floors.append(floor_neg_phi(phi, q, tol=phi.tol * 1e-3))
    return floors[0] - floors[1] == 1


def _floor_neg_phi_batch(phi: InverseFunction, p: np.ndarray) -> np.ndarray:
    """Vectorized floor(-phi(p)) with escalation on the ambiguous stragglers."""
    x = np.asarray(phi.value(p.astype(float)), dtype=float)
    r = np.rint(x)
    band = np.maximum(10.0 * phi.tol * np.abs(x), 8.0 * np.spacing(np.abs(x)))
    near = np.abs(x - r) <= band
    out = -np.ceil(x).astype(np.int64)
    idx = np.nonzero(near)[0]
    if idx.size:
        xt = np.asarray(phi.value(p[idx].astype(float), tol=phi.tol * 1e-3),
                        dtype=float)
        rt = np.rint(xt)
        band_t = np.maximum(1e-2 * phi.tol * np.abs(xt),
                            8.0 * np.spacing(np.abs(xt)))
        still = np.abs(xt - rt) <= band_t
        out[idx[~still]] = -np.ceil(xt[~still]).astype(np.int64)
        for k in np.nonzero(still)[0]:
            j = idx[k]
            s = _sign_at_integer(phi.source, int(rt[k]), int(p[j]))
            out[j] = -(int(rt[k]) + 1) if s < 0 else -int(rt[k])
    return out


def contains_via_inverse_batch(phi: InverseFunction, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.int64)
    if p.size == 0:
        return np.zeros(0, dtype=bool)
    if p.min() < phi.y0 * (1.0 - 1e-12):
        raise DomainError(f"p below the inverse domain start {phi.y0}")
    lo = _floor_neg_phi_batch(phi, p)
    hi = _floor_neg_phi_batch(phi, p + 1)
    return (lo - hi) == 1


# ---------------------------------------------------------------------------
# the set itself
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceSet:
    """Sorted floors of h over the integers, in [1, n_max], with O(1) membership.

    Immutable after generation; every query is pure.
    """

    growth: GrowthFunction
    n_max: int
    elements: np.ndarray       # sorted distinct int64 in [1, n_max]
    member_mask: np.ndarray    # bool, indexed 0..n_max
    p_min: int                 # inverse-test agreement threshold

    def contains(self, p: int) -> bool:
        if not (1 <= p <= self.n_max):
            raise RangeError(f"p = {p} outside [1, {self.n_max}]")
        return bool(self.member_mask[p])

    def contains_batch(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.int64)
        if p.size and (p.min() < 1 or p.max() > self.n_max):
            raise RangeError("query outside [1, n_max]")
        return self.member_mask[p]


def generate(g: GrowthFunction, n_max: int) -> SequenceSet:
    """Enumerate {floor(h(m))} ∩ [1, n_max] with exact floors near integers."""
    n_max = int(n_max)
    if n_max > N_MAX_CAP:
        raise ValidationError(f"n_max = {n_max} above the 2^40 cap")
    y0 = float(g.value(g.x0))
    if n_max < y0:
        raise RangeError(f"n_max = {n_max} below h(x0) = {y0}")
    phi = g.inverse()
    x_end = float(phi.value(float(n_max) + 1.0))
    m_start = int(math.ceil(g.x0 - 1e-12))
    m_end = int(math.floor(x_end)) + 2
    if m_end < m_start:
        raise RangeError("empty enumeration range")

    m = np.arange(m_start, m_end + 1, dtype=np.int64)
    v = np.asarray(g.value(m.astype(float)), dtype=float)
    if not np.all(np.isfinite(v)) or v.max() >= float(1 << 62):
        raise SequenceOverflowError("h(m) exceeds the 64-bit integer range")

    if g.variant.value == "pure" and g.c == 1.0 and g.c_h == 1.0:
        floors = m.copy()
    else:
        floors = np.floor(v).astype(np.int64)
        r = np.rint(v)
        near = np.abs(v - r) <= 32.0 * np.spacing(np.abs(v))
        for j in np.nonzero(near)[0]:
            ri = int(r[j])
            s = _sign_at_integer(g, int(m[j]), ri)
            # h(m) >= ri exactly when s >= 0, so the floor is ri; else ri - 1
            floors[j] = ri if s >= 0 else ri - 1

    keep = (floors >= 1) & (floors <= n_max)
    elements = np.unique(floors[keep])
    mask = np.zeros(n_max + 1, dtype=bool)
    mask[elements] = True

    p_min = _calibrate_p_min(g, phi, elements, mask, n_max, y0)
    return SequenceSet(g, n_max, elements, mask, p_min)


def _calibrate_p_min(g, phi, elements, mask, n_max, y0) -> int:
    """Smallest p >= 16 past which the two membership tests agree on a window."""
    lo = max(16, int(math.ceil(y0 - 1e-9)))
    hi = min(n_max - 1, P_MIN_WINDOW)
    if hi <= lo:
        return lo
    p = np.arange(lo, hi + 1, dtype=np.int64)
    agree = contains_via_inverse_batch(phi, p) == mask[p]
    if not agree[-1] or not agree[-min(16, agree.size):].all():
        raise ValidationError(
            "membership tests disagree through the calibration window")
    bad = np.nonzero(~agree)[0]
    return int(p[bad[-1]] + 1) if bad.size else lo


def count(s: SequenceSet, n: int) -> int:
    """|elements ∩ [1, n]| by binary search."""
    if not (1 <= n <= s.n_max):
        raise RangeError(f"N = {n} outside [1, {s.n_max}]")
    return int(np.searchsorted(s.elements, n, side="right"))


def verify_membership_equivalence(s: SequenceSet, phi: InverseFunction,
                                  lo: int, hi: int) -> int:
    """Number of p in [lo, hi] where the two membership tests disagree."""
    if lo < s.p_min:
        raise RangeError(f"lo = {lo} below the agreement threshold {s.p_min}")
    if hi > s.n_max - 1:
        raise RangeError("hi beyond n_max - 1")
    p = np.arange(lo, hi + 1, dtype=np.int64)
    agree = contains_via_inverse_batch(phi, p) == s.member_mask[p]
    return int(np.count_nonzero(~agree))


def weighted_exp_sum(s: SequenceSet, phi: InverseFunction, alpha: float,
                     n: int) -> tuple[complex, float]:
    """Density-weighted exponential sum over the set, and its residual.

    Returns (S_w, R) where S_w = sum over set elements n' <= n of
    h'(phi(n')) * e^{2 pi i alpha n'} and R is the distance of S_w from the
    plain full-range sum over all integers 1..n.
    """
    if not (1 <= n <= s.n_max):
        raise RangeError(f"N = {n} outside [1, {s.n_max}]")
    if not (0.0 <= alpha <= 1.0):
        raise ValidationError(f"alpha = {alpha} outside [0, 1]")
    k = int(np.searchsorted(s.elements, n, side="right"))
    els = s.elements[:k].astype(float)
    u = np.asarray(phi.value(els), dtype=float)
    w = np.asarray(s.growth.deriv(u, 1), dtype=float)
    s_w = chunked_sum(w * np.exp(2j * np.pi * alpha * els))
    full = chunked_sum(np.exp(2j * np.pi * alpha * np.arange(1, n + 1, dtype=float)))
    return complex(s_w), abs(complex(s_w) - complex(full))
