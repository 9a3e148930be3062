"""Averages along the integer set under iterates of a finite permutation.

Finite uniform-measure systems stand in for general measure-preserving
dynamics at desk scale: a permutation of {0, ..., m-1} is invertible and
preserves counting measure, and its cycle structure makes T^n x an O(1)
lookup for any n after linear preprocessing.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, RangeError, ValidationError
from .growth import InverseFunction
from .seqset import SequenceSet, count
from .util import chunked_sum


@dataclass(frozen=True)
class FiniteSystem:
    """A permutation system: states 0..size-1, uniform measure, map a bijection."""

    size: int
    mapping: np.ndarray
    tag: str = ""
    _cycles: tuple = field(repr=False, default=())
    _cycle_id: np.ndarray = field(repr=False, default=None)
    _cycle_pos: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def from_mapping(mapping, tag: str = "") -> "FiniteSystem":
        mapping = np.asarray(mapping, dtype=np.int64)
        m = mapping.size
        if m == 0:
            raise ValidationError("a system needs at least one state")
        if not np.array_equal(np.sort(mapping), np.arange(m)):
            raise ValidationError("the map must be a permutation of 0..m-1")
        cycles = []
        cid = np.full(m, -1, dtype=np.int64)
        cpos = np.zeros(m, dtype=np.int64)
        for start in range(m):
            if cid[start] >= 0:
                continue
            cyc = []
            x = start
            while cid[x] < 0:
                cid[x] = len(cycles)
                cpos[x] = len(cyc)
                cyc.append(x)
                x = int(mapping[x])
            cycles.append(np.array(cyc, dtype=np.int64))
        return FiniteSystem(m, mapping, tag, tuple(cycles), cid, cpos)

    def iterate(self, x: int, n) -> np.ndarray | int:
        """T^n x via the cycle of x; n may be a scalar or an array."""
        if not (0 <= x < self.size):
            raise RangeError(f"state {x} outside 0..{self.size - 1}")
        cyc = self._cycles[self._cycle_id[x]]
        pos = int(self._cycle_pos[x])
        n = np.asarray(n, dtype=np.int64)
        out = cyc[(pos + n) % cyc.size]
        return int(out) if out.ndim == 0 else out


def cyclic_shift(m: int, step: int = 1) -> FiniteSystem:
    return FiniteSystem.from_mapping((np.arange(m) + step) % m,
                                     tag=f"shift:{m}:{step}")


def identity_system(m: int) -> FiniteSystem:
    return FiniteSystem.from_mapping(np.arange(m), tag=f"identity:{m}")


def random_permutation(m: int, seed: int) -> FiniteSystem:
    rng = np.random.default_rng(seed)
    return FiniteSystem.from_mapping(rng.permutation(m),
                                     tag=f"random:{m}:{seed}")


def _f_values(sys: FiniteSystem, f) -> np.ndarray:
    if callable(f):
        return np.array([float(f(x)) for x in range(sys.size)])
    v = np.asarray(f, dtype=float)
    if v.size != sys.size:
        raise ValidationError(f"observable has {v.size} values, system has {sys.size}")
    return v


def indicator(sys_size: int, state: int) -> np.ndarray:
    v = np.zeros(sys_size)
    v[state] = 1.0
    return v


# ---------------------------------------------------------------------------
# averages
# ---------------------------------------------------------------------------

def _orbit_terms(sys: FiniteSystem, s: SequenceSet, fv: np.ndarray, x: int,
                 n: int) -> np.ndarray:
    k = int(np.searchsorted(s.elements, n, side="right"))
    els = s.elements[:k]
    return fv[sys.iterate(x, els)], els


def ergodic_average(sys: FiniteSystem, s: SequenceSet, f, x: int, n: int) -> float:
    """Mean of f(T^j x) over set elements j <= n, normalized by their count."""
    if not (1 <= n <= s.n_max):
        raise RangeError(f"N = {n} outside [1, {s.n_max}]")
    cnt = count(s, n)
    if cnt == 0:
        raise DegenerateError(f"no set elements in [1, {n}]")
    fv = _f_values(sys, f)
    terms, _ = _orbit_terms(sys, s, fv, x, n)
    return float(chunked_sum(terms)) / cnt


def weighted_average(sys: FiniteSystem, s: SequenceSet, phi: InverseFunction,
                     f, x: int, n: int) -> float:
    """Density-weighted mean: sum of h'(phi(j)) f(T^j x) over elements, over N.

    The weight h'(phi(j)) compensates for the thinning of the set, so the
    N-normalized sum tracks the count-normalized average in the limit.
    """
    if not (1 <= n <= s.n_max):
        raise RangeError(f"N = {n} outside [1, {s.n_max}]")
    fv = _f_values(sys, f)
    terms, els = _orbit_terms(sys, s, fv, x, n)
    w = np.asarray(s.growth.deriv(np.asarray(phi.value(els.astype(float))), 1),
                   dtype=float)
    return float(chunked_sum(w * terms)) / n


def oscillation_diagnostic(sys: FiniteSystem, s: SequenceSet,
                           phi: InverseFunction, f, x: int, eps: float,
                           breakpoints) -> float:
    """Sum over blocks of the largest weighted-average jump inside the block.

    Scales are restricted to the lacunary set {floor((1+eps)^k)}; blocks are
    the intervals between consecutive breakpoints, which must at least double.
    The sum divided by the block count trends to zero when the averages
    converge; this pointwise-at-x version is a weaker proxy for the full
    square-mean statement and is labeled as such wherever it is reported.
    """
    if eps <= 0:
        raise ValidationError(f"lacunarity eps = {eps} must be positive")
    bp = [int(b) for b in breakpoints]
    if len(bp) < 2:
        raise ValidationError("need at least two breakpoints")
    for a, b in zip(bp, bp[1:]):
        if not 2 * a < b:
            raise ValidationError(
                f"breakpoints must grow rapidly: 2 * {a} >= {b}")
    if bp[-1] > s.n_max:
        raise RangeError(f"final breakpoint {bp[-1]} beyond n_max = {s.n_max}")
    if bp[0] < 1:
        raise RangeError("breakpoints must be >= 1")

    fv = _f_values(sys, f)
    top = bp[-1]
    terms, els = _orbit_terms(sys, s, fv, x, top)
    w = np.asarray(s.growth.deriv(np.asarray(phi.value(els.astype(float))), 1),
                   dtype=float)
    prefix = np.concatenate([[0.0], np.cumsum(w * terms)])

    def weighted_avg(n: int) -> float:
        k = int(np.searchsorted(els, n, side="right"))
        return float(prefix[k]) / n

    # lacunary scale set up to the last breakpoint
    lac = []
    v = 1.0
    while True:
        v *= 1.0 + eps
        n = math.floor(v)
        if n > top:
            break
        if n >= 1 and (not lac or n != lac[-1]):
            lac.append(n)
    lac = np.array(lac, dtype=np.int64)

    total = 0.0
    for a, b in zip(bp[:-1], bp[1:]):
        base = weighted_avg(a)
        inside = lac[(lac > a) & (lac <= b)]
        if inside.size == 0:
            continue
        total += max(abs(weighted_avg(int(n)) - base) for n in inside)
    return total

