"""Maximal averages over dyadic scales and the stopping-time decomposition.

The maximal operator takes the pointwise sup of |K_n * f| over a family of
kernels at scales 2^n.  Its weak-type behavior is probed empirically through
superlevel-set ratios, and structurally through the classical splitting of an
input into a bounded good part plus atoms on disjoint dyadic cubes, refined
per scale into an over-threshold piece, a mean-zero piece, and cube means.

Decomposition arithmetic runs on whatever number type the input carries:
exact Fractions (or ints) stay exact end to end, floats stay floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import (
    DegenerateError,
    InsufficientDataError,
    PreconditionError,
    RangeError,
    ValidationError,
)
from .growth import InverseFunction
from .kernel import Kernel, Normalization, autocorrelation, build_kernel, gn_profile
from .seqset import SequenceSet, count
from .signals import Signal, convolve
from .util import log_spaced, loglog_slope

SPARSE_NNZ_LIMIT = 64   # shift-add convolution below this, transforms above
_LIP_STEPS = (1, 2, 4, 8)


# ---------------------------------------------------------------------------
# scale families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleFamily:
    """Kernels at dyadic scales 2^n for n in [n_lo, n_hi], with support stats.

    d[i] counts set elements in the support window of scale n_lo + i;
    big_d[i] = 4 * 2^(n_lo+i) is the right edge of that window.  eps0 is the
    fitted support-sparsity exponent (must stay below 1) and growth_m the
    fitted geometric-growth constant (must exceed 1).
    """

    n_lo: int
    n_hi: int
    scales: tuple
    kernels: tuple
    d: tuple
    big_d: tuple
    eps0: float
    growth_m: float
    normalization: Normalization

    def scale_index(self, n: int) -> int:
        if not (self.n_lo <= n <= self.n_hi):
            raise RangeError(f"scale exponent {n} outside [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def s_of_scale(self, n: int) -> int:
        """Smallest cube exponent s with 2^s >= the support edge at scale n."""
        d_n = self.big_d[self.scale_index(n)]
        return int(math.ceil(math.log2(d_n)))


def build_scale_family(s: SequenceSet, phi: InverseFunction, n_lo: int, n_hi: int,
                       normalization: Normalization = Normalization.COUNT_EXACT,
                       ) -> ScaleFamily:
    if n_hi < n_lo:
        raise ValidationError(f"scale range [{n_lo}, {n_hi}] is empty")
    if 4 * (1 << n_hi) > s.n_max:
        raise RangeError(f"largest kernel needs n_max >= {4 * (1 << n_hi)}")
    scales = tuple(1 << n for n in range(n_lo, n_hi + 1))
    kernels = tuple(build_kernel(s, phi, sc, normalization) for sc in scales)
    d = tuple(count(s, 4 * sc) - count(s, sc // 2) for sc in scales)
    big_d = tuple(4 * sc for sc in scales)
    if min(d) < 1:
        raise DegenerateError("a scale window contains no set elements")
    eps0 = max(math.log(dn) / math.log(dd) for dn, dd in zip(d, big_d))
    if eps0 >= 1.0:
        raise ValidationError(f"support cardinality not sparse: eps0 = {eps0:.4f}")
    if len(scales) > 1:
        growth_m = min(min(d[i + 1] / d[i] for i in range(len(d) - 1)),
                       min(big_d[i + 1] / big_d[i] for i in range(len(d) - 1)))
        if growth_m <= 1.0:
            raise ValidationError(f"scale statistics not growing: M = {growth_m:.4f}")
    else:
        growth_m = float("inf")
    return ScaleFamily(n_lo, n_hi, scales, kernels, d, big_d, eps0, growth_m,
                       normalization)


# ---------------------------------------------------------------------------
# the maximal operator
# ---------------------------------------------------------------------------

def _convolve_signal(f: Signal, k: Signal) -> Signal:
    nnz = int(np.count_nonzero(f.values))
    if nnz <= SPARSE_NNZ_LIMIT:
        out = np.zeros(f.values.size + k.values.size - 1)
        for i in np.nonzero(f.values)[0]:
            out[i:i + k.values.size] += f.values[i] * k.values
        return Signal(f.offset + k.offset, out)
    return convolve(f, k, "fast")


def maximal_function(family: ScaleFamily, f: Signal) -> Signal:
    """Pointwise max over the family scales of |K_n * f|, for nonnegative f."""
    if f.is_zero:
        return Signal.zero()
    if np.any(f.values < 0):
        raise ValidationError("the maximal operator is probed on nonnegative input")
    lo = min(f.offset + k.signal.offset for k in family.kernels)
    hi = max(f.support[1] + k.signal.support[1] for k in family.kernels)
    acc = np.zeros(hi - lo + 1)
    for k in family.kernels:
        c = _convolve_signal(f, k.signal)
        seg = acc[c.offset - lo:c.offset - lo + c.values.size]
        np.maximum(seg, np.abs(c.values), out=seg)
    return Signal(lo, acc)


def default_lambda_grid(family: ScaleFamily, f: Signal, points: int = 64) -> np.ndarray:
    """Log-spaced heights spanning [l1 / (4 max D_n), 2 linf]."""
    lo = f.l1() / (4.0 * max(family.big_d))
    hi = 2.0 * f.linf()
    return log_spaced(lo, hi, points)


def weak_type_profile(family: ScaleFamily, f: Signal, lambdas) -> list:
    """(height, height * superlevel count / l1) for each requested height."""
    if f.is_zero:
        raise DegenerateError("weak-type profile needs a nonzero input")
    mf = maximal_function(family, f)
    l1 = f.l1()
    out = []
    for lam in np.asarray(lambdas, dtype=float):
        cnt = int(np.count_nonzero(mf.values > lam))
        out.append((float(lam), float(lam) * cnt / l1))
    return out


# ---------------------------------------------------------------------------
# stopping-time decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CZAtom:
    """Input restricted to one selected dyadic cube [j 2^s, (j+1) 2^s)."""

    scale: int
    index: int
    values: dict

    def cube(self) -> tuple[int, int]:
        return (self.index << self.scale, ((self.index + 1) << self.scale) - 1)

    def l1(self):
        return sum(abs(v) for v in self.values.values())

    def to_signal(self) -> Signal:
        return Signal.from_dict({x: float(v) for x, v in self.values.items()})


@dataclass(frozen=True)
class CZDecomposition:
    """Splitting at a height: good part bounded by twice the height, plus
    atoms on pairwise disjoint dyadic cubes carrying the heavy mass."""

    height: object
    good: dict
    atoms: tuple
    index_set: frozenset

    def reconstruction(self) -> dict:
        total = dict(self.good)
        for atom in self.atoms:
            for x, v in atom.values.items():
                total[x] = total.get(x, 0) + v
        return {x: v for x, v in total.items() if v != 0}

    def total_cube_size(self) -> int:
        return sum(1 << a.scale for a in self.atoms)

    def atoms_at_scale(self, s: int) -> list:
        return [a for a in self.atoms if a.scale == s]


def _as_value_map(f) -> dict:
    if isinstance(f, Signal):
        return f.to_dict()
    if isinstance(f, Mapping):
        return {int(x): v for x, v in f.items() if v != 0}
    raise ValidationError(f"cannot decompose a {type(f).__name__}")


def cz_decompose(f, height) -> CZDecomposition:
    """Stopping-time splitting of f >= 0 at the given positive height.

    Starting from a dyadic cube that covers the support with average at most
    the height, cubes are bisected and the maximal ones whose average exceeds
    the height are selected.  Atoms keep the raw restriction of f (no mean is
    subtracted); the good part is f off the selected cubes.  Selected-cube
    averages lie in (height, 2 * height], the usual dyadic factor.
    """
    values = _as_value_map(f)
    if not values:
        raise DegenerateError("cannot decompose the zero input")
    if any(v < 0 for v in values.values()):
        raise ValidationError("decomposition input must be nonnegative")
    lam = height
    if lam <= 0:
        raise ValidationError(f"height {lam} must be positive")

    xs = np.array(sorted(values), dtype=np.int64)
    vals = [values[int(x)] for x in xs]
    total = sum(vals)
    # prefix[i] = sum of vals[:i]; exact for ints/Fractions, float for floats
    prefix = [0]
    for v in vals:
        prefix.append(prefix[-1] + v)

    def range_sum(i, j):
        return prefix[j] - prefix[i]

    # Root cubes: dyadic cubes anchored at 0 never straddle it, so a support
    # touching both sides needs one root per side.  The scale is grown until
    # every root average is at most the height and each side fits one cube.
    s = 0
    while (total > lam * (1 << s)
           or (int(xs[0]) >> s) < -1 or (int(xs[-1]) >> s) > 0):
        s += 1
    split = int(np.searchsorted(xs, 0, side="left"))
    atoms = []
    stack = []
    if split > 0:
        stack.append((s, -1, 0, split))
    if split < len(xs):
        stack.append((s, 0, split, len(xs)))
    while stack:
        s, j, i0, i1 = stack.pop()
        if s == 0:
            continue  # a singleton below threshold stays good
        sc = s - 1
        mid = (2 * j + 1) << sc
        im = i0 + int(np.searchsorted(xs[i0:i1], mid, side="left"))
        for cj, a, b in ((2 * j, i0, im), (2 * j + 1, im, i1)):
            if a == b:
                continue
            if range_sum(a, b) > lam * (1 << sc):
                atoms.append(CZAtom(sc, cj,
                                    {int(xs[t]): vals[t] for t in range(a, b)}))
            else:
                stack.append((sc, cj, a, b))

    covered = set()
    for atom in atoms:
        covered.update(atom.values)
    good = {int(x): values[int(x)] for x in xs if int(x) not in covered}
    return CZDecomposition(lam, good, tuple(atoms),
                           frozenset((a.scale, a.index) for a in atoms))


# ---------------------------------------------------------------------------
# per-scale refinement of the bad part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RefinedBadPart:
    """Scale-indexed split of the cube-scale-s bad part b_s into
    over-threshold values, a mean-zero remainder, and cube means:
    b_cut + big_b + g_part = b_s exactly, with big_b summing to zero on
    every cube.
    """

    n: int
    s: int
    threshold: object
    b_cut: dict
    big_b: dict
    g_part: dict
    s_of_n: int
    cubes: tuple


def _exact_mean(total, size: int):
    if isinstance(total, (int, Fraction)):
        return Fraction(total, size)
    return total / size


def refine_bad_part(cz: CZDecomposition, s: int, n: int,
                    family: ScaleFamily) -> RefinedBadPart:
    """Split the scale-s bad part against the support count at family scale n."""
    atoms = cz.atoms_at_scale(s)
    if not atoms:
        raise RangeError(f"no atoms at cube scale {s}")
    d_n = family.d[family.scale_index(n)]
    thr = cz.height * d_n

    b_cut: dict = {}
    big_b: dict = {}
    g_part: dict = {}
    for atom in atoms:
        kept = {}
        for x, v in atom.values.items():
            if abs(v) > thr:
                b_cut[x] = v
            else:
                kept[x] = v
        size = 1 << s
        mean = _exact_mean(sum(kept.values()), size) if kept else _exact_mean(0, size)
        lo = atom.index << s
        if mean != 0:
            for x in range(lo, lo + size):
                g_part[x] = mean
        for x in range(lo, lo + size):
            r = kept.get(x, 0) - mean
            if r != 0:
                big_b[x] = r
    return RefinedBadPart(n, s, thr, b_cut, big_b, g_part,
                          family.s_of_scale(n),
                          tuple(sorted(a.cube() for a in atoms)))


# ---------------------------------------------------------------------------
# abstract kernel-family hypotheses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyHypothesesReport:
    """Per-scale measurements of the model-family requirements.

    For each scale the model profile equals the kernel autocorrelation up to
    the inverse-function value and the slowly varying tail beyond it, so the
    approximation residual lives entirely in the tail region.  Columns:

    residual_sup      sup |autocorr - model|            (capped by D^-1-eps1)
    f0_d_product      model(0) * support count          (capped by a constant)
    f_sup_times_d     sup_{x != 0} |model(x)| * D       (capped by a constant)
    lipschitz_ratio   sup D^2 |model(x+y) - model(x)| / y over the tail region
    """

    scales: tuple
    d: tuple
    big_d: tuple
    residual_sup: tuple
    f0_d_product: tuple
    f_sup_times_d: tuple
    lipschitz_ratio: tuple
    eps0: float
    eps1: float
    eps2: float
    growth_m: float


def verify_family_hypotheses(family: ScaleFamily,
                             phi: InverseFunction) -> FamilyHypothesesReport:
    """Measure the kernel-family hypotheses across scales and fit exponents.

    The smoothness region is |x|, |x+y| beyond the inverse-function value of
    the scale (where the model is the slowly varying tail), matching the
    separation exponent eps2 = 1 up to the constant absorbed by the fit.
    """
    if not (1.0 < phi.c < 30.0 / 29.0):
        raise PreconditionError(
            f"model-family measurements need 1 < c < 30/29, got c = {phi.c}")
    if len(family.scales) < 4:
        raise InsufficientDataError("need >= 4 scales to fit the decay exponent")
    res, f0d, fsup, lips = [], [], [], []
    for i, k in enumerate(family.kernels):
        sc = family.scales[i]
        phin = float(phi.value(float(sc)))
        cut = int(math.floor(phin))
        acorr = autocorrelation(k)
        gn = gn_profile(phi, sc)
        if family.normalization is Normalization.COUNT_EXACT:
            gn = gn * (phin / k.norm_value) ** 2
        half = max(acorr.support[1], gn.support[1], cut + 1)
        xs = np.arange(0, half + 1)
        a = acorr(xs)
        g = gn(xs)
        tail_a, tail_g = a[cut + 1:], g[cut + 1:]
        res.append(float(np.max(np.abs(tail_a - tail_g))) if tail_a.size else 0.0)
        f0d.append(float(a[0]) * family.d[i])
        sup_inner = float(np.max(np.abs(a[1:cut + 1]))) if cut >= 1 else 0.0
        sup_tail = float(np.max(np.abs(tail_g))) if tail_g.size else 0.0
        fsup.append(max(sup_inner, sup_tail) * family.big_d[i])
        lip = 0.0
        for dstep in _LIP_STEPS:
            if tail_g.size > dstep:
                lip = max(lip, float(np.max(np.abs(tail_g[dstep:] - tail_g[:-dstep])))
                          / dstep)
        lips.append(lip * family.big_d[i] ** 2)
    eps1 = -loglog_slope(np.array(family.big_d, dtype=float),
                         np.array(res, dtype=float)) - 1.0
    return FamilyHypothesesReport(
        scales=family.scales, d=family.d, big_d=family.big_d,
        residual_sup=tuple(res), f0_d_product=tuple(f0d),
        f_sup_times_d=tuple(fsup), lipschitz_ratio=tuple(lips),
        eps0=family.eps0, eps1=float(eps1), eps2=1.0,
        growth_m=family.growth_m)
