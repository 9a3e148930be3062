"""Finitely supported real functions on the integers, and their convolution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SignalSizeError

MAX_SUPPORT = 1 << 30


@dataclass(frozen=True)
class Signal:
    """Dense values over a contiguous index window starting at ``offset``.

    Construction trims leading and trailing zeros, so two signals with equal
    content compare equal.  Immutable; all operations return new signals.
    """

    offset: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            object.__setattr__(self, "offset", 0)
            object.__setattr__(self, "values", np.zeros(0))
            return
        lo, hi = int(nz[0]), int(nz[-1]) + 1
        object.__setattr__(self, "offset", int(self.offset) + lo)
        v = v[lo:hi].copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero() -> "Signal":
        return Signal(0, np.zeros(0))

    @staticmethod
    def delta(pos: int, amp: float = 1.0) -> "Signal":
        return Signal(pos, np.array([amp], dtype=float))

    @staticmethod
    def from_dict(items: dict) -> "Signal":
        if not items:
            return Signal.zero()
        lo = min(items)
        hi = max(items)
        v = np.zeros(hi - lo + 1)
        for x, val in items.items():
            v[x - lo] = float(val)
        return Signal(lo, v)

    # -- queries ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.values.size == 0

    @property
    def support(self) -> tuple[int, int]:
        """Closed index range [lo, hi] of the stored window; (0, -1) if zero."""
        if self.is_zero:
            return (0, -1)
        return (self.offset, self.offset + self.values.size - 1)

    def __call__(self, x):
        x = np.asarray(x)
        idx = x - self.offset
        ok = (idx >= 0) & (idx < self.values.size)
        out = np.where(ok, self.values[np.clip(idx, 0, max(self.values.size - 1, 0))]
                       if self.values.size else 0.0, 0.0)
        return float(out) if out.ndim == 0 else out

    def sum(self) -> float:
        return float(self.values.sum())

    def l1(self) -> float:
        return float(np.abs(self.values).sum())

    def linf(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def to_dict(self) -> dict:
        return {self.offset + i: float(v)
                for i, v in enumerate(self.values) if v != 0.0}

    # -- algebra ----------------------------------------------------------------

    def reversed(self) -> "Signal":
        """The reflection x -> value(-x)."""
        if self.is_zero:
            return self
        return Signal(-(self.offset + self.values.size - 1), self.values[::-1])

    def __add__(self, other: "Signal") -> "Signal":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.values.size, other.offset + other.values.size)
        v = np.zeros(hi - lo)
        v[self.offset - lo:self.offset - lo + self.values.size] += self.values
        v[other.offset - lo:other.offset - lo + other.values.size] += other.values
        return Signal(lo, v)

    def __mul__(self, scalar: float) -> "Signal":
        return Signal(self.offset, self.values * float(scalar))

    __rmul__ = __mul__

    def allclose(self, other: "Signal", atol: float = 1e-9) -> bool:
        lo = min(self.offset, other.offset) if not (self.is_zero and other.is_zero) else 0
        hi = max(self.support[1], other.support[1])
        if self.is_zero and other.is_zero:
            return True
        xs = np.arange(lo, hi + 1)
        return bool(np.allclose(self(xs), other(xs), rtol=0.0, atol=atol))


def convolve(a: Signal, b: Signal, method: str = "direct") -> Signal:
    """Discrete convolution; ``fast`` multiplies transforms, ``direct`` is the
    multiply-add oracle.  The two agree within 1e-9 per coefficient.
    """
    if method not in ("direct", "fast"):
        raise ValueError(f"unknown convolution method {method!r}")
    if a.is_zero or b.is_zero:
        return Signal.zero()
    out_len = a.values.size + b.values.size - 1
    if out_len > MAX_SUPPORT:
        raise SignalSizeError(f"convolution output support {out_len} exceeds 2^30")
    if method == "direct":
        v = np.convolve(a.values, b.values)
    else:
        n = 1 << (out_len - 1).bit_length()
        fa = np.fft.rfft(a.values, n)
        fb = np.fft.rfft(b.values, n)
        v = np.fft.irfft(fa * fb, n)[:out_len]
    return Signal(a.offset + b.offset, v)


def autocorrelation_signal(s: Signal, method: str = "fast") -> Signal:
    """s correlated with its reflection, symmetrized to be exactly even.

    Built on the full lag window [-(L-1), L-1] before any trimming so the
    symmetrization never misaligns, then averaged with its own reversal,
    which makes value(x) == value(-x) exact.
    """
    if method not in ("direct", "fast"):
        raise ValueError(f"unknown autocorrelation method {method!r}")
    if s.is_zero:
        return s
    out_len = 2 * s.values.size - 1
    if out_len > MAX_SUPPORT:
        raise SignalSizeError(f"autocorrelation support {out_len} exceeds 2^30")
    if method == "direct":
        v = np.convolve(s.values, s.values[::-1])
    else:
        n = 1 << (out_len - 1).bit_length()
        f = np.fft.rfft(s.values, n)
        v = np.fft.irfft(f * f.conj(), n)
        v = np.roll(v, s.values.size - 1)[:out_len]
    v = 0.5 * (v + v[::-1])
    return Signal(-(s.values.size - 1), v)
