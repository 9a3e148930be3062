"""Averages along the set on finite permutation systems."""

import numpy as np
import pytest

from roughmax import (
    DegenerateError,
    RangeError,
    ValidationError,
    cyclic_shift,
    ergodic_average,
    identity_system,
    indicator,
    oscillation_diagnostic,
    random_permutation,
    weighted_average,
)
from roughmax.ergodic import FiniteSystem


def naive_iterate(mapping, x, n):
    for _ in range(n):
        x = int(mapping[x])
    return x


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

def test_mapping_must_be_permutation():
    with pytest.raises(ValidationError):
        FiniteSystem.from_mapping([0, 0, 2])
    with pytest.raises(ValidationError):
        FiniteSystem.from_mapping([])


def test_iterate_matches_naive_oracle(rng):
    sys = random_permutation(23, 99)
    for _ in range(40):
        x = int(rng.integers(0, 23))
        n = int(rng.integers(0, 200))
        assert sys.iterate(x, n) == naive_iterate(sys.mapping, x, n)


def test_iterate_vectorized(rng):
    sys = cyclic_shift(10, 3)
    ns = np.array([0, 1, 2, 10, 11])
    assert list(sys.iterate(4, ns)) == [naive_iterate(sys.mapping, 4, int(n))
                                        for n in ns]
    with pytest.raises(RangeError):
        sys.iterate(10, 1)


def test_measure_preservation_exact(rng):
    vals = rng.normal(size=31)
    for sys in (cyclic_shift(31, 7), random_permutation(31, 5)):
        pushed = vals[np.asarray(sys.mapping)]
        assert pushed.sum() == pytest.approx(vals.sum(), rel=1e-15)
        assert sorted(pushed) == sorted(vals)


# ---------------------------------------------------------------------------
# averages
# ---------------------------------------------------------------------------

def test_identity_map_average_is_point_value(s102_16):
    sys = identity_system(7)
    f = indicator(7, 3)
    assert ergodic_average(sys, s102_16, f, 3, 5000) == 1.0
    assert ergodic_average(sys, s102_16, f, 2, 5000) == 0.0


def test_constant_observable_exact(s102_16):
    sys = cyclic_shift(12, 5)
    assert ergodic_average(sys, s102_16, np.full(12, 2.5), 1, 10000) == pytest.approx(2.5)


def test_average_linear_and_bounded(s102_16, rng):
    sys = cyclic_shift(13, 4)
    fa = rng.normal(size=13)
    fb = rng.normal(size=13)
    n = 5000
    aa = ergodic_average(sys, s102_16, fa, 2, n)
    ab = ergodic_average(sys, s102_16, fb, 2, n)
    combo = ergodic_average(sys, s102_16, 2.0 * fa + fb, 2, n)
    assert combo == pytest.approx(2.0 * aa + ab, rel=1e-12)
    assert abs(aa) <= np.abs(fa).max() + 1e-12


def test_shift_equidistribution(s102_16):
    sys = cyclic_shift(97, 5)
    f = indicator(97, 3)
    a = ergodic_average(sys, s102_16, f, 0, 1 << 16)
    assert abs(a - 1.0 / 97.0) < 0.05


def test_weighted_average_identity_system(sident, phident):
    sys = cyclic_shift(5, 2)
    # weight is identically 1 and the set is all integers: average of ones
    assert weighted_average(sys, sident, phident, np.ones(5), 0, 1000) == pytest.approx(1.0)


def test_weighted_tracks_plain(s102_16, phi102):
    sys = cyclic_shift(97, 5)
    f = indicator(97, 3)
    n = 1 << 16
    a = ergodic_average(sys, s102_16, f, 0, n)
    w = weighted_average(sys, s102_16, phi102, f, 0, n)
    assert abs(a - w) < 0.05


def test_average_validation(s102_16):
    sys = cyclic_shift(7, 1)
    with pytest.raises(RangeError):
        ergodic_average(sys, s102_16, indicator(7, 0), 0, s102_16.n_max + 1)
    with pytest.raises(ValidationError):
        ergodic_average(sys, s102_16, np.ones(8), 0, 100)


def test_empty_count_error(phi102):
    from roughmax import generate, make_growth
    g = make_growth("powerlog", 1.02, 1.0, a=1.0)
    late = generate(g, 4096)        # elements start near 17
    sys = cyclic_shift(7, 1)
    with pytest.raises(DegenerateError):
        ergodic_average(sys, late, indicator(7, 0), 0, 4)


# ---------------------------------------------------------------------------
# oscillation diagnostic
# ---------------------------------------------------------------------------

def test_oscillation_zero_observable(s102_16, phi102):
    sys = cyclic_shift(97, 5)
    assert oscillation_diagnostic(sys, s102_16, phi102, np.zeros(97), 0, 0.25,
                                  [4, 16, 64, 256]) == 0.0


def test_oscillation_identity_matches_direct_oracle(s102_16, phi102, g102):
    # with the identity map the diagnostic is exactly the oscillation of the
    # weighted normalization sequence at the marked state
    import math
    sys = identity_system(5)
    bps = [4 ** j for j in range(1, 6)]
    got = oscillation_diagnostic(sys, s102_16, phi102, indicator(5, 2), 2, 0.25, bps)
    els = s102_16.elements[s102_16.elements <= bps[-1]].astype(float)
    w = np.asarray(g102.deriv(np.asarray(phi102.value(els)), 1))
    pref = np.concatenate([[0.0], np.cumsum(w)])

    def a1(n):
        k = int(np.searchsorted(els, n, side="right"))
        return pref[k] / n

    lac, v = [], 1.0
    while True:
        v *= 1.25
        n = math.floor(v)
        if n > bps[-1]:
            break
        if n >= 1 and (not lac or n != lac[-1]):
            lac.append(n)
    total = 0.0
    for a, b in zip(bps[:-1], bps[1:]):
        inside = [n for n in lac if a < n <= b]
        if inside:
            total += max(abs(a1(n) - a1(a)) for n in inside)
    assert got == pytest.approx(total, rel=1e-12)


def test_oscillation_per_block_average_shrinks(s102_22, phi102):
    sys = cyclic_shift(97, 5)
    f = indicator(97, 3)
    vals = {}
    for j_count in (4, 8):
        bps = [4 ** j for j in range(1, j_count + 2)]
        vals[j_count] = oscillation_diagnostic(sys, s102_22, phi102, f, 0,
                                               0.25, bps) / j_count
    assert vals[8] <= vals[4]


def test_oscillation_breakpoint_validation(s102_16, phi102):
    sys = cyclic_shift(7, 1)
    f = indicator(7, 0)
    with pytest.raises(ValidationError):
        oscillation_diagnostic(sys, s102_16, phi102, f, 0, 0.25, [4, 7])
    with pytest.raises(ValidationError):
        oscillation_diagnostic(sys, s102_16, phi102, f, 0, -0.1, [4, 16])
    with pytest.raises(RangeError):
        oscillation_diagnostic(sys, s102_16, phi102, f, 0, 0.25,
                               [4, s102_16.n_max * 2])
