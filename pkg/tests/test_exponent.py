import math

import numpy as np
import pytest

from nlsobolev.errors import Inconclusive, NotFound, ValidationError
from nlsobolev.exponent import (
    SUPERCRITICAL,
    ExponentReport,
    bracket_from_asymptotics,
    estimate_l_infinity,
    estimate_s0,
    find_blowup_radii,
    full_report,
    two_star,
)
from nlsobolev.kernels import Fractional, Lacunary, LogCorrected, TabulatedRadial, eval_kernel, lacunary_sequence, second_moment, tail

BUILTINS = [
    Fractional(s=0.3),
    Fractional(s=0.7, N=3),
    LogCorrected(s0=0.5, sigma=2),
    LogCorrected(s0=0.5, sigma=-1),
    LogCorrected(s0=0.3, sigma=1, N=3),
    Lacunary(s=0.25, a0=0.5),
    Lacunary(s=0.5, a0=0.3),
]


def _contains(rep, s, pad=0.0):
    return rep.s0_lo - pad <= s <= rep.s0_hi + pad


class TestEstimateS0:
    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("s", [0.2, 0.3, 0.4, 0.6, 0.8])
    def test_fractional(self, s, N):
        rep = estimate_s0(Fractional(s=s, N=N))
        assert _contains(rep, s)
        assert rep.s0_hi - rep.s0_lo <= 0.04
        # local slopes equal the exact closed-form value -2s
        assert np.allclose(rep.slopes, -2 * s, atol=1e-6)

    @pytest.mark.parametrize("sigma", [-2, -1, 0, 1, 2])
    def test_log_corrected(self, sigma):
        rep = estimate_s0(LogCorrected(s0=0.5, sigma=sigma))
        assert _contains(rep, 0.5)
        assert rep.s0_hi - rep.s0_lo <= 0.04

    def test_log_corrected_slope_oracle(self):
        # T(r) ~ 2 pi r^{-1} (-log r)^2 for K = r^{-3}(1 - log r)^2, so the
        # local slope is -1 - 2 / (-log r) up to lower order terms
        rep = estimate_s0(LogCorrected(s0=0.5, sigma=2))
        r = rep.r_grid
        small = r < 1e-4
        approx = -1 - 2 / (-np.log(r[small]))
        assert np.max(np.abs(rep.slopes[small] - approx)) < 0.05

    def test_lacunary_is_genuine_interval(self):
        k = Lacunary(s=0.25, a0=0.5)
        rep = estimate_s0(k)
        beta = k.b**-2 * 0.25
        assert rep.regime == "oscillatory"
        assert rep.s0_hi - rep.s0_lo > 0.01
        assert 0 <= rep.s0_lo
        assert rep.s0_hi <= 0.25 + 0.03
        assert rep.s0_hi >= beta - 0.03

    @pytest.mark.parametrize("k", BUILTINS, ids=lambda k: k.label())
    @pytest.mark.parametrize("c", [0.1, 2.0, 10.0])
    def test_scale_invariance(self, k, c):
        a, b = estimate_s0(k), estimate_s0(k.scaled(c))
        assert (a.s0_lo, a.s0_hi) == pytest.approx((b.s0_lo, b.s0_hi), abs=1e-9)

    @pytest.mark.parametrize("k", BUILTINS, ids=lambda k: k.label())
    def test_invariants(self, k):
        rep = estimate_s0(k)
        assert 0 <= rep.s0_lo <= rep.s0_hi <= 1
        assert len(rep.windows) >= 1
        assert rep.windows[0].r_min == rep.r_min

    def test_preconditions(self):
        with pytest.raises(ValidationError):
            estimate_s0(Fractional(s=0.3), points=8)
        with pytest.raises(ValidationError):
            estimate_s0(Fractional(s=0.3), r_min=0.5, r_max=0.1)
        with pytest.raises(ValidationError):
            estimate_s0(Fractional(s=0.3), r_max=2.0)


class TestLInfinity:
    def test_classes(self):
        assert estimate_l_infinity(LogCorrected(s0=0.5, sigma=-1), 0.5).kind == "Zero"
        assert estimate_l_infinity(LogCorrected(s0=0.5, sigma=1), 0.5).kind == "Infinite"

    def test_finite_value_oracle(self):
        # sigma = 0: K = r^{-3} on (0, 1] and beyond, so r T(r) = 2 pi exactly
        c = estimate_l_infinity(LogCorrected(s0=0.5, sigma=0), 0.5)
        assert c.kind == "FinitePositive"
        assert c.value_lo == pytest.approx(2 * math.pi, rel=1e-8)
        assert c.value_hi == pytest.approx(2 * math.pi, rel=1e-8)

    def test_fractional_scaled_value(self):
        c = estimate_l_infinity(Fractional(s=0.4, scale=3.0), 0.4)
        assert c.kind == "FinitePositive"
        assert c.value_lo == pytest.approx(3 * 2 * math.pi / 0.8, rel=1e-8)

    def test_wrong_s0(self):
        # s0 below the true order: r^{2 s0} T(r) -> infinity; above it -> 0
        assert estimate_l_infinity(Fractional(s=0.5), 0.3).kind == "Infinite"
        assert estimate_l_infinity(Fractional(s=0.5), 0.7).kind == "Zero"

    def test_trend_reversal_inconclusive(self):
        # slope -1 down to 1e-3 then -0.2 below: g rises then falls
        samples = ((1e-7, 1e-7**-2.2), (1e-3, 1e-3**-2.2), (1.0, 1.0))
        k = TabulatedRadial(samples=((1e-7, 1e-3**-3 * (1e-3 / 1e-7) ** 2.2), (1e-3, 1e-3**-3), (1.0, 1.0)))
        with pytest.raises(Inconclusive):
            estimate_l_infinity(k, 0.3, r_min=1e-6)

    def test_full_report_records_classes(self):
        rep = full_report(LogCorrected(s0=0.5, sigma=-1))
        assert isinstance(rep, ExponentReport)
        assert rep.l_inf_class.kind == "Zero"
        assert rep.two_star == pytest.approx(2 * 2 / (2 - 2 * rep.s0_hi))
        row = rep.csv_row()
        assert len(row) == len(ExponentReport.CSV_HEADER)
        assert row[4] == "Zero"

    def test_bad_s0(self):
        with pytest.raises(ValidationError):
            estimate_l_infinity(Fractional(s=0.5), 0.0)


class TestTwoStar:
    def test_examples(self):
        assert two_star(0.5, 2) == 4
        assert two_star(0.75, 3) == 4
        assert two_star(1.0, 2) is SUPERCRITICAL

    @pytest.mark.parametrize("s0", [0.05, 0.3, 0.99])
    def test_above_two(self, s0):
        for N in (2, 3):
            assert two_star(s0, N) > 2


class TestBracketFromAsymptotics:
    def test_fractional(self):
        s1, s2 = bracket_from_asymptotics(Fractional(s=0.4))
        assert s1 == pytest.approx(0.4, abs=0.0025)
        assert s2 == pytest.approx(0.4, abs=0.0025)

    def test_lacunary(self):
        s1, s2 = bracket_from_asymptotics(Lacunary(s=0.25, a0=0.5))
        assert s1 <= 0.01
        assert s2 <= 0.25

    @pytest.mark.parametrize("k", BUILTINS, ids=lambda k: k.label())
    def test_consistency_with_estimate_s0(self, k):
        s1, s2 = bracket_from_asymptotics(k)
        rep = estimate_s0(k)
        assert max(s1, rep.s0_lo) <= min(s2, rep.s0_hi) + 1e-9

    def test_ordering(self):
        for k in BUILTINS:
            s1, s2 = bracket_from_asymptotics(k)
            assert 0 <= s1 <= s2 <= 1


class TestBlowupRadii:
    def test_fractional(self):
        k = Fractional(s=0.5)
        radii = find_blowup_radii(k, 0.3, 8)
        r = np.array(radii)
        v = r**2.6 * eval_kernel(k, r)
        assert np.all(np.diff(r) < 0)
        assert np.all(np.diff(v) > 0)
        assert np.allclose(v, r**-0.4, rtol=1e-12)
        assert np.all(v[1:] > np.arange(2, len(v) + 1) * v[0])

    def test_lacunary_near_breakpoints(self):
        k = Lacunary(s=0.25, a0=0.5)
        radii = find_blowup_radii(k, 0.05, 3)
        r = np.array(radii)
        v = r**2.1 * eval_kernel(k, r)
        assert np.all(np.diff(v) > 0)
        # exhaustive oracle: the supremum of r^{2.1} K on [a_{n+1}, a_n) is
        # approached at the left of a_n, so every pick sits just below some a_n
        a = np.array([k.a(0)] + lacunary_sequence(k, 12))
        for ri in r:
            j = np.argmin(np.abs(np.log(a / ri)))
            assert ri <= a[j] and math.log(a[j] / ri) < 0.05

    def test_not_found(self):
        with pytest.raises(NotFound) as exc:
            find_blowup_radii(Fractional(s=0.5), 0.6, 3)
        assert len(exc.value.found) < 3


def _monotone_cases():
    out = []
    for k in BUILTINS:
        marks = []
        if k.family == "lacunary":
            # r^N K(r) jumps to a_n^{-2s} just below a_n while T stays of order
            # a_{n-1}^{-2s}, so d/dr (r^{2.1} T) < 0 there: the pointwise claim
            # fails (oracle-confirmed at r ~ 3e-6 for a0 = 0.5)
            marks.append(pytest.mark.xfail(strict=True, reason="not monotone near lacunary breakpoints"))
        out.append(pytest.param(k, marks=marks, id=k.label()))
    return out


class TestProp21Bound:
    @pytest.mark.parametrize("k", _monotone_cases())
    def test_r_power_tail_nonincreasing(self, k):
        r = np.geomspace(1.0, 1e-6, 121)  # toward the origin
        g = r ** (2 * 1.05) * np.array([tail(k, x) for x in r])
        assert np.all(np.diff(g) <= 1e-12 * g[:-1])

    @pytest.mark.parametrize("k", BUILTINS, ids=lambda k: k.label())
    def test_r2_tail_bound(self, k):
        # r^2 T(r) <= int min(|x|^2, 1) K for r < 1, hence r^{2.1} T(r) -> 0
        C = second_moment(k, 1.0) + tail(k, 1.0)
        r = np.geomspace(1.0, 1e-7, 141)
        T = np.array([tail(k, x) for x in r])
        assert np.all(r**2 * T <= C * (1 + 1e-12))
        assert np.all(r**2.1 * T <= C * r**0.1 * (1 + 1e-12))
