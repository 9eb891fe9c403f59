"""Skellam count law, integrated-difference characteristic function,
and the signed random-sum sampler, checked against frozen references
and the exact path simulator."""

import math

import numpy as np
import pytest
from scipy import stats

from fracpoisson import FppParams
from fracpoisson.errors import InvalidParamError
from fracpoisson.simulate import SimConfig, empirical_cf, integral_samples, make_rng
from fracpoisson.skellam import (
    SkellamParams,
    integral_diff_cf,
    integral_diff_samples,
    sample_integral_diff,
    skellam_pmf,
)

# external references, 50-digit series evaluation rounded to double
PMF_11_R0 = 0.30850832255367105  # rate_plus=1, rate_minus=1, t=1, r=0
PMF_21_R1 = 0.238463438486297  # rate_plus=2, rate_minus=1, t=1, r=1


def ks_crit_two_sample(m: int, n: int) -> float:
    # asymptotic 1% critical value
    return 1.628 * math.sqrt((m + n) / (m * n))


def variance_se(x: np.ndarray) -> float:
    n = x.size
    var = x.var(ddof=1)
    m4 = np.mean((x - x.mean()) ** 4)
    return math.sqrt(max(m4 - (n - 3.0) / (n - 1.0) * var * var, 0.0) / n)


class TestParams:
    def test_accepts_valid(self):
        p = SkellamParams(rate_plus=2.0, rate_minus=1.0)
        assert p.rate_plus == 2.0 and p.rate_minus == 1.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_bad_rates(self, bad):
        with pytest.raises(InvalidParamError):
            SkellamParams(rate_plus=bad, rate_minus=1.0)
        with pytest.raises(InvalidParamError):
            SkellamParams(rate_plus=1.0, rate_minus=bad)


class TestPmf:
    def test_reference_values(self):
        assert skellam_pmf(SkellamParams(1.0, 1.0), 1.0, 0) == pytest.approx(
            PMF_11_R0, rel=1e-13
        )
        assert skellam_pmf(SkellamParams(2.0, 1.0), 1.0, 1) == pytest.approx(
            PMF_21_R1, rel=1e-13
        )

    def test_symmetric_rates_symmetric_law(self):
        params = SkellamParams(1.7, 1.7)
        for r in range(0, 11):
            assert skellam_pmf(params, 0.8, r) == skellam_pmf(params, 0.8, -r)

    @pytest.mark.parametrize(
        "lam,beta,t",
        [(1.0, 1.0, 1.0), (5.0, 1.0, 1.0), (2.5, 2.0, 2.0), (0.3, 4.8, 1.0)],
    )
    def test_normalization(self, lam, beta, t):
        params = SkellamParams(lam, beta)
        total = math.fsum(skellam_pmf(params, t, r) for r in range(-40, 41))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_large_time_stays_stable(self):
        # both unscaled exponentials are ~exp(600) here; the scaled
        # route must keep everything bounded
        params = SkellamParams(3.0, 3.0)
        center = skellam_pmf(params, 100.0, 0)
        assert center == pytest.approx(1.0 / math.sqrt(4.0 * math.pi * 300.0), rel=1e-2)
        total = math.fsum(skellam_pmf(params, 100.0, r) for r in range(-200, 201))
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_rejects_bad_arguments(self):
        params = SkellamParams(1.0, 1.0)
        with pytest.raises(InvalidParamError):
            skellam_pmf(params, 0.0, 0)
        with pytest.raises(InvalidParamError):
            skellam_pmf(params, -1.0, 0)
        with pytest.raises(InvalidParamError):
            skellam_pmf(params, 1.0, 0.5)

    def test_matches_count_difference_frequencies(self):
        lam, beta, t, n = 2.0, 1.0, 1.0, 10**6
        rng = make_rng(404)
        diff = rng.poisson(lam * t, n) - rng.poisson(beta * t, n)
        params = SkellamParams(lam, beta)
        for r in range(-4, 5):
            p_hat = float(np.mean(diff == r))
            p = skellam_pmf(params, t, r)
            se = math.sqrt(p * (1.0 - p) / n)
            assert abs(p_hat - p) <= 3.0 * se, (r, p_hat, p)


class TestCf:
    def test_zero_frequency_is_one(self):
        assert integral_diff_cf(SkellamParams(2.0, 1.0), 1.0, 0.0) == 1.0 + 0.0j

    def test_series_branch_matches_closed_form(self):
        # inside the series window the direct quotient still has ~6
        # good digits of cancellation headroom, enough to cross-check
        lam, beta, t = 2.0, 1.0, 1.0
        params = SkellamParams(lam, beta)
        for mu in (0.9e-6, 0.5e-6, -0.7e-6):
            got = integral_diff_cf(params, t, mu)
            ramp = (np.exp(1j * mu * t) - 1.0) / (1j * mu)
            want = np.exp(lam * (ramp - t) + beta * (np.conj(ramp) - t))
            assert got == pytest.approx(want, rel=5e-10)

    def test_derivative_at_zero_gives_mean(self):
        lam, beta, t = 2.0, 1.0, 1.0
        params = SkellamParams(lam, beta)
        h = 1e-4
        deriv = (integral_diff_cf(params, t, h) - integral_diff_cf(params, t, -h)) / (
            2.0 * h
        )
        want = 1j * (lam - beta) * t * t / 2.0
        assert deriv == pytest.approx(want, rel=1e-6)

    def test_vanishing_down_rate_reduces_to_one_sided(self):
        lam, t, mu = 2.0, 1.0, 1.3
        got = integral_diff_cf(SkellamParams(lam, 1e-12), t, mu)
        ramp = (np.exp(1j * mu * t) - 1.0) / (1j * mu)
        want = np.exp(lam * (ramp - t))
        assert got == pytest.approx(want, rel=1e-10)

    def test_matches_empirical_cf(self):
        params = SkellamParams(2.0, 1.0)
        t, n = 1.0, 10**5
        x = integral_diff_samples(params, t, SimConfig(seed=55, n_paths=n))
        mus = np.array([0.5, 1.0, 2.0])
        emp = empirical_cf(x, mus)
        for mu, e in zip(mus, emp):
            want = integral_diff_cf(params, t, float(mu))
            se_re = float(np.std(np.cos(mu * x), ddof=1)) / math.sqrt(n)
            se_im = float(np.std(np.sin(mu * x), ddof=1)) / math.sqrt(n)
            assert abs(e.real - want.real) <= 3.0 * se_re, mu
            assert abs(e.imag - want.imag) <= 3.0 * se_im, mu


class TestSampler:
    def test_symmetric_rates_center_at_zero(self):
        params = SkellamParams(1.5, 1.5)
        x = integral_diff_samples(params, 1.0, SimConfig(seed=66, n_paths=10**5))
        se = float(x.std(ddof=1)) / math.sqrt(x.size)
        assert abs(float(x.mean())) <= 3.0 * se

    def test_mean_and_variance(self):
        lam, beta, t = 2.0, 1.0, 1.0
        params = SkellamParams(lam, beta)
        x = integral_diff_samples(params, t, SimConfig(seed=77, n_paths=10**6))
        mean_want = (lam - beta) * t * t / 2.0
        var_want = (lam + beta) * t**3 / 3.0
        se_mean = float(x.std(ddof=1)) / math.sqrt(x.size)
        assert abs(float(x.mean()) - mean_want) <= 3.0 * se_mean
        assert abs(float(x.var(ddof=1)) - var_want) <= 3.0 * variance_se(x)

    def test_scalar_draw_behaviour(self):
        params = SkellamParams(2.0, 1.0)
        a = sample_integral_diff(params, 1.0, make_rng(9))
        b = sample_integral_diff(params, 1.0, make_rng(9))
        assert a == b
        assert -10.0 < a < 10.0
        # with a vanishing total rate the Poisson count is zero a.s.
        assert sample_integral_diff(SkellamParams(1e-12, 1e-12), 1.0, make_rng(1)) == 0.0

    def test_scalar_and_bulk_share_one_law(self):
        params = SkellamParams(2.0, 1.0)
        n = 4000
        rng = make_rng(88)
        scalar = np.array([sample_integral_diff(params, 1.0, rng) for _ in range(n)])
        bulk = integral_diff_samples(params, 1.0, SimConfig(seed=99, n_paths=n))
        d, _ = stats.ks_2samp(scalar, bulk)
        assert d < ks_crit_two_sample(n, n)

    def test_identity_with_path_integral_difference(self):
        # integral of the up path minus integral of the down path has
        # the same law as the signed random sum
        n = 10**5
        up = integral_samples(FppParams(2.0, 1.0), 1.0, SimConfig(seed=301, n_paths=n))
        down = integral_samples(
            FppParams(1.0, 1.0), 1.0, SimConfig(seed=302, n_paths=n)
        )
        sums = integral_diff_samples(
            SkellamParams(2.0, 1.0), 1.0, SimConfig(seed=303, n_paths=n)
        )
        d, _ = stats.ks_2samp(up - down, sums)
        assert d < ks_crit_two_sample(n, n)

    def test_bulk_reproducible_across_workers(self):
        params = SkellamParams(1.3, 0.7)
        cfg = SimConfig(seed=111, n_paths=20_000, workers=3)
        first = integral_diff_samples(params, 1.5, cfg)
        second = integral_diff_samples(params, 1.5, cfg)
        np.testing.assert_array_equal(first, second)
        assert first.size == 20_000
