"""Distribution-layer checks: closed forms, frozen references, identities."""

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from fracpoisson.distributions import (
    BivariateQuery,
    FppParams,
    bivariate_pmf,
    conditional_binomial,
    conditional_trinomial,
    interarrival_density,
    pmf,
    survival,
    waiting_time_density,
)
from fracpoisson.errors import InvalidParamError, ToleranceNotMet
from fracpoisson.quadrature import QuadSpec, integrate
from fracpoisson.special import MLSpec, ml3

# Frozen from a 50-digit reference evaluation of the defining series.
PMF_HALF = [
    0.427583576155807,
    0.27321201478389856,
    0.15437156137190844,
    0.07922696894132675,
    0.037572296215290846,
]
INTER_HALF_1 = 0.13660600739194928     # order 0.5, rate 1, s = 1
WAIT2_HALF_1 = 0.15437156137190844     # order 0.5, rate 1, k = 2, s = 1
SURV_07 = 0.33838531062055965          # order 0.7, rate 2, t = 0.5


def closed_joint(lam, s, t, k, r):
    """Order-1 joint probability in product form."""
    return (
        lam**r
        * s**k
        * (t - s) ** (r - k)
        * math.exp(-lam * t)
        / (math.factorial(k) * math.factorial(r - k))
    )


class TestParams:
    def test_rate_must_be_positive(self):
        with pytest.raises(InvalidParamError):
            FppParams(rate=0.0, order=0.5)
        with pytest.raises(InvalidParamError):
            FppParams(rate=-1.0, order=0.5)
        with pytest.raises(InvalidParamError):
            FppParams(rate=math.nan, order=0.5)

    def test_order_must_lie_in_unit_interval(self):
        with pytest.raises(InvalidParamError):
            FppParams(rate=1.0, order=0.0)
        with pytest.raises(InvalidParamError):
            FppParams(rate=1.0, order=1.2)
        FppParams(rate=1.0, order=1.0)

    def test_query_validation(self):
        with pytest.raises(InvalidParamError):
            BivariateQuery(s=0.0, t=1.0, k=0, r=0)
        with pytest.raises(InvalidParamError):
            BivariateQuery(s=2.0, t=1.0, k=0, r=0)
        with pytest.raises(InvalidParamError):
            BivariateQuery(s=0.5, t=1.0, k=2, r=1)
        with pytest.raises(InvalidParamError):
            BivariateQuery(s=0.5, t=1.0, k=-1, r=1)


class TestPmf:
    def test_order_one_example(self):
        got = pmf(FppParams(rate=2.0, order=1.0), 3.0, 4)
        assert got == pytest.approx(0.13385261753998332, rel=1e-12)

    def test_order_one_is_poisson(self):
        params = FppParams(rate=1.7, order=1.0)
        for t in (0.3, 1.0, 2.5):
            for k in range(11):
                want = math.exp(-1.7 * t) * (1.7 * t) ** k / math.factorial(k)
                assert pmf(params, t, k) == pytest.approx(want, rel=1e-11)

    def test_frozen_half_order_values(self):
        params = FppParams(rate=1.0, order=0.5)
        for k, want in enumerate(PMF_HALF):
            assert pmf(params, 1.0, k) == pytest.approx(want, rel=1e-12)

    def test_zero_time_point_mass(self):
        params = FppParams(rate=1.0, order=0.5)
        assert pmf(params, 0.0, 0) == 1.0
        assert pmf(params, 0.0, 3) == 0.0

    @pytest.mark.parametrize(
        "rate,order", [(2.0, 0.5), (5.0, 0.5), (1.0, 0.7), (3.0, 1.0)]
    )
    def test_normalization(self, rate, order):
        params = FppParams(rate=rate, order=order)
        total = sum(pmf(params, 1.0, k) for k in range(61))
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_rejects_bad_arguments(self):
        params = FppParams(rate=1.0, order=0.5)
        with pytest.raises(InvalidParamError):
            pmf(params, -1.0, 0)
        with pytest.raises(InvalidParamError):
            pmf(params, 1.0, -1)
        with pytest.raises(InvalidParamError):
            pmf(params, 1.0, 1.5)


class TestSurvival:
    def test_frozen_value(self):
        got = survival(FppParams(rate=2.0, order=0.7), 0.5)
        assert got == pytest.approx(SURV_07, rel=1e-12)

    def test_matches_pmf_at_zero_count(self):
        for order in (0.5, 0.8, 1.0):
            params = FppParams(rate=1.3, order=order)
            assert survival(params, 0.9) == pytest.approx(
                pmf(params, 0.9, 0), rel=1e-13
            )

    def test_at_time_zero(self):
        assert survival(FppParams(rate=1.0, order=0.5), 0.0) == 1.0


class TestInterarrivalDensity:
    def test_order_one_example(self):
        got = interarrival_density(FppParams(rate=3.0, order=1.0), 0.2)
        assert got == pytest.approx(1.6464349082820793, rel=1e-12)

    def test_order_one_is_exponential(self):
        params = FppParams(rate=2.5, order=1.0)
        for s in (0.1, 0.8, 2.0):
            assert interarrival_density(params, s) == pytest.approx(
                2.5 * math.exp(-2.5 * s), rel=1e-11
            )

    def test_frozen_half_order_value(self):
        got = interarrival_density(FppParams(rate=1.0, order=0.5), 1.0)
        assert got == pytest.approx(INTER_HALF_1, rel=1e-12)

    def test_integrates_to_arrival_probability(self):
        # the gap density over (0, t] must carry mass 1 - survival(t)
        params = FppParams(rate=1.0, order=0.5)
        nu = params.order
        spec = MLSpec(nu, nu)
        smooth = lambda s: params.rate * ml3(spec, -params.rate * s**nu)
        res = integrate(
            smooth,
            0.0,
            1.0,
            QuadSpec(rel_tol=1e-10, abs_tol=0.0, singular_left_exponent=nu),
        )
        assert res.converged
        assert res.value == pytest.approx(1.0 - survival(params, 1.0), rel=1e-9)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(InvalidParamError):
            interarrival_density(FppParams(rate=1.0, order=0.5), 0.0)


class TestWaitingTimeDensity:
    def test_order_one_example(self):
        got = waiting_time_density(FppParams(rate=2.0, order=1.0), 3, 0.5)
        assert got == pytest.approx(0.36787944117144233, rel=1e-12)

    def test_order_one_is_erlang(self):
        params = FppParams(rate=1.8, order=1.0)
        for k in range(1, 5):
            for s in (0.2, 1.0, 3.0):
                want = (
                    1.8**k
                    * s ** (k - 1)
                    * math.exp(-1.8 * s)
                    / math.factorial(k - 1)
                )
                assert waiting_time_density(params, k, s) == pytest.approx(
                    want, rel=1e-11
                )

    def test_first_event_matches_interarrival(self):
        params = FppParams(rate=1.4, order=0.6)
        for s in (0.3, 1.1):
            assert waiting_time_density(params, 1, s) == pytest.approx(
                interarrival_density(params, s), rel=1e-13
            )

    def test_frozen_half_order_value(self):
        got = waiting_time_density(FppParams(rate=1.0, order=0.5), 2, 1.0)
        assert got == pytest.approx(WAIT2_HALF_1, rel=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_integral_equals_tail_probability(self, k):
        # P(k-th event by t) must equal the upper pmf tail at t
        params = FppParams(rate=1.0, order=0.5)
        lam, nu = params.rate, params.order
        t = 1.0
        p = min(nu * k, 1.0)
        extra = nu * k - p
        spec = MLSpec(nu, nu * k, float(k))
        smooth = lambda s: lam**k * s**extra * ml3(spec, -lam * s**nu)
        res = integrate(
            smooth,
            0.0,
            t,
            QuadSpec(rel_tol=1e-9, abs_tol=0.0, singular_left_exponent=p),
        )
        want = 1.0 - sum(pmf(params, t, j) for j in range(k))
        assert res.converged
        assert res.value == pytest.approx(want, rel=1e-6)

    def test_rejects_zero_count(self):
        with pytest.raises(InvalidParamError):
            waiting_time_density(FppParams(rate=1.0, order=0.5), 0, 1.0)


class TestConditionalBinomial:
    def test_example(self):
        assert conditional_binomial(5, 0.3, 1.0, 2) == pytest.approx(
            0.3087, rel=1e-12
        )

    def test_normalization_and_mean(self):
        n, s, t = 7, 0.4, 1.3
        probs = [conditional_binomial(n, s, t, r) for r in range(n + 1)]
        assert sum(probs) == pytest.approx(1.0, rel=1e-12)
        mean = sum(r * p for r, p in enumerate(probs))
        assert mean == pytest.approx(n * s / t, rel=1e-12)

    def test_degenerate_start(self):
        assert conditional_binomial(4, 0.0, 1.0, 0) == 1.0
        assert conditional_binomial(4, 0.0, 1.0, 2) == 0.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidParamError):
            conditional_binomial(3, 1.0, 1.0, 1)
        with pytest.raises(InvalidParamError):
            conditional_binomial(3, 0.2, 1.0, 4)
        with pytest.raises(InvalidParamError):
            conditional_binomial(3, -0.1, 1.0, 1)


class TestConditionalTrinomial:
    def test_normalization_exact(self):
        n = 5
        s, w, t = Fraction(1, 4), Fraction(1, 2), Fraction(1)
        total = sum(
            conditional_trinomial(n, s, w, t, h, k)
            for k in range(n + 1)
            for h in range(k + 1)
        )
        assert total == 1

    def test_marginal_is_binomial(self):
        # summing out the earlier count leaves the single-time binomial law
        n = 6
        s, w, t = 0.2, 0.7, 1.1
        for k in range(n + 1):
            got = sum(conditional_trinomial(n, s, w, t, h, k) for h in range(k + 1))
            want = conditional_binomial(n, w, t, k)
            assert got == pytest.approx(want, rel=1e-11)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_mixed_moment_exact_rational(self, n):
        s, w, t = Fraction(1, 5), Fraction(1, 2), Fraction(1)
        moment = sum(
            h * k * conditional_trinomial(n, s, w, t, h, k)
            for k in range(n + 1)
            for h in range(k + 1)
        )
        assert moment == n * s / t + n * (n - 1) * s * w / t**2

    def test_rejects_unordered_times(self):
        with pytest.raises(InvalidParamError):
            conditional_trinomial(3, 0.5, 0.4, 1.0, 1, 2)
        with pytest.raises(InvalidParamError):
            conditional_trinomial(3, 0.2, 0.4, 1.0, 2, 1)


class TestBivariatePmf:
    def test_order_one_examples(self):
        got = bivariate_pmf(
            FppParams(rate=1.0, order=1.0), BivariateQuery(s=1.0, t=2.0, k=1, r=2)
        )
        assert got == pytest.approx(0.1353352832366127, rel=1e-8)
        got = bivariate_pmf(
            FppParams(rate=2.0, order=1.0), BivariateQuery(s=0.5, t=1.0, k=2, r=3)
        )
        assert got == pytest.approx(0.0676676416183063, rel=1e-8)

    def test_order_one_product_grid(self):
        lam, s, t = 1.3, 0.6, 1.7
        params = FppParams(rate=lam, order=1.0)
        for r in range(4):
            for k in range(r + 1):
                got = bivariate_pmf(params, BivariateQuery(s=s, t=t, k=k, r=r))
                assert got == pytest.approx(
                    closed_joint(lam, s, t, k, r), rel=1e-8
                ), (k, r)

    def test_zero_counts_give_survival(self):
        params = FppParams(rate=1.0, order=0.5)
        got = bivariate_pmf(params, BivariateQuery(s=0.5, t=1.0, k=0, r=0))
        assert got == pytest.approx(survival(params, 1.0), rel=1e-13)

    def test_equal_times_collapse(self):
        params = FppParams(rate=1.0, order=0.5)
        got = bivariate_pmf(params, BivariateQuery(s=1.0, t=1.0, k=2, r=2))
        assert got == pytest.approx(pmf(params, 1.0, 2), rel=1e-13)
        assert (
            bivariate_pmf(params, BivariateQuery(s=1.0, t=1.0, k=1, r=2)) == 0.0
        )

    def test_half_order_marginalization(self):
        # summing the joint law over the earlier count recovers the pmf
        params = FppParams(rate=1.0, order=0.5)
        for r in (1, 2):
            total = sum(
                bivariate_pmf(params, BivariateQuery(s=0.5, t=1.0, k=k, r=r))
                for k in range(r + 1)
            )
            assert total == pytest.approx(pmf(params, 1.0, r), rel=1e-6), r

    def test_starved_budget_warns_but_returns(self):
        params = FppParams(rate=1.0, order=0.5)
        query = BivariateQuery(
            s=0.5,
            t=1.0,
            k=1,
            r=2,
            quad=QuadSpec(rel_tol=1e-13, abs_tol=0.0, max_depth=2),
        )
        with pytest.warns(ToleranceNotMet):
            got = bivariate_pmf(params, query)
        assert got == pytest.approx(0.03773773069320422, rel=1e-2)

    def test_converged_result_does_not_warn(self):
        params = FppParams(rate=1.0, order=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error", ToleranceNotMet)
            bivariate_pmf(params, BivariateQuery(s=0.5, t=1.0, k=1, r=2))
