import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import ks_2samp

from tailbreak import (
    LmsvSpec,
    classify_regime,
    exact_threshold,
    hill_sequential,
    lrd_norming,
    marginal_survival,
    pareto_quantile,
    sample_innovations,
    simulate_lmsv,
)
from tailbreak.errors import InvalidHermiteRegime, InvalidSpec
from tailbreak.lmsv import innovation_mean
from tailbreak.seeding import mix64

unit_open = st.floats(min_value=1e-9, max_value=1 - 1e-9)


class TestParetoQuantile:
    def test_left_endpoint(self):
        assert pareto_quantile(1e-15, 2.0) == pytest.approx(1.0)

    def test_standard_hand_value(self):
        assert pareto_quantile(0.75, 2.0) == pytest.approx(2.0)

    def test_gpd_hand_value(self):
        assert pareto_quantile(0.75, 1.0, "generalized_pareto") == pytest.approx(3.0)

    def test_bounds_checked(self):
        with pytest.raises(InvalidSpec):
            pareto_quantile(0.0, 2.0)
        with pytest.raises(InvalidSpec):
            pareto_quantile(1.0, 2.0)

    def test_exponential_member_only_for_gpd(self):
        assert pareto_quantile(0.5, 0.0, "generalized_pareto") == pytest.approx(
            math.log(2.0)
        )
        with pytest.raises(InvalidSpec):
            pareto_quantile(0.5, 0.0, "standard_pareto")

    @given(u=unit_open, alpha=st.floats(min_value=0.2, max_value=10))
    def test_standard_round_trip(self, u, alpha):
        q = pareto_quantile(u, alpha)
        assert q ** -alpha == pytest.approx(1.0 - u, rel=1e-9)

    @given(u=unit_open, alpha=st.floats(min_value=0.2, max_value=10))
    def test_gpd_round_trip(self, u, alpha):
        q = pareto_quantile(u, alpha, "generalized_pareto")
        assert (1.0 + q / alpha) ** -alpha == pytest.approx(1.0 - u, rel=1e-9)


class TestSpecValidation:
    def test_post_break_index_must_be_positive(self):
        with pytest.raises(InvalidSpec):
            LmsvSpec(n=100, hurst=0.7, alpha=1.0, change_height=-2.0,
                     change_fraction=0.5)
        with pytest.raises(InvalidSpec):
            LmsvSpec(n=100, hurst=0.7, alpha=1.0, change_height=-1.0,
                     change_fraction=0.5, family="standard_pareto")

    def test_gpd_admits_exponential_boundary(self):
        spec = LmsvSpec(n=100, hurst=0.7, alpha=1.0, change_height=-1.0,
                        change_fraction=0.5, family="generalized_pareto")
        assert spec.break_active

    def test_inactive_break_skips_post_index_check(self):
        # tau = 1 means no break, so alpha + h is never sampled
        LmsvSpec(n=100, hurst=0.7, alpha=1.0, change_height=-1.0,
                 change_fraction=1.0)

    def test_hurst_range(self):
        with pytest.raises(InvalidSpec):
            LmsvSpec(n=100, hurst=0.5, alpha=1.0)

    def test_centering_needs_finite_mean(self):
        with pytest.raises(InvalidSpec):
            LmsvSpec(n=100, hurst=0.7, alpha=1.0, center_innovations=True)
        LmsvSpec(n=100, hurst=0.7, alpha=2.0, center_innovations=True)


class TestSimulate:
    def test_deterministic(self):
        spec = LmsvSpec(n=500, hurst=0.7, alpha=2.0, seed=11)
        a = simulate_lmsv(spec).values
        b = simulate_lmsv(spec).values
        assert np.array_equal(a, b)

    def test_strictly_positive(self):
        for family in ("standard_pareto", "generalized_pareto"):
            spec = LmsvSpec(n=2000, hurst=0.6, alpha=1.0, family=family, seed=4)
            assert np.all(simulate_lmsv(spec).values > 0)

    def test_noop_break_is_identical(self):
        base = LmsvSpec(n=1000, hurst=0.6, alpha=2.0, seed=9)
        moved = replace(base, change_fraction=0.3)  # h = 0: break inactive
        a, b = simulate_lmsv(base).values, simulate_lmsv(moved).values
        assert np.array_equal(a, b)

    def test_noop_break_same_law_ks(self):
        # pooled Hill estimates across seeds; identical laws -> KS p ~ 1
        est_a, est_b = [], []
        for seed in range(100):
            a = simulate_lmsv(LmsvSpec(n=500, hurst=0.6, alpha=2.0, seed=seed))
            b = simulate_lmsv(
                LmsvSpec(n=500, hurst=0.6, alpha=2.0, seed=seed,
                         change_fraction=0.5, change_height=0.0)
            )
            est_a.append(hill_sequential(a, 50).gamma)
            est_b.append(hill_sequential(b, 50).gamma)
        assert ks_2samp(est_a, est_b).pvalue > 0.01

    def test_hill_recovers_gamma(self):
        # the marginal tail index is inherited from the innovations, but
        # the lognormal volatility factor is slowly varying: at k = n^0.7
        # the threshold sits at the 6.3% quantile and the Hill mean
        # carries a sizable positive bias that melts away as the
        # threshold deepens
        n = 10_000

        def mean_gamma(k_n):
            est = [
                hill_sequential(
                    simulate_lmsv(
                        LmsvSpec(n=n, hurst=0.7, alpha=2.0, seed=mix64(8, s))
                    ),
                    k_n,
                ).gamma
                for s in range(200)
            ]
            return float(np.mean(est))

        shallow = mean_gamma(int(n**0.7))
        deep = mean_gamma(int(n**0.55))
        assert abs(deep - 0.5) <= 0.05
        assert abs(shallow - 0.571) <= 0.02  # frozen bias at the shallow depth
        assert abs(deep - 0.5) < abs(shallow - 0.5)

    def test_tail_inheritance_breiman(self):
        # exceedance ratio at double the 99th percentile -> 2^-alpha
        x = simulate_lmsv(LmsvSpec(n=1_000_000, hurst=0.6, alpha=2.0, seed=32)).values
        u = np.quantile(x, 0.99)
        ratio = np.count_nonzero(x > 2 * u) / np.count_nonzero(x > u)
        assert abs(ratio - 0.25) <= 0.05

    def test_break_monotonicity(self):
        # heavier post-break tail -> larger post-break Hill estimate
        n, hits = 4000, 0
        for seed in range(200):
            spec = LmsvSpec(n=n, hurst=0.6, alpha=2.0, change_height=-1.0,
                            change_fraction=0.5, seed=mix64(77, seed))
            x = simulate_lmsv(spec).values
            pre = hill_sequential(x[: n // 2], 200).gamma
            post = hill_sequential(x[n // 2 :], 200).gamma
            hits += post > pre
        assert hits >= 180  # >= 90% of seeds

    def test_centered_innovations_have_mean_zero(self):
        spec = LmsvSpec(n=200_000, hurst=0.6, alpha=3.0, seed=5,
                        center_innovations=True)
        _, _, eps = simulate_lmsv(spec, return_components=True)
        assert abs(eps.mean()) < 0.02

    def test_components_multiply(self):
        spec = LmsvSpec(n=100, hurst=0.7, alpha=2.0, seed=1)
        series, y, eps = simulate_lmsv(spec, return_components=True)
        assert np.allclose(series.values, np.exp(y) * eps, rtol=1e-15)


class TestInnovationHelpers:
    def test_sample_innovations_deterministic(self):
        a = sample_innovations(100, 2.0, seed=3)
        b = sample_innovations(100, 2.0, seed=3)
        assert np.array_equal(a, b)
        assert np.all(a >= 1.0)

    def test_innovation_mean(self):
        assert innovation_mean(2.0, "standard_pareto") == pytest.approx(2.0)
        assert innovation_mean(0.0, "generalized_pareto") == 1.0
        with pytest.raises(InvalidSpec):
            innovation_mean(1.0, "standard_pareto")


class TestLrdNorming:
    def test_hand_value_h08(self):
        # D = 0.4: c_1 = 2/(0.6*1.6) = 2.08333...
        c1 = 2.0 / (0.6 * 1.6)
        assert c1 == pytest.approx(2.08333, abs=1e-5)
        n = 1000
        assert lrd_norming(n, 0.4) == pytest.approx(math.sqrt(c1) * n**0.8, rel=1e-14)

    def test_boundary_rejected(self):
        with pytest.raises(InvalidHermiteRegime):
            lrd_norming(100, 1.0)
        with pytest.raises(InvalidHermiteRegime):
            lrd_norming(100, 0.5, hermite_rank=2)

    def test_n_one(self):
        c2 = 2.0 * 2 / ((1 - 0.6) * (2 - 0.6))
        assert lrd_norming(1, 0.3, hermite_rank=2) == pytest.approx(math.sqrt(c2))

    def test_rate_ordering_in_n(self):
        # d/n -> 0 while n/d grows
        prev = 0.0
        for n in (10**2, 10**4, 10**6):
            d = lrd_norming(n, 0.4)
            assert d / n < 1.0 or n == 100
            assert n / d > prev
            prev = n / d
        assert lrd_norming(10**6, 0.4) / 10**6 < lrd_norming(10**2, 0.4) / 10**2


class TestClassifyRegime:
    def test_martingale_side(self):
        report = classify_regime(10**6, 0.6, int(10**6 ** 0.5))
        assert report.regime == "martingale"

    def test_lrd_side(self):
        report = classify_regime(10**6, 0.6, int(10**6 ** 0.95))
        assert report.regime == "lrd"

    def test_boundary_when_rates_match(self):
        n, hurst = 10**6, 0.6
        lrd_rate = n / lrd_norming(n, 2 - 2 * hurst)
        report = classify_regime(n, hurst, round(lrd_rate**2))
        assert report.regime == "boundary"

    def test_fields(self):
        report = classify_regime(1000, 0.8, 100)
        assert report.hermite_rank == 1
        assert report.lrd_exponent == pytest.approx(0.4)
        assert report.clt_rate == pytest.approx(10.0)


class TestMarginalSurvival:
    def test_closed_form_matches_quadrature(self):
        # independent oracle: integrate P(eps > u e^-y) phi(y) dy directly;
        # the indicator kink at y = ln(u) goes in as a breakpoint
        alpha = 2.0
        for u in (0.5, 2.0, 10.0, 50.0):
            oracle, _ = quad(
                lambda y: min(1.0, (u * math.exp(-y)) ** -alpha)
                * math.exp(-0.5 * y * y)
                / math.sqrt(2 * math.pi),
                -12,
                12,
                points=[math.log(u)],
                limit=300,
            )
            assert marginal_survival(u, alpha) == pytest.approx(oracle, rel=1e-9)

    def test_small_u_saturates(self):
        assert marginal_survival(0.0, 2.0) == 1.0
        assert marginal_survival(1e-12, 2.0) == pytest.approx(1.0, abs=1e-9)

    def test_gpd_und_exponential_families(self):
        assert 0 < marginal_survival(5.0, 1.0, "generalized_pareto") < 1
        assert 0 < marginal_survival(5.0, 0.0, "generalized_pareto") < 1

    def test_exact_threshold_inverts(self):
        n, k = 100_000, 316
        u = exact_threshold(n, k, 2.0)
        assert n * marginal_survival(u, 2.0) == pytest.approx(k, rel=1e-9)

    @given(u=st.floats(min_value=0.01, max_value=1000))
    @settings(max_examples=30)
    def test_monotone_in_u(self, u):
        assert marginal_survival(u, 2.0) >= marginal_survival(u * 1.5, 2.0)
