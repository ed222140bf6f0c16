import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from tailbreak import (
    LEGACY_CRITVAL_95,
    LmsvSpec,
    decide,
    gamma_path,
    kolmogorov_cdf,
    kolmogorov_quantile,
    mc_critical_value,
    resolve_t0,
    simulate_lmsv,
    test_statistic,
)
from tailbreak.changepoint import _bridge_chunk, _hill_gammas
from tailbreak.errors import NoAdmissibleK, ValidationError
from tailbreak.estimators import hill_sequential
from tailbreak.seeding import mix64, philox

X4 = np.array([1.0, 2.0, 4.0, 8.0])


class TestGammaPath:
    def test_hand_example(self):
        path = gamma_path(X4, 2, t0=0.4, variant="hill")
        assert path.ks.tolist() == [2, 3]
        # k=2: 0.5 * |ln2 / (1.5 ln2) - 1| = 1/6; k=3: 0.75 * (1/3) = 1/4
        assert path.values[0] == pytest.approx(1.0 / 6.0, rel=1e-12)
        assert path.values[1] == pytest.approx(0.25, rel=1e-12)

    def test_statistic_hand_example(self):
        sup, k = test_statistic(X4, 2, 0.4, "hill")
        assert sup == pytest.approx(0.25, rel=1e-12)
        assert k == 3

    def test_incremental_matches_definitional(self):
        rng = np.random.default_rng(21)
        x = rng.pareto(1.3, size=400) + 1.0
        k_n = 60
        gammas = _hill_gammas(x, k_n)
        n = x.size
        for k in (7, 50, 133, 321, 400):
            expected = hill_sequential(x, k_n, t=k / n).gamma
            assert gammas[k] == expected  # bit-for-bit

    def test_threshold_variant_matches_pointwise(self):
        rng = np.random.default_rng(22)
        x = rng.pareto(1.0, size=300) + 1.0
        path = gamma_path(x, 30, t0=0.1, variant="threshold")
        u = float(np.sort(x)[300 - 31])
        from tailbreak.estimators import gamma_threshold

        full = gamma_threshold(x, u).gamma
        for k, value in zip(path.ks[:5], path.values[:5]):
            g_k = gamma_threshold(x, u, t=k / 300).gamma
            assert value == pytest.approx(
                (k / 300) * abs(g_k / full - 1.0), rel=1e-12
            )

    def test_zero_where_prefix_matches_full(self):
        # every exceedance of u = 2 has the same log-excess
        x = np.array([1.0, 2.0, 8.0, 1.0, 2.0, 8.0])
        path = gamma_path(x, 2, t0=0.5, variant="threshold")
        assert np.allclose(path.values, 0.0)
        sup, k = test_statistic(x, 2, 0.5, "threshold")
        assert sup == 0.0
        assert k == 3  # earliest k on ties

    def test_scale_invariance_binary_exact(self):
        rng = np.random.default_rng(23)
        x = rng.pareto(2.0, size=200) + 1.0
        base = gamma_path(x, 25, 0.1, "hill")
        for c in (0.5, 4.0):
            scaled = gamma_path(c * x, 25, 0.1, "hill")
            assert np.array_equal(base.values, scaled.values)
            assert np.array_equal(base.ks, scaled.ks)

    @given(
        c=st.floats(min_value=1e-2, max_value=1e2),
        seed=st.integers(min_value=0, max_value=200),
    )
    @settings(max_examples=30)
    def test_argmax_scale_invariance(self, c, seed):
        x = np.random.default_rng(seed).pareto(1.5, size=150) + 1.0
        _, k1 = test_statistic(x, 20, 0.1, "hill")
        _, k2 = test_statistic(c * x, 20, 0.1, "hill")
        assert k1 == k2

    def test_no_admissible_k(self):
        with pytest.raises(NoAdmissibleK):
            gamma_path(X4, 2, t0=0.95, variant="hill")

    def test_validation(self):
        with pytest.raises(ValidationError):
            gamma_path(X4, 2, t0=0.0)
        with pytest.raises(ValidationError):
            gamma_path(X4, 5, t0=0.5)
        with pytest.raises(ValidationError):
            gamma_path(X4, 2, t0=0.5, variant="cusum")


class TestKolmogorovLaw:
    def test_value_at_95_quantile(self):
        assert 0.9495 <= kolmogorov_cdf(1.3581) <= 0.9505

    def test_limits(self):
        assert kolmogorov_cdf(0.04) == pytest.approx(0.0, abs=1e-12)
        assert kolmogorov_cdf(10.0) == 1.0
        assert kolmogorov_cdf(-1.0) == 0.0

    def test_strictly_increasing_on_grid(self):
        grid = np.arange(0.1, 3.0, 0.01)
        vals = [kolmogorov_cdf(float(x)) for x in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_matches_scipy_series(self):
        # independent implementation of the same classical law
        for x in np.arange(0.3, 3.0, 0.07):
            ours = kolmogorov_cdf(float(x))
            theirs = 1.0 - float(scipy.special.kolmogorov(x))
            assert ours == pytest.approx(theirs, abs=1e-10)

    def test_quantile_round_trip(self):
        for p in (0.1, 0.5, 0.9, 0.95, 0.99):
            assert kolmogorov_cdf(kolmogorov_quantile(p)) == pytest.approx(
                p, abs=1e-9
            )

    def test_named_quantiles(self):
        assert kolmogorov_quantile(0.95) == pytest.approx(1.35810, abs=1e-4)
        assert kolmogorov_quantile(0.5) == pytest.approx(0.82757, abs=1e-4)

    def test_legacy_constant(self):
        assert LEGACY_CRITVAL_95 == 1.3463348


class TestMcCriticalValue:
    def test_deterministic(self):
        a = mc_critical_value(0.95, 0.0, 2000, 1024, seed=17)
        b = mc_critical_value(0.95, 0.0, 2000, 1024, seed=17)
        assert a == b

    def test_quantile_monotone_in_level(self):
        q95 = mc_critical_value(0.95, 0.0, 5000, 1024, seed=17)
        q99 = mc_critical_value(0.99, 0.0, 5000, 1024, seed=17)
        assert q99 > q95

    def test_close_to_analytic_at_reduced_size(self):
        # the full-strength comparison runs in the acceptance suite
        v = mc_critical_value(0.95, 0.0, 20_000, 2048, seed=5)
        assert abs(v - kolmogorov_quantile(0.95)) <= 0.025

    def test_t0_restriction_shrinks_sup(self):
        lo = mc_critical_value(0.95, 0.6, 5000, 1024, seed=17)
        hi = mc_critical_value(0.95, 0.0, 5000, 1024, seed=17)
        assert lo < hi

    def test_bridge_construction_moments(self):
        # mean 0 and Var(bridge at t = 1/2) = 1/4, within 5%
        bridges = _bridge_chunk(philox(mix64(99, 0)), 10_000, 1024)
        mid = bridges[:, 511]  # t = 512/1024 = 0.5
        assert abs(mid.mean()) < 0.02
        assert abs(mid.var() - 0.25) <= 0.0125
        assert np.allclose(bridges[:, -1], 0.0, atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValidationError):
            mc_critical_value(0.95, 0.0, 100, 1024)
        with pytest.raises(ValidationError):
            mc_critical_value(0.95, 0.0, 2000, 100)
        with pytest.raises(ValidationError):
            mc_critical_value(1.5, 0.0, 2000, 1024)


class TestResolveT0:
    def test_passthrough_float(self):
        assert resolve_t0(1000, 100, 0.25) == 0.25

    def test_auto_min(self):
        # smallest k with floor(k_n k / n) >= 1
        assert resolve_t0(1000, 100, "auto-min") == pytest.approx(0.01)
        assert resolve_t0(1000, 200, "auto-min") == pytest.approx(0.005)

    def test_auto_needs_ten(self):
        assert resolve_t0(1000, 100, "auto") == pytest.approx(0.1)
        with pytest.raises(ValidationError):
            resolve_t0(1000, 9, "auto")

    def test_bad_policy(self):
        with pytest.raises(ValidationError):
            resolve_t0(1000, 100, "sometimes")
        with pytest.raises(ValidationError):
            resolve_t0(1000, 100, 1.5)


class TestDecide:
    def test_report_is_consistent(self):
        x = simulate_lmsv(LmsvSpec(n=800, hurst=0.6, alpha=2.0, seed=3))
        report = decide(x, 80, t0="auto-min", critval_source="user",
                        critical_value=1.3581)
        assert report.reject == (report.statistic_scaled > report.critical_value)
        assert report.statistic_scaled == pytest.approx(
            math.sqrt(80) * report.statistic_raw
        )
        assert 1 <= report.change_index < 800
        assert report.change_fraction == report.change_index / 800
        assert report.seed is None  # no Monte Carlo stream involved
        assert report.critval_source == "user"

    def test_level_monotonicity(self):
        # a rejection at the 1% level implies one at the 5% level
        for seed in range(12):
            x = simulate_lmsv(LmsvSpec(n=500, hurst=0.7, alpha=1.0, seed=seed,
                                       change_height=-0.5, change_fraction=0.5))
            r05 = decide(x, 50, level=0.05, critval_source="kolmogorov")
            r01 = decide(x, 50, level=0.01, critval_source="kolmogorov")
            if r01.reject:
                assert r05.reject

    def test_user_source_needs_value(self):
        x = simulate_lmsv(LmsvSpec(n=300, hurst=0.6, alpha=2.0, seed=1))
        with pytest.raises(ValidationError):
            decide(x, 30, critval_source="user")

    def test_kolmogorov_source(self):
        x = simulate_lmsv(LmsvSpec(n=300, hurst=0.6, alpha=2.0, seed=1))
        report = decide(x, 30, level=0.05, critval_source="kolmogorov")
        assert report.critical_value == pytest.approx(kolmogorov_quantile(0.95))

    def test_change_date_from_timestamps(self):
        stamps = np.arange("2020-01-01", "2020-01-21", dtype="datetime64[D]")
        from tailbreak import TimeSeries

        rng = np.random.default_rng(7)
        ts = TimeSeries(rng.pareto(1.0, size=20) + 1.0, stamps)
        report = decide(ts, 5, t0="auto-min", critval_source="user",
                        critical_value=1.3581)
        assert report.change_date == str(stamps[report.change_index - 1])

    def test_quiet_series_is_not_flagged(self):
        # deterministic Pareto-quantile ramp: no break, tame statistic
        n = 2000
        i = np.arange(1, n + 1)
        x = ((n + 1) / (n + 1 - i)) ** 0.5  # exact Pareto(2) quantiles
        report = decide(x, 400, t0="auto", critval_source="user",
                        critical_value=1.3581)
        assert not report.reject
        assert report.statistic_scaled < 0.95
