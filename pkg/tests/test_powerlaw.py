"""Robust 1d power-law / exponential fitting and BCa bootstrap intervals."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab import powerlaw
from walklab.errors import InvalidArgument, UndefinedRatio


def make_series(E=1.5, B=40.0, beta=0.5, n=12, noise=0.0, seed=0):
    xs = np.logspace(1, 5, n)
    rng = np.random.default_rng(seed)
    ys = E + B * xs**-beta + noise * rng.standard_normal(n)
    return powerlaw.Series1D(xs, ys)


class TestSeries:
    def test_sorts_inputs(self):
        s = powerlaw.Series1D(np.array([10.0, 1.0, 5.0]),
                              np.array([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(s.xs, [1.0, 5.0, 10.0])
        np.testing.assert_array_equal(s.ys, [1.0, 2.0, 3.0])

    def test_rejects_nonpositive_x(self):
        with pytest.raises(InvalidArgument):
            powerlaw.Series1D(np.array([0.0, 1.0]), np.array([1.0, 2.0]))

    def test_rejects_duplicate_x(self):
        with pytest.raises(InvalidArgument):
            powerlaw.Series1D(np.array([2.0, 2.0]), np.array([1.0, 2.0]))


class TestHuber:
    def test_rho_values(self):
        r = np.array([0.0, 0.5, 1.0, 3.0])
        rho = powerlaw.huber_rho(r, delta=1.0)
        np.testing.assert_allclose(rho, [0.0, 0.125, 0.5, 2.5], atol=1e-15)

    @given(
        r=st.floats(-100, 100, allow_nan=False),
        delta=st.floats(0.01, 10, allow_nan=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_rho_properties(self, r, delta):
        rho = float(powerlaw.huber_rho(np.array([r]), delta)[0])
        assert rho >= 0
        # even, and bounded above by the pure quadratic
        assert rho == pytest.approx(
            float(powerlaw.huber_rho(np.array([-r]), delta)[0]), abs=1e-12
        )
        assert rho <= 0.5 * r * r + 1e-12

    def test_delta_is_scaled_mad(self):
        ys = np.array([1.0, 2.0, 3.0, 4.0, 100.0])
        med = np.median(ys)
        mad = np.median(np.abs(ys - med))
        assert powerlaw.huber_delta_for(ys) == pytest.approx(1.4826 * mad)

    def test_delta_falls_back_when_mad_zero(self):
        ys = np.array([1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0])
        # MAD = 0; fall back to 0.1 * std
        assert powerlaw.huber_delta_for(ys) == pytest.approx(0.1 * ys.std())


class TestPowerLawFit:
    def test_noiseless_recovery(self):
        s = make_series(E=1.0, B=2.0, beta=0.5)
        fit = powerlaw.fit_power_law(s)
        assert fit.E == pytest.approx(1.0, abs=1e-6)
        assert fit.beta == pytest.approx(0.5, abs=1e-6)
        assert fit.B == pytest.approx(2.0, rel=1e-6)
        assert fit.A == pytest.approx(fit.B * fit.x0**-fit.beta, rel=1e-12)
        assert fit.mse < 1e-12

    def test_noisy_recovery(self):
        s = make_series(E=2.0, B=100.0, beta=0.7, n=30, noise=0.01, seed=1)
        fit = powerlaw.fit_power_law(s)
        assert fit.beta == pytest.approx(0.7, abs=0.05)
        assert fit.E == pytest.approx(2.0, abs=0.05)

    def test_robust_to_single_outlier(self):
        s = make_series(E=1.0, B=10.0, beta=0.4, n=20)
        ys = s.ys.copy()
        ys[10] += 5.0
        corrupted = powerlaw.Series1D(s.xs, ys)
        fit = powerlaw.fit_power_law(corrupted)
        assert fit.beta == pytest.approx(0.4, abs=0.05)

    def test_fix_e_zero_lowers_exponent(self):
        # with a positive offset absorbed into the power law, the apparent
        # exponent must come out shallower
        s = make_series(E=1.5, B=50.0, beta=0.6, n=25)
        free = powerlaw.fit_power_law(s)
        forced = powerlaw.fit_power_law(s, fix_E_zero=True)
        assert forced.E == 0.0
        assert forced.beta < free.beta

    def test_predict_matches_formula(self):
        s = make_series()
        fit = powerlaw.fit_power_law(s)
        x = np.array([123.0, 4567.0])
        manual = fit.E + fit.B * x**-fit.beta
        np.testing.assert_allclose(fit.predict(x), manual, rtol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(InvalidArgument):
            powerlaw.fit_power_law(
                powerlaw.Series1D(np.array([1.0, 2.0, 3.0]), np.ones(3))
            )

    @given(
        beta=st.floats(0.1, 2.0),
        log_b=st.floats(-1, 4),
        e=st.floats(0.0, 5.0),
    )
    @settings(max_examples=20, deadline=None)
    def test_noiseless_recovery_property(self, beta, log_b, e):
        xs = np.logspace(0.5, 4, 15)
        ys = e + 10.0**log_b * xs**-beta
        fit = powerlaw.fit_power_law(powerlaw.Series1D(xs, ys))
        assert fit.beta == pytest.approx(beta, abs=1e-4)


class TestExponentialFit:
    def test_noiseless_recovery(self):
        xs = np.linspace(1, 50, 20)
        ys = 0.5 + 3.0 * np.exp(-0.1 * xs)
        fit = powerlaw.fit_exponential(powerlaw.Series1D(xs, ys))
        assert fit.a == pytest.approx(0.5, abs=1e-6)
        assert fit.c == pytest.approx(0.1, abs=1e-6)
        assert fit.mse < 1e-12

    def test_mse_ratio(self):
        s = make_series(n=20)
        p = powerlaw.fit_power_law(s)
        e = powerlaw.fit_exponential(s)
        ratio = powerlaw.mse_ratio(p, e)
        assert ratio == pytest.approx(p.mse / e.mse)
        # power-law data: the power law must win decisively
        assert ratio < 0.1

    def test_mse_ratio_undefined_on_perfect_exp(self):
        xs = np.linspace(1, 10, 10)
        ys = 1.0 + np.exp(-0.5 * xs)
        s = powerlaw.Series1D(xs, ys)
        e = powerlaw.fit_exponential(s)
        p = powerlaw.fit_power_law(s)
        if e.mse == 0.0:
            with pytest.raises(UndefinedRatio):
                powerlaw.mse_ratio(p, e)


class TestBootstrap:
    def test_interval_brackets_point_estimate(self):
        s = make_series(E=1.0, B=20.0, beta=0.5, n=20, noise=0.01, seed=2)
        fit = powerlaw.fit_power_law(s)
        ci = powerlaw.bca_ci(s, fit, n_boot=400, seed=0)
        for name in ("E", "beta"):
            assert ci.lo[name] <= fit.params()[name] <= ci.hi[name]
            assert ci.stderr[name] > 0
        assert ci.n_failed == 0
        assert not ci.high_failure_rate

    def test_deterministic_in_seed(self):
        s = make_series(noise=0.02, n=15, seed=3)
        fit = powerlaw.fit_power_law(s)
        a = powerlaw.bca_ci(s, fit, n_boot=200, seed=5)
        b = powerlaw.bca_ci(s, fit, n_boot=200, seed=5)
        assert a.lo == b.lo and a.hi == b.hi

    def test_wider_noise_wider_interval(self):
        fits = {}
        for noise in (0.005, 0.05):
            s = make_series(n=20, noise=noise, seed=4)
            fit = powerlaw.fit_power_law(s)
            ci = powerlaw.bca_ci(s, fit, n_boot=300, seed=0)
            fits[noise] = ci.hi["beta"] - ci.lo["beta"]
        assert fits[0.05] > fits[0.005]

    def test_rejects_tiny_n_boot(self):
        s = make_series()
        fit = powerlaw.fit_power_law(s)
        with pytest.raises(InvalidArgument):
            powerlaw.bca_ci(s, fit, n_boot=50)


class TestSummary:
    def test_summarize(self):
        fits = [
            powerlaw.fit_power_law(make_series(E=e, beta=b, n=10))
            for e, b in [(1.0, 0.4), (1.2, 0.5), (0.9, 0.6)]
        ]
        summary = powerlaw.summarize_exponents(fits, axis="D")
        assert summary.mean == pytest.approx(0.5, abs=1e-4)
        assert summary.entropy_proxy == pytest.approx(0.9, abs=1e-4)
        assert summary.n_fits == 3

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            powerlaw.summarize_exponents([], axis="D")
