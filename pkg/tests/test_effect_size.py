import math

import numpy as np
import pytest

import ebtools.effect_size as es
from ebtools import (
    ConvergenceError,
    DataError,
    DomainError,
    ExtrapolationWarning,
    NaturalCubicBasis,
    ZVector,
    effect_size_report,
    fit_marginal_density,
    tweedie_estimate,
)


def standard_normal_pdf(x):
    return np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2 * math.pi)


def mixture_pdf(x):
    x = np.asarray(x)
    alt = np.exp(-0.5 * ((x - 2.5) / 1.25) ** 2) / (1.25 * math.sqrt(2 * math.pi))
    return 0.95 * standard_normal_pdf(x) + 0.05 * alt


def sample_mixture(rng, n=6033):
    is_null = rng.random(n) < 0.95
    return np.where(is_null, rng.normal(0, 1, n), rng.normal(2.5, 1.25, n))


class GaussianSlopeStub:
    """Stand-in density with the exact log-derivative of N(mean, var),
    bypassing estimation entirely."""

    def __init__(self, mean, var):
        self.mean, self.var = mean, var
        self.data_range = (-math.inf, math.inf)

    def log_density_slope(self, x):
        return -(np.asarray(x, dtype=float) - self.mean) / self.var


class TestNaturalCubicBasis:
    def test_derivative_matches_finite_differences(self):
        basis = NaturalCubicBasis(knots=(-2.0, -0.7, 0.1, 1.3, 2.4))
        grid = np.linspace(-1.9, 2.3, 73)
        h = 1e-6
        analytic = basis.derivative(grid)
        numeric = (basis.design(grid + h) - basis.design(grid - h)) / (2 * h)
        assert np.max(np.abs(analytic - numeric)) <= 1e-5

    def test_linear_beyond_boundary_knots(self):
        basis = NaturalCubicBasis(knots=(-1.0, 0.0, 1.0, 2.0))
        left = basis.derivative(np.array([-1.5, -3.0, -10.0]))
        right = basis.derivative(np.array([2.5, 4.0, 10.0]))
        assert np.allclose(left, left[0], atol=1e-9)
        assert np.allclose(right, right[0], atol=1e-9)

    def test_column_count_equals_df(self):
        basis = NaturalCubicBasis.equally_spaced(-3.0, 3.0, 7)
        assert basis.df == 7
        assert basis.design(np.zeros(5)).shape == (5, 7)

    def test_knot_validation(self):
        with pytest.raises(DomainError):
            NaturalCubicBasis(knots=(0.0, 1.0))
        with pytest.raises(DomainError):
            NaturalCubicBasis(knots=(0.0, 0.0, 1.0))


class TestFitMarginalDensity:
    def test_recovers_standard_normal(self):
        rng = np.random.default_rng(11)
        fit = fit_marginal_density(rng.normal(0, 1, 50_000), df=7, bins=90)
        grid = np.linspace(-3, 3, 601)
        assert np.max(np.abs(fit.pdf(grid) - standard_normal_pdf(grid))) <= 0.01

    def test_density_positive_and_normalized(self):
        rng = np.random.default_rng(12)
        fit = fit_marginal_density(rng.normal(0.5, 1.5, 4000), df=7, bins=60)
        lo, hi = fit.data_range
        grid = np.linspace(lo, hi, 801)
        assert np.all(fit.pdf(grid) > 0)
        assert 0.99 <= fit.integral() <= 1.01

    def test_mixture_sup_norm(self):
        hits = 0
        runs = 20
        for rep in range(runs):
            rng = np.random.default_rng(300 + rep)
            fit = fit_marginal_density(sample_mixture(rng), df=7, bins=90)
            lo, hi = fit.data_range
            grid = np.linspace(max(lo, -4.0), min(hi, 6.0), 801)
            if np.max(np.abs(fit.pdf(grid) - mixture_pdf(grid))) <= 0.015:
                hits += 1
        assert hits >= int(0.9 * runs)

    def test_empty_bins_are_valid_data(self):
        rng = np.random.default_rng(14)
        z = np.concatenate([rng.normal(-4, 0.4, 600), rng.normal(4, 0.4, 600)])
        fit = fit_marginal_density(z, df=5, bins=40)
        assert fit.integral() == pytest.approx(1.0, abs=0.01)

    def test_preconditions(self):
        rng = np.random.default_rng(15)
        z = rng.normal(0, 1, 500)
        with pytest.raises(DomainError):
            fit_marginal_density(z[:50], df=7, bins=90)
        with pytest.raises(DomainError):
            fit_marginal_density(z, df=2, bins=90)
        with pytest.raises(DomainError):
            fit_marginal_density(z, df=7, bins=10)

    def test_identical_values_refused(self):
        with pytest.raises(DataError):
            fit_marginal_density(np.full(500, 1.3), df=7, bins=90)

    def test_irls_iteration_cap_carries_trace(self, monkeypatch):
        monkeypatch.setattr(es, "IRLS_MAX_ITER", 1)
        rng = np.random.default_rng(16)
        with pytest.raises(ConvergenceError) as excinfo:
            fit_marginal_density(rng.normal(0, 1, 1000), df=7, bins=50)
        assert len(excinfo.value.trace) >= 1

    def test_uses_all_bins_not_only_central(self):
        # doubling only the tail mass must change the fitted tails
        rng = np.random.default_rng(17)
        base = np.clip(rng.normal(0, 1, 4000), -6, 6)
        spiked = np.concatenate([base, rng.normal(4.0, 0.3, 400)])
        fit_base = fit_marginal_density(base, df=7, bins=60)
        fit_spiked = fit_marginal_density(spiked, df=7, bins=60)
        assert fit_spiked.pdf(4.0) > 2.0 * fit_base.pdf(4.0)


class TestTweedieEstimate:
    def test_closed_form_gaussian_case(self):
        # marginal N(M, A + 1) from prior N(M, A): estimate is the linear
        # Bayes rule M + (A / (A + 1)) (z - M); evaluated on the exact density
        for prior_mean, prior_var in ((0.0, 1.0), (1.5, 0.5), (-2.0, 3.0)):
            stub = GaussianSlopeStub(prior_mean, prior_var + 1.0)
            grid = np.linspace(-5, 5, 101)
            expected = prior_mean + (prior_var / (prior_var + 1.0)) * (grid - prior_mean)
            assert np.max(np.abs(tweedie_estimate(stub, grid) - expected)) <= 1e-6

    def test_symmetric_density_is_unbiased_at_zero(self):
        rng = np.random.default_rng(18)
        z = rng.normal(0, 1.3, 30_000)
        fit = fit_marginal_density(np.concatenate([z, -z]), df=7, bins=80)
        assert tweedie_estimate(fit, 0.0) == pytest.approx(0.0, abs=1e-6)

    def test_analytic_slope_matches_finite_differences(self):
        rng = np.random.default_rng(19)
        fit = fit_marginal_density(rng.normal(0, 1, 5000), df=7, bins=60)
        lo, hi = fit.data_range
        grid = np.linspace(lo + 0.2, hi - 0.2, 101)
        h = 1e-6
        numeric = (fit.log_density(grid + h) - fit.log_density(grid - h)) / (2 * h)
        assert np.max(np.abs(fit.log_density_slope(grid) - numeric)) <= 1e-5

    def test_extrapolation_flagged(self):
        rng = np.random.default_rng(20)
        fit = fit_marginal_density(rng.normal(0, 1, 2000), df=5, bins=40)
        with pytest.warns(ExtrapolationWarning):
            value = tweedie_estimate(fit, fit.data_range[1] + 2.0)
        assert math.isfinite(value)

    def test_near_zero_flatness_on_null_dominated_mixtures(self):
        # with >= 93% nulls the estimate stays near zero in the center
        for rep in range(5):
            rng = np.random.default_rng(40 + rep)
            fit = fit_marginal_density(sample_mixture(rng), df=7, bins=90)
            grid = np.linspace(-1.5, 1.5, 61)
            assert np.max(np.abs(tweedie_estimate(fit, grid))) <= 0.5


class TestEffectSizeReport:
    def test_ranking_and_top_view(self):
        z = ZVector(
            z=np.array([0.1, -3.0, 2.0, 3.0, -0.5] + [0.0] * 195),
            labels=[f"c{i}" for i in range(200)],
        )
        report = effect_size_report(z, df=4, bins=20, top_k=3)
        assert [row[0] for row in report.top_rows()] == ["c1", "c3", "c2"]
        assert len(report.rows()) == 200

    def test_ties_keep_label_order(self):
        z = ZVector(
            z=np.array([2.0, -2.0, 2.0] + [0.1] * 197),
            labels=[f"c{i}" for i in range(200)],
        )
        report = effect_size_report(z, df=4, bins=20, top_k=3)
        assert [row[0] for row in report.top_rows()] == ["c0", "c1", "c2"]

    def test_top_cases_shrink_toward_origin(self):
        rng = np.random.default_rng(23)
        zv = ZVector(z=sample_mixture(rng))
        report = effect_size_report(zv, top_k=10)
        for _, z_value, mu in report.top_rows():
            assert abs(mu) < abs(z_value)
            assert math.copysign(1, mu) == math.copysign(1, z_value)

    def test_degenerate_input_refused(self):
        with pytest.raises(DataError):
            effect_size_report(np.full(300, 2.0))
