import itertools
import logging
import math

import numpy as np
import pytest
from scipy import integrate

from ebtools import (
    DomainError,
    EmptyTailWarning,
    GaussianMixture,
    GaussianParams,
    NullModel,
    TwoGroupsModel,
    bh_threshold,
    fdr_hat,
    normal_sf,
    true_fdr,
)

THEORETICAL = NullModel.theoretical(p0=1.0)


def bh_stepup_oracle(z, q):
    """Classical step-up procedure on one-sided p-values, brute force."""
    p = [normal_sf(v) for v in z]
    order = sorted(range(len(z)), key=lambda i: p[i])
    largest = 0
    for rank, i in enumerate(order, start=1):
        if p[i] <= rank * q / len(z):
            largest = rank
    if largest == 0:
        return frozenset()
    cut = p[order[largest - 1]]
    return frozenset(i for i in range(len(z)) if p[i] <= cut)


class TestFdrHat:
    def test_tail_heavy_configuration(self, prostate_like):
        value = fdr_hat(prostate_like, 3.0, THEORETICAL, "right")
        assert value == pytest.approx(8.14 / 49, abs=5e-4)
        assert value == pytest.approx(0.1661, abs=5e-4)

    def test_ten_exceedances_instead(self):
        rng = np.random.default_rng(1)
        bulk = np.clip(rng.normal(0, 1, 6023), -2.89, 2.89)
        z = np.concatenate([bulk, np.linspace(3.0, 5.0, 10)])
        assert fdr_hat(z, 3.0, THEORETICAL, "right") == pytest.approx(0.814, abs=5e-3)

    def test_minus_infinity_cutoff_returns_p0(self):
        z = np.array([-1.0, 0.0, 2.0])
        null = NullModel.theoretical(p0=0.8)
        assert fdr_hat(z, -math.inf, null, "right") == pytest.approx(0.8, rel=1e-12)

    def test_empty_tail_flagged_as_infinite(self):
        z = np.array([-5.0, -6.0, -7.0])
        with pytest.warns(EmptyTailWarning):
            value = fdr_hat(z, 3.0, THEORETICAL, "right")
        assert value == math.inf

    def test_raw_estimate_may_exceed_one(self):
        z = np.array([-3.0, -2.0, -1.0, 2.2])
        assert fdr_hat(z, 2.2, THEORETICAL, "right") < 1.0
        # expected null count beyond -1 is 4 * sf(-1) ~ 3.4 against 2 observed
        assert fdr_hat(z, -1.0, THEORETICAL, "right") == pytest.approx(
            4 * normal_sf(-1.0) / 2, rel=1e-12
        )
        assert fdr_hat(z, -1.0, THEORETICAL, "right") > 1.0


class TestBhThreshold:
    def test_tail_heavy_q_one_sixth(self, prostate_like):
        report = bh_threshold(prostate_like, 1 / 6, THEORETICAL, "right")
        assert report.threshold == 3.0
        assert report.n_discoveries == 49
        assert report.fdr_at_threshold <= 1 / 6

    def test_vacuous_control_discovers_everything(self):
        z = np.array([-1.0, 0.3, 2.0, 0.7])
        report = bh_threshold(z, 0.999, THEORETICAL, "right")
        assert report.threshold == z.min()
        assert report.n_discoveries == 4

    def test_two_point_hand_example(self):
        z = np.array([4.0, 0.0])
        report = bh_threshold(z, 0.1, THEORETICAL, "right")
        # at c = 4: estimate = 2 * sf(4) / 1, far below 0.1; at c = 0 it is 1.0
        assert report.threshold == 4.0
        assert list(report.discoveries) == [0]
        assert report.fdr_at_threshold == pytest.approx(2 * normal_sf(4.0), rel=1e-12)

    def test_no_threshold_when_unachievable(self):
        z = np.array([0.1, 0.2, 0.0, -0.1])
        report = bh_threshold(z, 0.01, THEORETICAL, "right")
        assert report.threshold is None
        assert report.n_discoveries == 0
        assert report.fdr_at_threshold is None

    def test_ties_at_threshold_all_included(self):
        z = np.array([3.5, 3.5, 3.5, 0.0, -0.2, 0.1])
        report = bh_threshold(z, 0.1, THEORETICAL, "right")
        assert report.threshold == 3.5
        assert sorted(report.discoveries) == [0, 1, 2]

    def test_left_side_mirrors_right(self):
        rng = np.random.default_rng(5)
        z = rng.normal(0, 1.4, 300)
        right = bh_threshold(z, 0.2, THEORETICAL, "right")
        left = bh_threshold(-z, 0.2, THEORETICAL, "left")
        assert left.threshold == pytest.approx(-right.threshold, abs=1e-12)
        assert sorted(left.discoveries) == sorted(right.discoveries)

    def test_discoveries_satisfy_threshold_inequality(self, prostate_like):
        report = bh_threshold(prostate_like, 0.25, THEORETICAL, "right")
        assert np.all(prostate_like.z[report.discoveries] >= report.threshold)
        others = np.setdiff1d(np.arange(len(prostate_like)), report.discoveries)
        assert np.all(prostate_like.z[others] < report.threshold)

    def test_curve_points_are_consistent(self):
        z = np.array([1.0, -0.5, 2.5, 0.0])
        report = bh_threshold(z, 0.5, THEORETICAL, "right")
        assert len(report.curve) == 4
        for point in report.curve:
            expected = 4 * normal_sf(point.cutoff) / point.n_beyond
            assert point.fdr == pytest.approx(expected, rel=1e-12)
            assert point.fdr_clipped <= 1.0
        assert len(report.case_fdr) == 4

    def test_q_domain(self):
        with pytest.raises(DomainError):
            bh_threshold(np.array([1.0]), 0.0, THEORETICAL)
        with pytest.raises(DomainError):
            bh_threshold(np.array([1.0]), 1.0, THEORETICAL)

    def test_stepup_equivalence_on_small_grid(self):
        grid = [-2.0, -1.0, 0.0, 0.8, 1.5, 2.2, 2.9, 3.6]
        for size in (1, 2, 3, 4):
            for combo in itertools.combinations_with_replacement(grid, size):
                report = bh_threshold(np.array(combo), 0.1, THEORETICAL, "right")
                assert frozenset(int(i) for i in report.discoveries) == bh_stepup_oracle(combo, 0.1)


class TestTrueFdr:
    def test_all_null_gives_one(self):
        model = TwoGroupsModel(p0=1.0)
        for c in (-2.0, 0.0, 3.0):
            assert true_fdr(model, c, "right") == pytest.approx(1.0)

    def test_vanishing_null_proportion(self):
        # p1 -> 1 limiting case: the true Fdr goes to zero
        model = TwoGroupsModel(p0=1e-12, alt=GaussianMixture.single(3.0, 1.0))
        assert true_fdr(model, 3.0, "right") < 1e-9

    def test_against_quadrature_oracle(self):
        model = TwoGroupsModel(
            p0=0.95,
            null=GaussianParams(0.0, 1.0),
            alt=GaussianMixture.single(3.0, 1.0),
        )

        def phi(u, mean, sd):
            return math.exp(-0.5 * ((u - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))

        null_tail, _ = integrate.quad(lambda u: phi(u, 0, 1), 3.0, np.inf)
        alt_tail, _ = integrate.quad(lambda u: phi(u, 3, 1), 3.0, np.inf)
        oracle = 0.95 * null_tail / (0.95 * null_tail + 0.05 * alt_tail)
        assert true_fdr(model, 3.0, "right") == pytest.approx(oracle, abs=1e-8)

    def test_empty_mixture_tail_is_domain_error(self):
        model = TwoGroupsModel(p0=1.0)
        with pytest.raises(DomainError):
            true_fdr(model, math.inf, "right")

    def test_estimate_tracks_truth_on_simulated_data(self):
        # consistency: |estimate - truth| <= 0.03 where the tail holds >= 200
        # cases, in >= 90% of replications
        model = TwoGroupsModel(p0=0.9, alt=GaussianMixture.single(3.0, 1.0))
        null = NullModel.theoretical(p0=0.9)
        hits = 0
        runs = 30
        for rep in range(runs):
            rng = np.random.default_rng(900 + rep)
            z, _ = model.sample(5000, rng)
            c = 2.0
            assert int((z >= c).sum()) >= 200
            if abs(fdr_hat(z, c, null, "right") - true_fdr(model, c, "right")) <= 0.03:
                hits += 1
        assert hits >= int(0.9 * runs)


class TestNullModel:
    def test_theoretical_forces_standard_normal(self):
        with pytest.raises(DomainError):
            NullModel(kind="theoretical", params=GaussianParams(0.1, 1.0), p0=1.0)

    def test_p0_defaults_to_one_with_notice(self, caplog):
        with caplog.at_level(logging.INFO, logger="ebtools.fdr"):
            null = NullModel.theoretical()
        assert null.p0 == 1.0
        assert any("defaulting to 1.0" in message for message in caplog.messages)

    def test_p0_domain(self):
        with pytest.raises(DomainError):
            NullModel.theoretical(p0=0.0)
        with pytest.raises(DomainError):
            NullModel.theoretical(p0=1.5)


class TestTwoGroupsModel:
    def test_requires_alt_when_non_null_mass(self):
        with pytest.raises(DomainError):
            TwoGroupsModel(p0=0.9)

    def test_point_mass_alt_rejected(self):
        with pytest.raises(DomainError):
            TwoGroupsModel(p0=0.9, alt=GaussianMixture.point_mass_plus_normal(0.5, 3.0, 1.0))

    def test_sampling_matches_tail_probabilities(self):
        model = TwoGroupsModel(p0=0.8, alt=GaussianMixture.single(2.5, 1.2))
        rng = np.random.default_rng(4)
        z, is_null = model.sample(200_000, rng)
        assert abs(is_null.mean() - 0.8) < 0.01
        for c in (-1.0, 1.0, 2.0):
            empirical = (z >= c).mean()
            assert empirical == pytest.approx(model.mixture_tail(c, "right"), abs=0.01)

    def test_mixture_weights_validated(self):
        with pytest.raises(DomainError):
            GaussianMixture(weights=(0.5, 0.4), means=(0.0, 1.0), sds=(1.0, 1.0))
