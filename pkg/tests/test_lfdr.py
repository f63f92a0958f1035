import math

import numpy as np
import pytest
from scipy.stats import norm

from seqfdr.exceptions import DegenerateSampleError, InsufficientDataError
from seqfdr.lfdr import (
    GaussianKde,
    TwoGroupDensity,
    estimate_pi0_jincai,
    estimate_pi0_storey,
    estimated_lfdr,
    kde,
    oracle_lfdr,
)


class TestOracleLfdr:
    def test_symmetric_prior_no_evidence(self):
        assert oracle_lfdr(0.0, 0.5) == pytest.approx(0.5)

    def test_direct_formula(self):
        # 0.8 / (0.8 + 0.2 * 4) = 0.5
        assert oracle_lfdr(math.log(4.0), 0.8) == pytest.approx(0.5)

    def test_saturated_llr(self):
        assert oracle_lfdr(709.0, 0.8) == pytest.approx(0.0, abs=1e-300)
        assert oracle_lfdr(-709.0, 0.8) == pytest.approx(1.0)

    def test_antitone_in_llr(self):
        llr = np.linspace(-30, 30, 201)
        vals = oracle_lfdr(llr, 0.7)
        assert np.all(np.diff(vals) < 0)
        assert np.all((vals >= 0) & (vals <= 1))

    def test_separation_at_large_n(self):
        # with long E1-style streams the posterior saturates toward truth
        rng = np.random.default_rng(6)
        n, m = 200, 500
        alt_llr = (0.25 * (rng.standard_normal((m, n)) + 0.25) - 0.03125).sum(axis=1)
        null_llr = (0.25 * rng.standard_normal((m, n)) - 0.03125).sum(axis=1)
        assert np.median(oracle_lfdr(alt_llr, 0.8)) < 0.05
        assert np.median(oracle_lfdr(null_llr, 0.8)) > 0.95


class TestJinCaiPi0:
    def test_degenerate_zeros_clamps_to_one(self):
        est = estimate_pi0_jincai([0.0, 0.0])
        assert est.value == 1.0

    def test_pure_null(self):
        z = np.random.default_rng(1).standard_normal(10_000)
        est = estimate_pi0_jincai(z, lam=0.1)
        assert 0.95 <= est.value <= 1.0

    def test_known_mixture(self):
        rng = np.random.default_rng(1)
        theta = rng.random(10_000) < 0.2
        z = rng.standard_normal(10_000) + np.where(theta, 3.0, 0.0)
        est = estimate_pi0_jincai(z, lam=0.1)
        assert 0.7 <= est.value <= 0.9

    def test_point_kernel_matches_cosine_formula(self):
        rng = np.random.default_rng(2)
        z = rng.standard_normal(500)
        t_m = math.sqrt(2 * 0.1 * math.log(z.size))
        raw = np.mean(np.cos(t_m * z)) * math.exp(t_m**2 / 2)
        est = estimate_pi0_jincai(z, lam=0.1, kernel="none")
        assert est.value == pytest.approx(np.clip(raw, 0.01, 1.0))

    def test_needs_two_scores(self):
        with pytest.raises(InsufficientDataError):
            estimate_pi0_jincai([0.3])


class TestStoreyPi0:
    def test_all_large_pvalues(self):
        assert estimate_pi0_storey([0.9, 0.8, 0.7, 0.6], 0.5).value == 1.0

    def test_direct_count(self):
        assert estimate_pi0_storey([0.01, 0.02, 0.9, 0.95], 0.5).value == 1.0

    def test_sparse_tail(self):
        p = [0.01] * 9 + [0.9]
        assert estimate_pi0_storey(p, 0.5).value == pytest.approx(0.2)

    def test_clamped_below(self):
        assert estimate_pi0_storey([0.01] * 50, 0.5).value == 0.01

    def test_bad_pvalues_rejected(self):
        with pytest.raises(ValueError):
            estimate_pi0_storey([0.5, 1.5], 0.5)


class TestKde:
    def test_two_point_closed_form(self):
        z = np.array([-1.0, 1.0])
        est = kde(z)
        sd = z.std(ddof=1)
        iqr = np.percentile(z, 75) - np.percentile(z, 25)
        h = 0.9 * min(sd, iqr / 1.34) * 2 ** (-0.2)
        assert est.bandwidth == pytest.approx(h)
        assert est(0.0) == pytest.approx(norm.pdf(1.0 / h) / h)

    def test_large_sample_tracks_normal_density(self):
        z = np.random.default_rng(1).standard_normal(10_000)
        est = kde(z)
        grid = np.linspace(-3, 3, 121)
        assert np.max(np.abs(est(grid) - norm.pdf(grid))) < 0.02

    def test_zero_spread_rejected(self):
        with pytest.raises(DegenerateSampleError):
            kde([0.0, 0.0, 0.0])

    def test_density_floor(self):
        est = kde([-1.0, 1.0])
        assert est(1e6) == pytest.approx(1e-12)

    def test_grid_path_matches_exact(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal(400)
        grid_est = GaussianKde(z)  # grid path for m > 64
        exact_est = GaussianKde(z, exact_threshold=1000)
        pts = np.linspace(-4, 4, 81)
        assert np.max(np.abs(grid_est(pts) - exact_est(pts))) < 5e-4


class TestEstimatedLfdr:
    def test_pure_null_identity(self):
        z = np.linspace(-2, 2, 9)
        vals = estimated_lfdr(z, 1.0, lambda pts: norm.pdf(pts))
        np.testing.assert_allclose(vals, 1.0)

    def test_ratio_half(self):
        vals = estimated_lfdr([0.3], 0.5, lambda pts: norm.pdf(pts))
        assert vals[0] == pytest.approx(0.5)

    def test_clamped_to_unit_interval(self):
        rng = np.random.default_rng(8)
        z = rng.normal(0, 3, 300)
        vals = estimated_lfdr(z, 0.9, GaussianKde(z))
        assert np.all((vals >= 0) & (vals <= 1))

    def test_tracks_oracle_on_known_mixture(self):
        rng = np.random.default_rng(1)
        theta = rng.random(10_000) < 0.2
        z = rng.standard_normal(10_000) + np.where(theta, 3.0, 0.0)
        pi0 = estimate_pi0_jincai(z, lam=0.1)
        t_hat = estimated_lfdr(z, pi0, GaussianKde(z))
        mix = 0.8 * norm.pdf(z) + 0.2 * norm.pdf(z - 3.0)
        t_oracle = 0.8 * norm.pdf(z) / mix
        assert np.abs(t_hat - t_oracle).mean() < 0.05


class TestJointFactorization:
    def test_single_stream_posterior_equals_joint_statistic(self):
        # the posterior computed from one stream's likelihood ratio matches
        # the joint-likelihood computation in which the other streams'
        # factors cancel
        from seqfdr.models import Gaussian, TwoGroupModel

        rng = np.random.default_rng(12)
        model = TwoGroupModel(0.8, Gaussian(0, 1), Gaussian(0.25, 1))
        m, n = 6, 9
        data = rng.standard_normal((n, m)) + 0.12
        log_f0 = model.null.log_density(data).sum(axis=0)
        log_f1 = model.alt.log_density(data).sum(axis=0)
        for i in range(m):
            # joint density ratio with every j != i factor written out
            others = [j for j in range(m) if j != i]
            mix_others = sum(
                np.logaddexp(
                    math.log(model.pi0) + log_f0[j],
                    math.log(model.pi1) + log_f1[j],
                )
                for j in others
            )
            log_num = math.log(model.pi0) + log_f0[i] + mix_others
            log_alt = math.log(model.pi1) + log_f1[i] + mix_others
            joint = 1.0 / (1.0 + math.exp(log_alt - log_num))
            single = oracle_lfdr(log_f1[i] - log_f0[i], model.pi0)
            assert joint == pytest.approx(float(single), abs=1e-12)


class TestTwoGroupDensity:
    def test_floors_at_null_component(self):
        rng = np.random.default_rng(2)
        z = rng.standard_normal(500)
        density = TwoGroupDensity(GaussianKde(z), 0.9)
        pts = np.linspace(-2, 2, 41)
        assert np.all(density(pts) >= 0.9 * norm.pdf(pts) - 1e-12)

    def test_pure_null_lfdr_mostly_one(self):
        rng = np.random.default_rng(2)
        z = rng.standard_normal(2000)
        density = TwoGroupDensity(GaussianKde(z), 1.0)
        vals = estimated_lfdr(z, 1.0, density)
        assert np.mean(vals == 1.0) > 0.9
