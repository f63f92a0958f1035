import numpy as np
import pytest
from scipy import stats
from scipy.special import ndtri

from seqfdr.examples import make_example
from seqfdr.exceptions import ConfigError, DegenerateSampleError
from seqfdr.models import Binomial, Cauchy, Exponential, Gaussian, TwoGroupModel
from seqfdr.pipelines import LlrPipeline, OneSampleTPipeline, TwoSampleTPipeline


def feed(pipeline, payloads):
    pipeline.reset(len(payloads[0]))
    for payload in payloads:
        pipeline.consume(payload)
    return pipeline


class TestLlrNullCdfs:
    """The z-scores must be exactly standard normal under each null family."""

    def _null_z_sample(self, model, n_stages, m=20_000, seed=0):
        rng = np.random.default_rng(seed)
        pipeline = LlrPipeline(model)
        pipeline.reset(m)
        for _ in range(n_stages):
            pipeline.consume(model.null.sample(rng, m))
        return pipeline.zscores()

    @pytest.mark.parametrize(
        "model",
        [
            TwoGroupModel(0.8, Gaussian(0, 1), Gaussian(0.25, 1)),
            TwoGroupModel(0.8, Exponential(1.0), Exponential(1.2)),
            TwoGroupModel(0.8, Gaussian(0, 1.0), Gaussian(0, 1.2)),
        ],
        ids=["gaussian-shift", "exponential", "gaussian-scale"],
    )
    def test_null_zscores_standard_normal(self, model):
        z = self._null_z_sample(model, n_stages=7)
        stat = stats.kstest(z, "norm").statistic
        assert stat < 0.012  # ~1.64/sqrt(20000) is 0.0116 at the 10% level

    def test_binomial_null_cdf_values(self):
        model = TwoGroupModel(0.8, Binomial(7, 0.1), Binomial(7, 0.3))
        pipeline = LlrPipeline(model)
        pipeline.reset(3)
        pipeline.consume(np.array([0.0, 3.0, 7.0]))
        # cumulative LLR is monotone in the success count, so the null CDF
        # at the observed LLR equals the Binomial(7, 0.1) CDF at the count
        probs = stats.norm.cdf(pipeline.zscores())
        expected = stats.binom.cdf([0, 3, 7], 7, 0.1)
        np.testing.assert_allclose(probs, expected, atol=1e-12)
        assert pipeline.discrete

    def test_simulated_null_fallback_for_cauchy(self):
        model = TwoGroupModel(0.8, Cauchy(0, 1), Cauchy(0.25, 1))
        pipeline = LlrPipeline(model, null_table_draws=20_000, null_table_seed=1)
        rng = np.random.default_rng(2)
        pipeline.reset(5000)
        pipeline.consume(model.null.sample(rng, 5000))
        z = pipeline.zscores()
        stat = stats.kstest(z, "norm").statistic
        assert stat < 0.03

    def test_pvalues_are_upper_tail(self):
        model = TwoGroupModel(0.8, Gaussian(0, 1), Gaussian(0.25, 1))
        pipeline = LlrPipeline(model)
        pipeline.reset(2)
        pipeline.consume(np.array([3.0, -3.0]))
        p = pipeline.pvalues()
        assert p[0] < 0.01 and p[1] > 0.99

    def test_mixture_alt_tracks_components(self):
        spec = make_example("E5", m=4, pi1=0.5)
        pipeline = LlrPipeline(spec.model)
        pipeline.reset(4)
        x = np.array([0.5, -0.5, 1.0, 0.0])
        pipeline.consume(x)
        # posterior marginalizes the two components: direct computation
        comp = spec.model.alt.components
        w = spec.model.alt.weights
        num = w[0] * np.exp(comp[0].log_density(x)) + w[1] * np.exp(comp[1].log_density(x))
        expected = np.log(num) - spec.model.null.log_density(x)
        np.testing.assert_allclose(pipeline.cum_llr, expected, atol=1e-12)
        with pytest.raises(ConfigError):
            pipeline.zscores()


class TestOneSampleTPipeline:
    def test_matches_batch_statistic(self):
        rng = np.random.default_rng(3)
        data = rng.normal(0.3, 1.2, (6, 50))
        pipeline = feed(OneSampleTPipeline(), list(data))
        stats_vec, df = pipeline.statistics()
        ref = stats.ttest_1samp(data, 0.0, axis=0)
        np.testing.assert_allclose(stats_vec, ref.statistic, atol=1e-10)
        assert df == 5

    def test_zscores_from_t_null(self):
        rng = np.random.default_rng(4)
        data = rng.normal(0.0, 1.0, (4, 10))
        pipeline = feed(OneSampleTPipeline(), list(data))
        stats_vec, df = pipeline.statistics()
        np.testing.assert_allclose(
            pipeline.zscores(), ndtri(stats.t.cdf(stats_vec, df)), atol=1e-9
        )

    def test_degenerate_stream_named(self):
        pipeline = OneSampleTPipeline()
        pipeline.reset(2)
        pipeline.consume(np.array([1.0, 1.0]))
        pipeline.consume(np.array([2.0, 1.0]))
        with pytest.raises(DegenerateSampleError, match="stream 1"):
            pipeline.statistics()


class TestTwoSampleTPipeline:
    def test_matches_batch_pooled(self):
        rng = np.random.default_rng(5)
        case = rng.normal(0.4, 1.0, (7, 30))
        control = rng.normal(0.0, 1.0, (5, 30))
        pipeline = TwoSampleTPipeline()
        pipeline.reset(30)
        for row in case:
            pipeline.consume((row, None))
        for row in control:
            pipeline.consume((None, row))
        stats_vec, df = pipeline.statistics()
        ref = stats.ttest_ind(case, control, axis=0, equal_var=True)
        np.testing.assert_allclose(stats_vec, ref.statistic, atol=1e-10)
        assert df == 10
        assert pipeline.n == 12

    def test_welch_variant(self):
        rng = np.random.default_rng(6)
        case = rng.normal(0.0, 2.0, (8, 12))
        control = rng.normal(0.0, 1.0, (6, 12))
        pipeline = TwoSampleTPipeline(welch=True)
        pipeline.reset(12)
        for row in case:
            pipeline.consume((row, None))
        for row in control:
            pipeline.consume((None, row))
        stats_vec, _ = pipeline.statistics()
        ref = stats.ttest_ind(case, control, axis=0, equal_var=False)
        np.testing.assert_allclose(stats_vec, ref.statistic, atol=1e-10)

    def test_two_sided_pvalues(self):
        rng = np.random.default_rng(7)
        pipeline = TwoSampleTPipeline()
        pipeline.reset(5)
        for _ in range(4):
            pipeline.consume((rng.standard_normal(5), rng.standard_normal(5)))
        stats_vec, df = pipeline.statistics()
        expected = 2 * np.minimum(stats.t.cdf(stats_vec, df), stats.t.sf(stats_vec, df))
        np.testing.assert_allclose(pipeline.pvalues(two_sided=True), expected, atol=1e-9)

    def test_not_ready_before_two_per_arm(self):
        pipeline = TwoSampleTPipeline()
        pipeline.reset(3)
        pipeline.consume((np.zeros(3), None))
        pipeline.consume((None, np.zeros(3)))
        assert not pipeline.ready
