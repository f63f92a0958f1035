"""Benchmark testing problems and their data generators.

Seven stock problems cover gaussian mean and scale shifts, exponential
rates, binomial success probabilities, a case-control stream with a bimodal
alternative, a one-sample t pipeline, and a cauchy shift whose LLR null is
tabulated by simulation.  Each spec bundles the generating two-group model
with the statistic its sequential test runs on.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .models import Binomial, Cauchy, Exponential, FiniteMixture, Gaussian, TwoGroupModel

EXAMPLE_IDS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7")


@dataclass
class ExampleSpec:
    """One benchmark problem: model, statistic choice, and dimensions."""

    example_id: str
    m: int
    pi1: float
    model: TwoGroupModel
    statistic: str = "llr"
    paired: bool = False
    stream_mixture: bool = False
    bh_two_sided: bool = True
    null_table_draws: int = 100_000

    def truth(self, rng):
        return generate_truth(self.m, self.pi1, rng)

    def source(self, truth, rng, view="full"):
        """Infinite generator of stage payloads for a fixed truth vector.

        ``view="case"`` yields only the informative case arm of paired
        payloads, which is what likelihood-ratio pipelines consume.
        """
        theta = np.asarray(truth, dtype=bool)
        if theta.shape != (self.m,):
            raise ConfigError(f"truth must have shape ({self.m},)")
        components = None
        if self.stream_mixture:
            weights = self.model.alt.weights
            components = rng.choice(len(weights), size=self.m, p=weights)
        while True:
            payload = generate_stage(self, theta, rng, components=components)
            if view == "case" and self.paired:
                yield payload[0]
            else:
                yield payload


def generate_truth(m, pi1, rng):
    """Draw iid alternative indicators with success probability pi1."""
    if not 0.0 <= pi1 <= 1.0:
        raise ValueError(f"pi1 must lie in [0, 1], got {pi1}")
    rng = np.random.default_rng(rng)
    return (rng.random(int(m)) < pi1).astype(np.int8)


def generate_stage(spec, truth, rng, components=None):
    """Draw one stage of observations for every stream.

    Null streams draw from the model's null distribution and alternative
    streams from its alternative; paired specs return a (case, control)
    tuple, with the control arm always null.  For a stream-level mixture
    alternative, ``components`` fixes each stream's component index.
    """
    theta = np.asarray(truth, dtype=bool)
    m = theta.size
    model = spec.model
    if spec.paired:
        control = model.null.sample(rng, m)
        case = model.null.sample(rng, m)
        alt_idx = np.nonzero(theta)[0]
        if alt_idx.size:
            if spec.stream_mixture:
                if components is None:
                    weights = model.alt.weights
                    components = rng.choice(len(weights), size=m, p=weights)
                for j, comp in enumerate(model.alt.components):
                    idx = alt_idx[components[alt_idx] == j]
                    if idx.size:
                        case[idx] = comp.sample(rng, idx.size)
            else:
                case[alt_idx] = model.alt.sample(rng, alt_idx.size)
        return case, control
    x = model.null.sample(rng, m)
    alt_idx = np.nonzero(theta)[0]
    if alt_idx.size:
        x[alt_idx] = model.alt.sample(rng, alt_idx.size)
    return x


def make_example(example_id, m, pi1, null_table_draws=100_000):
    """Construct one of the stock benchmark problems at size (m, pi1).

    Truth vectors use ``pi1`` exactly; the model's prior is clamped into
    (0, 1) so the degenerate all-null / all-alternative settings still
    build a usable model.
    """
    example_id = example_id.upper()
    pi0_model = float(np.clip(1.0 - pi1, 1e-9, 1.0 - 1e-9))
    if example_id == "E1":
        model = TwoGroupModel(pi0_model, Gaussian(0.0, 1.0), Gaussian(0.25, 1.0))
        return ExampleSpec("E1", m, pi1, model, statistic="llr", bh_two_sided=False)
    if example_id == "E2":
        model = TwoGroupModel(pi0_model, Exponential(1.0), Exponential(1.2))
        return ExampleSpec("E2", m, pi1, model, statistic="llr", bh_two_sided=False)
    if example_id == "E3":
        model = TwoGroupModel(pi0_model, Gaussian(0.0, 1.0), Gaussian(0.0, 1.2))
        return ExampleSpec("E3", m, pi1, model, statistic="llr", bh_two_sided=False)
    if example_id == "E4":
        model = TwoGroupModel(pi0_model, Binomial(7, 0.1), Binomial(7, 0.3))
        return ExampleSpec("E4", m, pi1, model, statistic="llr", bh_two_sided=False)
    if example_id == "E5":
        alt = FiniteMixture([0.75, 0.25], [Gaussian(0.25, 1.0), Gaussian(-0.5, 1.0)])
        model = TwoGroupModel(pi0_model, Gaussian(0.0, 1.0), alt)
        return ExampleSpec(
            "E5", m, pi1, model, statistic="t_two_sample", paired=True, stream_mixture=True
        )
    if example_id == "E6":
        model = TwoGroupModel(pi0_model, Gaussian(0.0, 1.0), Gaussian(0.25, 1.0))
        return ExampleSpec("E6", m, pi1, model, statistic="t_one_sample")
    if example_id == "E7":
        model = TwoGroupModel(pi0_model, Cauchy(0.0, 1.0), Cauchy(0.25, 1.0))
        return ExampleSpec(
            "E7", m, pi1, model, statistic="llr", bh_two_sided=False,
            null_table_draws=null_table_draws,
        )
    raise ConfigError(f"unknown example id {example_id!r}; expected one of {EXAMPLE_IDS}")
