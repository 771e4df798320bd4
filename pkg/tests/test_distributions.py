import numpy as np
import pytest
from scipy import stats

from volbayes import distributions as dist


CASES = [
    (dist.Normal(1.0, 2.0), lambda x: stats.norm.logpdf(x, 1.0, 2.0), (-5, 5)),
    (dist.HalfNormal(1.5), lambda x: stats.halfnorm.logpdf(x, scale=1.5), (0.01, 5)),
    (dist.StudentT(5.0, 0.5, 2.0), lambda x: stats.t.logpdf(x, 5.0, 0.5, 2.0), (-6, 6)),
    (
        dist.HalfStudentT(5.0, 2.0),
        lambda x: np.log(2) + stats.t.logpdf(x, 5.0, 0.0, 2.0),
        (0.01, 8),
    ),
    (dist.Gamma(3.0, 0.03), lambda x: stats.gamma.logpdf(x, 3.0, scale=1 / 0.03), (1, 400)),
    (dist.Beta(10.0, 0.5), lambda x: stats.beta.logpdf(x, 10.0, 0.5), (0.05, 0.99)),
    (dist.Uniform(-1.0, 3.0), lambda x: stats.uniform.logpdf(x, -1.0, 4.0), (-0.9, 2.9)),
]


@pytest.mark.parametrize("d,ref,rng", CASES, ids=lambda c: type(c).__name__ if isinstance(c, dist.Distribution) else None)
def test_logpdf_matches_reference(d, ref, rng):
    for x in np.linspace(*rng, 25):
        assert d.logpdf(x) == pytest.approx(ref(x), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("d,ref,rng", CASES, ids=lambda c: type(c).__name__ if isinstance(c, dist.Distribution) else None)
def test_dlogpdf_matches_finite_differences(d, ref, rng):
    h = 1e-6
    for x in np.linspace(*rng, 25):
        fd = (d.logpdf(x + h) - d.logpdf(x - h)) / (2 * h)
        assert d.dlogpdf(x) == pytest.approx(fd, rel=1e-4, abs=1e-5)


def test_support_boundaries():
    assert dist.HalfNormal(1.0).logpdf(-0.1) == -np.inf
    assert dist.Gamma(3.0, 1.0).logpdf(0.0) == -np.inf
    assert dist.Beta(2.0, 2.0).logpdf(1.0) == -np.inf
    assert dist.Uniform(0.0, 1.0).logpdf(1.5) == -np.inf


def test_sampling_moments():
    rng = np.random.default_rng(1234)
    g = dist.Gamma(3.0, 0.03)
    draws = np.array([g.sample(rng) for _ in range(20000)])
    assert draws.mean() == pytest.approx(100.0, rel=0.05)
    b = dist.Beta(10.0, 0.5)
    draws = np.array([b.sample(rng) for _ in range(20000)])
    assert draws.mean() == pytest.approx(10 / 10.5, rel=0.02)
    hn = dist.HalfNormal(2.0)
    draws = np.array([hn.sample(rng) for _ in range(20000)])
    assert np.all(draws >= 0)
    assert draws.mean() == pytest.approx(2.0 * np.sqrt(2 / np.pi), rel=0.05)


def test_from_config_round_trip():
    for d, _, _ in CASES:
        rebuilt = dist.from_config(d.to_config())
        assert rebuilt == d


def test_from_config_rejects_bad_specs():
    with pytest.raises(ValueError):
        dist.from_config({"dist": "nope"})
    with pytest.raises(ValueError):
        dist.from_config({"scale": 1.0})
    with pytest.raises(ValueError):
        dist.from_config({"dist": "normal", "bogus": 1.0})
