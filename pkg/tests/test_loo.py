import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import genpareto, norm

from volbayes.loo import (
    LooResult,
    fit_generalized_pareto,
    pairwise_difference,
    psis_loo,
    restrict_to,
    smooth_log_weights,
    tail_length,
)


def test_tail_length_rule():
    assert tail_length(100) == 20  # 0.2 * 100 beats 3 sqrt(100)
    assert tail_length(4000) == int(np.ceil(3 * np.sqrt(4000)))


def test_identical_draws_reduce_to_pointwise_loglik():
    # constant ratios = all-equal weights: elpd_i is exactly the column
    # log-mean-exp, which here equals the common log-likelihood value
    ll = np.tile(np.array([-1.3, -0.4, -2.2]), (200, 1))
    res = psis_loo(ll)
    expected = logsumexp(ll, axis=0) - np.log(ll.shape[0])
    assert np.allclose(res.elpd_i, expected, atol=1e-12)
    assert np.allclose(res.elpd_i, ll[0], atol=1e-12)
    assert res.elpd == pytest.approx(ll[0].sum(), abs=1e-10)


def test_light_tailed_ratios_stay_close_to_plain_importance_sampling():
    rng = np.random.default_rng(0)
    ll = rng.normal(-1.0, 0.2, size=(2000, 6))
    res = psis_loo(ll)
    # plain self-normalized IS estimate per column
    for j in range(ll.shape[1]):
        lw = -ll[:, j] - logsumexp(-ll[:, j])
        plain_j = logsumexp(lw + ll[:, j])
        assert res.elpd_i[j] == pytest.approx(plain_j, abs=0.05)
    assert np.all(res.pareto_k < 0.5)


def test_conjugate_normal_mean_oracle():
    """PSIS-LOO vs the closed-form leave-one-out predictive density for a
    Gaussian mean with known unit observation noise."""
    rng = np.random.default_rng(42)
    N, S = 50, 4000
    prior_var = 100.0
    y = rng.normal(1.2, 1.0, N)

    # exact LOO: theta | y_{-i} ~ N(m_i, v_i); y_i | y_{-i} ~ N(m_i, 1 + v_i)
    exact = 0.0
    for i in range(N):
        rest = np.delete(y, i)
        v_i = 1.0 / (1.0 / prior_var + rest.size)
        m_i = v_i * rest.sum()
        exact += norm.logpdf(y[i], m_i, np.sqrt(1.0 + v_i))

    # posterior draws given all data
    v_post = 1.0 / (1.0 / prior_var + N)
    m_post = v_post * y.sum()
    theta = rng.normal(m_post, np.sqrt(v_post), S)
    loglik = norm.logpdf(y[None, :], theta[:, None], 1.0)

    res = psis_loo(loglik)
    assert abs(res.elpd - exact) < 0.5
    assert np.all(res.pareto_k < 0.7)


def test_neg_inf_column_errors_with_observation():
    ll = np.full((200, 3), -1.0)
    ll[0, 1] = -np.inf
    with pytest.raises(ValueError, match="observation 1"):
        psis_loo(ll)


def test_too_few_draws_rejected():
    with pytest.raises(ValueError, match="at least 100"):
        psis_loo(np.zeros((50, 3)))


def test_se_scales_with_sqrt_n():
    rng = np.random.default_rng(1)
    small = rng.normal(-1, 0.5, size=(300, 100))
    large = np.hstack([small, rng.normal(-1, 0.5, size=(300, 300))])
    r_small = psis_loo(small)
    r_large = psis_loo(large)
    assert r_small.se > 0
    assert r_large.se == pytest.approx(2.0 * r_small.se, rel=0.35)


def test_gpd_fit_recovers_shape():
    rng = np.random.default_rng(7)
    x = np.sort(genpareto.rvs(0.3, scale=1.0, size=10_000, random_state=rng))
    k, sigma = fit_generalized_pareto(x)
    assert abs(k - 0.3) < 0.1
    assert sigma == pytest.approx(1.0, abs=0.15)


def test_smoothing_truncates_at_raw_maximum():
    rng = np.random.default_rng(3)
    lr = rng.normal(0, 2.0, 800)
    logw, k = smooth_log_weights(lr)
    # normalized, and no smoothed weight exceeds the raw maximum weight
    assert logsumexp(logw) == pytest.approx(0.0, abs=1e-10)
    raw = lr - np.max(lr)
    assert np.max(logw - (raw - logsumexp(raw))) < 20  # sane scale
    assert np.all(logw <= 0.0 + 1e-12 - logsumexp(np.zeros(1)))


def test_short_tail_falls_back_unsmoothed():
    # nearly constant ratios -> tail has < MIN_TAIL distinct exceedances
    lr = np.zeros(400)
    lr[:3] = [0.1, 0.2, 0.3]
    logw, k = smooth_log_weights(lr)
    assert k == np.inf
    assert logsumexp(logw) == pytest.approx(0.0, abs=1e-10)


def test_restrict_and_pairwise_difference():
    rng = np.random.default_rng(5)
    a = LooResult(0.0, 0.0, rng.normal(-1, 0.1, 50), np.zeros(50), 0, 500, np.arange(50))
    b = LooResult(0.0, 0.0, rng.normal(-1.2, 0.1, 49), np.zeros(49), 0, 500, np.arange(1, 50))
    diff, se = pairwise_difference(a, b)
    assert diff > 0  # a has higher pointwise elpd
    assert se > 0
    ra = restrict_to(a, np.arange(1, 50))
    assert ra.elpd_i.size == 49
    assert ra.elpd == pytest.approx(a.elpd_i[1:].sum())
