"""GARCH(1,1) with Gaussian innovations, conditioned on log prices.

Returns are first differences of log prices. The variance recursion is
seeded with a sampled initial volatility; the first return is conditioned
on, so likelihood terms start at the second return.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

from ..distributions import Distribution, HalfNormal, Uniform
from ..paramspace import TransformSpec, interval, lower_bounded
from ..series import PriceSeries
from .base import SimulationResult, VolatilityModel, gaussian_loglik


@dataclass(frozen=True)
class GarchParams:
    mu: float
    alpha: float
    beta: float
    sigma1: float

    def __post_init__(self):
        if self.mu <= 0 or self.sigma1 <= 0:
            raise ValueError("mu and sigma1 must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        # alpha + beta < 1 (stationarity) is deliberately not enforced


def default_priors(data: PriceSeries) -> dict[str, Distribution]:
    sd = data.return_sd
    return {
        "mu": HalfNormal(scale=10.0 * sd * sd),
        "alpha": Uniform(0.0, 1.0),
        "beta": Uniform(0.0, 1.0),
        "sigma1": HalfNormal(scale=2.0 * sd),
    }


def simulate(
    params: Mapping[str, float],
    T: int,
    rng: np.random.Generator,
    init_log_price: float = 0.0,
) -> SimulationResult:
    """Generate T log prices; the first return is drawn at the initial
    volatility, which the likelihood conditions on."""
    if T < 3:
        raise ValueError("simulation needs T >= 3")
    p = GarchParams(**{k: float(params[k]) for k in GarchModel.param_names})
    log_p = np.empty(T)
    sigma = np.empty(T)
    log_p[0] = init_log_price
    v = p.sigma1 * p.sigma1
    for t in range(T - 1):
        sigma[t] = np.sqrt(v)
        r = sigma[t] * rng.standard_normal()
        log_p[t + 1] = log_p[t] + r
        v = p.mu + p.alpha * r * r + p.beta * v
    sigma[T - 1] = np.sqrt(v)
    return SimulationResult(PriceSeries(log_p), {"sigma": sigma}, dict(params))


class GarchModel(VolatilityModel):
    name = "garch"
    param_names = ("mu", "alpha", "beta", "sigma1")

    def __init__(self, data: PriceSeries, priors: Mapping[str, Distribution] | None = None):
        super().__init__(data, priors or default_priors(data))
        self._q = data.returns  # length M = N - 1

    def _build_transform_spec(self) -> TransformSpec:
        return TransformSpec(
            constraints=(lower_bounded(0.0), interval(0.0, 1.0), interval(0.0, 1.0), lower_bounded(0.0)),
            names=self.param_names,
        )

    @property
    def obs_return_indices(self) -> np.ndarray:
        return np.arange(1, self._q.size)

    def _variance_path(self, x: np.ndarray, extended: bool = False) -> np.ndarray:
        """Conditional variance per return; one extra step when extended."""
        mu, alpha, beta, sigma1 = x[:4]
        q = self._q
        M = q.size
        v = np.empty(M + 1 if extended else M)
        v[0] = sigma1 * sigma1
        drive = mu + alpha * q[: v.size - 1] ** 2
        v[1:], _ = lfilter([1.0], [1.0, -beta], drive, zi=np.array([beta * v[0]]))
        return v

    def _loglik_grad(self, x: np.ndarray):
        mu, alpha, beta, sigma1 = x
        q = self._q
        M = q.size
        v = self._variance_path(x)
        pointwise = gaussian_loglik(q[1:], v[1:])
        lik = float(np.sum(pointwise))

        # adjoint of v via the reversed linear recursion vbar_t = c_t + beta vbar_{t+1}
        c = -0.5 / v[1:] + q[1:] ** 2 / (2.0 * v[1:] ** 2)
        vbar_rest = lfilter([1.0], [1.0, -beta], c[::-1])[::-1]
        g_mu = float(np.sum(vbar_rest))
        g_alpha = float(np.sum(vbar_rest * q[: M - 1] ** 2))
        g_beta = float(np.sum(vbar_rest * v[: M - 1]))
        g_sigma1 = float(beta * vbar_rest[0] * 2.0 * sigma1)
        return lik, np.array([g_mu, g_alpha, g_beta, g_sigma1]), pointwise

    def state_path(self, u: np.ndarray) -> dict[str, np.ndarray]:
        v = self._variance_path(self.constrained_values(u), extended=True)
        return {"sigma": np.sqrt(v)}

    def forecast_paths(self, u, horizon, rng):
        x = self.constrained_values(u)
        mu, alpha, beta, _ = x
        v = float(self._variance_path(x, extended=True)[-1])
        rets = np.empty(horizon)
        sig = np.empty(horizon)
        for h in range(horizon):
            sig[h] = np.sqrt(v)
            rets[h] = sig[h] * rng.standard_normal()
            v = mu + alpha * rets[h] ** 2 + beta * v
        return {"returns": rets, "sigma": sig}

    def simulate(self, params, T, rng, init_log_price=0.0):
        self._check_sim_args(params, self.param_names, T)
        return simulate(params, T, rng, init_log_price)
