"""Mispricing-activation volatility model ("vs" family).

Trading activity decays exponentially with the gap between the current
price and its running average, which acts as a fundamental-price proxy.
The running average operates on price levels (exp of the stored log
prices); returns are conditionally Gaussian with variance
2 * sigma_max^2 * activity. Uses the linearized return approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

from ..distributions import Beta, Distribution, Gamma, HalfNormal
from ..paramspace import TransformSpec, interval, lower_bounded
from ..series import PriceSeries
from .base import SimulationResult, VolatilityModel, gaussian_loglik


@dataclass(frozen=True)
class VsParams:
    mu: float
    tau: float
    sigma_max: float

    def __post_init__(self):
        if self.mu <= 0 or self.sigma_max <= 0:
            raise ValueError("mu and sigma_max must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")

    @property
    def time_constant(self) -> float:
        """Effective averaging horizon -1/log(tau), in steps."""
        return -1.0 / np.log(self.tau)


def default_priors(data: PriceSeries) -> dict[str, Distribution]:
    return {
        "mu": Gamma(shape=3.0, rate=0.03),
        "tau": Beta(10.0, 0.5),
        "sigma_max": HalfNormal(scale=3.0 * data.return_sd),
    }


def simulate(
    params: Mapping[str, float],
    T: int,
    rng: np.random.Generator,
    init_log_price: float = 0.0,
) -> SimulationResult:
    """Generate T log prices; the running price average starts at the
    first price, matching the likelihood's convention."""
    if T < 3:
        raise ValueError("simulation needs T >= 3")
    p = VsParams(**{k: float(params[k]) for k in VsModel.param_names})
    log_p = np.empty(T)
    sigma = np.empty(T)
    log_p[0] = init_log_price
    m = np.exp(init_log_price)
    for t in range(T - 1):
        A = np.exp(-p.mu * abs(log_p[t] - np.log(m)))
        sigma[t] = p.sigma_max * np.sqrt(2.0 * A)
        log_p[t + 1] = log_p[t] + sigma[t] * rng.standard_normal()
        m = (1.0 - p.tau) * np.exp(log_p[t + 1]) + p.tau * m
    sigma[T - 1] = p.sigma_max * np.sqrt(2.0 * np.exp(-p.mu * abs(log_p[-1] - np.log(m))))
    return SimulationResult(PriceSeries(log_p), {"sigma": sigma}, dict(params))


class VsModel(VolatilityModel):
    name = "vs"
    param_names = ("mu", "tau", "sigma_max")

    def __init__(self, data: PriceSeries, priors: Mapping[str, Distribution] | None = None):
        super().__init__(data, priors or default_priors(data))
        with np.errstate(over="ignore"):
            self._levels = np.exp(data.log_prices)
        if not np.all(np.isfinite(self._levels)):
            raise ValueError("price levels overflow; log prices out of range")
        self._q = data.returns

    def _build_transform_spec(self) -> TransformSpec:
        return TransformSpec(
            constraints=(lower_bounded(0.0), interval(0.0, 1.0), lower_bounded(0.0)),
            names=self.param_names,
        )

    @property
    def obs_return_indices(self) -> np.ndarray:
        return np.arange(self._q.size)

    def _running_average(self, tau: float) -> np.ndarray:
        L = self._levels
        m = np.empty_like(L)
        m[0] = L[0]
        m[1:], _ = lfilter([1.0 - tau], [1.0, -tau], L[1:], zi=np.array([tau * m[0]]))
        return m

    def _activity(self, mu: float, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Trading probability per time step plus intermediates (m, gap)."""
        m = self._running_average(tau)
        gap = np.abs(self.data.log_prices - np.log(m))
        return np.exp(-mu * gap), m, gap

    def _loglik_grad(self, x: np.ndarray):
        mu, tau, sigma_max = x
        q = self._q
        A, m, gap = self._activity(mu, tau)
        var = 2.0 * sigma_max**2 * A[:-1]
        pointwise = gaussian_loglik(q, var)
        lik = float(np.sum(pointwise))

        ev = -0.5 / var + q * q / (2.0 * var * var)
        g_sigma_max = float(np.sum(ev * 4.0 * sigma_max * A[:-1]))
        Abar = np.zeros_like(A)
        Abar[:-1] = ev * 2.0 * sigma_max**2
        g_mu = float(np.sum(Abar * (-gap) * A))
        gapbar = Abar * (-mu) * A
        sign = np.sign(self.data.log_prices - np.log(m))
        mbar_direct = gapbar * (-sign) / m
        mbar = lfilter([1.0], [1.0, -tau], mbar_direct[::-1])[::-1]
        g_tau = float(np.sum(mbar[1:] * (m[:-1] - self._levels[1:])))
        return lik, np.array([g_mu, g_tau, g_sigma_max]), pointwise

    def state_path(self, u: np.ndarray) -> dict[str, np.ndarray]:
        mu, tau, sigma_max = self.constrained_values(u)
        A, _, _ = self._activity(mu, tau)
        return {"sigma": sigma_max * np.sqrt(2.0 * A)}

    def forecast_paths(self, u, horizon, rng):
        mu, tau, sigma_max = self.constrained_values(u)
        _, m, _ = self._activity(mu, tau)
        p = float(self.data.log_prices[-1])
        m_cur = float(m[-1])
        rets = np.empty(horizon)
        sig = np.empty(horizon)
        for h in range(horizon):
            A = np.exp(-mu * abs(p - np.log(m_cur)))
            sig[h] = sigma_max * np.sqrt(2.0 * A)
            rets[h] = sig[h] * rng.standard_normal()
            p += rets[h]
            m_cur = (1.0 - tau) * np.exp(p) + tau * m_cur
        return {"returns": rets, "sigma": sig}

    def simulate(self, params, T, rng, init_log_price=0.0):
        self._check_sim_args(params, self.param_names, T)
        return simulate(params, T, rng, init_log_price)
