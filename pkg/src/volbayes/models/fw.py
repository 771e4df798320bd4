"""Chartist-fundamentalist switching model ("fw" family).

Two trader groups supply demand: fundamentalists react to the gap between
a fundamental log price and the current log price, chartists to the last
price move. The fundamentalist fraction follows a discrete-choice rule
driven by an attractiveness index with predisposition, herding and
mispricing terms. Group demands are marginalized, leaving a Gaussian
return likelihood whose mean and variance depend on the fraction path.

Modes:
  fixed  - fundamental log price is a known constant (7 parameters)
  rw     - fundamental log price follows a random walk, expressed through
           standardized innovations (non-centered), adding 1 + N coordinates
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..distributions import Distribution, HalfNormal, HalfStudentT, StudentT
from ..paramspace import TransformSpec, lower_bounded, unbounded
from ..series import PriceSeries
from .base import SimulationResult, VolatilityModel, gaussian_loglik

#: Scale constants absorbed into the remaining parameters; never sampled.
BETA_FIXED = 1.0
MU_FIXED = 0.01

STRUCTURAL = ("phi", "xi", "sigma_f", "sigma_c", "alpha_0", "alpha_n", "alpha_p")


@dataclass(frozen=True)
class FwParams:
    phi: float
    xi: float
    sigma_f: float
    sigma_c: float
    alpha_0: float
    alpha_n: float
    alpha_p: float
    sigma_star: float | None = None

    def __post_init__(self):
        if self.phi < 0 or self.xi < 0:
            raise ValueError("phi and xi must be nonnegative")
        if self.sigma_f <= 0 or self.sigma_c <= 0:
            raise ValueError("sigma_f and sigma_c must be positive")
        if self.alpha_n < 0 or self.alpha_p < 0:
            raise ValueError("alpha_n and alpha_p must be nonnegative")
        if self.sigma_star is not None and self.sigma_star <= 0:
            raise ValueError("sigma_star must be positive")


def _expit(w: float) -> float:
    # scalar logistic, safe for any finite w
    if w >= 0.0:
        z = math.exp(-w)
        return 1.0 / (1.0 + z)
    z = math.exp(w)
    return z / (1.0 + z)


def conditional_moments(n_f, gap, last_move, phi, xi, sigma_f, sigma_c):
    """Return mean and variance of the next log return given the state.

    ``n_f`` is the fundamentalist fraction, ``gap`` the fundamental minus
    current log price, ``last_move`` the previous log return. Shared by
    the likelihood, the simulator and forecasting.
    """
    n_c = 1.0 - n_f
    mean = MU_FIXED * (n_f * phi * gap + n_c * xi * last_move)
    var = MU_FIXED**2 * (n_f**2 * sigma_f**2 + n_c**2 * sigma_c**2)
    return mean, var


def attractiveness(n_f, gap, alpha_0, alpha_n, alpha_p):
    """Discrete-choice attractiveness of the fundamentalist strategy."""
    return alpha_0 + alpha_n * (2.0 * n_f - 1.0) + alpha_p * gap * gap


def default_priors(data: PriceSeries, mode: str) -> dict[str, Distribution]:
    """Weakly informative defaults: heavy-tailed unit-scale priors on the
    reaction and attractiveness parameters (the t5 tail accommodates the
    large mispricing coefficient without unmooring it), demand scales
    tied to the observed return scale."""
    sd = data.return_sd
    priors: dict[str, Distribution] = {
        "phi": HalfStudentT(5.0, 1.0),
        "xi": HalfStudentT(5.0, 1.0),
        "sigma_f": HalfNormal(scale=3.0 * sd / MU_FIXED),
        "sigma_c": HalfNormal(scale=3.0 * sd / MU_FIXED),
        "alpha_0": StudentT(5.0, 0.0, 1.0),
        "alpha_n": HalfStudentT(5.0, 1.0),
        "alpha_p": HalfStudentT(5.0, 1.0),
    }
    if mode == "rw":
        priors["sigma_star"] = HalfNormal(scale=sd)
    return priors


def simulate(
    params: Mapping[str, float],
    T: int,
    rng: np.random.Generator,
    init_log_price: float = 0.0,
    mode: str = "fixed",
    p_star: float = 0.0,
) -> SimulationResult:
    """Generate T log prices; the first two equal ``init_log_price``.

    In rw mode the fundamental path starts at the initial price and the
    draw of its innovations is part of the result's states.
    """
    if mode not in ("fixed", "rw"):
        raise ValueError(f"unknown mode {mode!r}")
    if T < 3:
        raise ValueError("simulation needs T >= 3")
    names = STRUCTURAL + (("sigma_star",) if mode == "rw" else ())
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"missing simulation parameters: {missing}")
    p = FwParams(**{k: float(params[k]) for k in names})

    if mode == "rw":
        eps = rng.standard_normal(T)
        pstar = init_log_price + p.sigma_star * np.cumsum(eps)
    else:
        pstar = np.full(T, float(p_star))

    log_p = np.empty(T)
    n_f = np.empty(T)
    sigma = np.empty(T)
    log_p[0] = log_p[1] = init_log_price
    a_prev = 0.0
    for t in range(1, T - 1):
        n = _expit(BETA_FIXED * a_prev)
        gap = pstar[t] - log_p[t]
        mean, var = conditional_moments(
            n, gap, log_p[t] - log_p[t - 1], p.phi, p.xi, p.sigma_f, p.sigma_c
        )
        n_f[t] = n
        sigma[t] = math.sqrt(var)
        log_p[t + 1] = log_p[t] + mean + sigma[t] * rng.standard_normal()
        a_prev = attractiveness(n, gap, p.alpha_0, p.alpha_n, p.alpha_p)
    n_f[T - 1] = _expit(BETA_FIXED * a_prev)
    _, var_last = conditional_moments(
        n_f[T - 1], pstar[T - 1] - log_p[T - 1], log_p[T - 1] - log_p[T - 2],
        p.phi, p.xi, p.sigma_f, p.sigma_c,
    )
    sigma[T - 1] = math.sqrt(var_last)
    n_f[0] = n_f[1]
    sigma[0] = sigma[1]
    states = {"sigma": sigma, "n_f": n_f, "p_star": pstar}
    return SimulationResult(PriceSeries(log_p), states, dict(params))


class FwModel(VolatilityModel):
    param_names: tuple[str, ...]

    def __init__(
        self,
        data: PriceSeries,
        mode: str = "fixed",
        p_star: float = 0.0,
        priors: Mapping[str, Distribution] | None = None,
    ):
        if mode not in ("fixed", "rw"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.p_star = float(p_star)
        self.name = f"fw-{mode}"
        self.param_names = STRUCTURAL + (("sigma_star",) if mode == "rw" else ())
        self._n_obs_prices = len(data)
        super().__init__(data, priors or default_priors(data, mode))
        self._q = data.returns

    def _build_transform_spec(self) -> TransformSpec:
        constraints = [
            lower_bounded(0.0),  # phi
            lower_bounded(0.0),  # xi
            lower_bounded(0.0),  # sigma_f
            lower_bounded(0.0),  # sigma_c
            unbounded(),         # alpha_0
            lower_bounded(0.0),  # alpha_n
            lower_bounded(0.0),  # alpha_p
        ]
        names = list(STRUCTURAL)
        if self.mode == "rw":
            constraints.append(lower_bounded(0.0))
            names.append("sigma_star")
            N = self._n_obs_prices
            constraints.extend(unbounded() for _ in range(N))
            names.extend(f"eps_star[{t}]" for t in range(1, N + 1))
        return TransformSpec(tuple(constraints), tuple(names))

    @property
    def n_structural(self) -> int:
        return len(self.param_names)

    @property
    def obs_return_indices(self) -> np.ndarray:
        return np.arange(1, self._q.size)

    def _fundamental_path(self, x: np.ndarray) -> np.ndarray:
        if self.mode == "fixed":
            return np.full(len(self.data), self.p_star)
        sigma_star = x[7]
        eps = x[8:]
        return self.data.log_prices[0] + sigma_star * np.cumsum(eps)

    def _latent_log_prior(self, x: np.ndarray) -> float:
        if self.mode == "fixed":
            return 0.0
        eps = x[8:]
        return float(-0.5 * np.sum(eps * eps) - 0.5 * eps.size * np.log(2.0 * np.pi))

    def _latent_prior_grad(self, x: np.ndarray, grad: np.ndarray) -> None:
        if self.mode == "rw":
            grad[8:] -= x[8:]

    def _fraction_path(self, x: np.ndarray, pstar: np.ndarray) -> np.ndarray:
        """Fundamentalist fraction per time step (entry 0 backfilled)."""
        alpha_0, alpha_n, alpha_p = x[4], x[5], x[6]
        gap_sq = ((pstar - self.data.log_prices) ** 2).tolist()
        N = len(gap_sq)
        n = np.empty(N)
        a_prev = 0.0
        beta = BETA_FIXED
        two_an = 2.0 * alpha_n
        off = alpha_0 - alpha_n
        for t in range(1, N):
            nt = _expit(beta * a_prev)
            n[t] = nt
            a_prev = off + two_an * nt + alpha_p * gap_sq[t]
        n[0] = n[1]
        return n

    def _loglik_grad(self, x: np.ndarray):
        phi, xi, sigma_f, sigma_c, alpha_0, alpha_n, alpha_p = x[:7]
        p = self.data.log_prices
        N = p.size
        q = self._q
        pstar = self._fundamental_path(x)
        D = pstar - p
        n = self._fraction_path(x, pstar)

        sl = slice(1, N - 1)
        n_s = n[sl]
        nc_s = 1.0 - n_s
        D_s = D[sl]
        C_s = p[1:-1] - p[:-2]
        mean = MU_FIXED * (n_s * phi * D_s + nc_s * xi * C_s)
        var = MU_FIXED**2 * (n_s**2 * sigma_f**2 + nc_s**2 * sigma_c**2)
        resid = q[1:] - mean
        pointwise = gaussian_loglik(resid, var)
        lik = float(np.sum(pointwise))

        em = resid / var
        ev = -0.5 / var + resid * resid / (2.0 * var * var)
        g_phi = float(np.sum(em * MU_FIXED * n_s * D_s))
        g_xi = float(np.sum(em * MU_FIXED * nc_s * C_s))
        g_sf = float(np.sum(ev * MU_FIXED**2 * 2.0 * n_s**2 * sigma_f))
        g_sc = float(np.sum(ev * MU_FIXED**2 * 2.0 * nc_s**2 * sigma_c))

        dn = np.zeros(N)
        dn[sl] = em * MU_FIXED * (phi * D_s - xi * C_s) + ev * MU_FIXED**2 * 2.0 * (
            n_s * sigma_f**2 - nc_s * sigma_c**2
        )

        # reverse sweep through the fraction recursion
        n_l = n.tolist()
        dn_l = dn.tolist()
        D_l = D.tolist()
        Dbar = [0.0] * N
        g_a0 = g_an = g_ap = 0.0
        two_an = 2.0 * alpha_n
        two_ap = 2.0 * alpha_p
        abar = 0.0
        for t in range(N - 2, 0, -1):
            nt = n_l[t]
            nbar = dn_l[t] + two_an * abar
            g_a0 += abar
            g_an += abar * (2.0 * nt - 1.0)
            g_ap += abar * D_l[t] * D_l[t]
            Dbar[t] = abar * two_ap * D_l[t]
            abar = nbar * BETA_FIXED * nt * (1.0 - nt)

        grad = np.zeros(self.dimension)
        grad[:7] = (g_phi, g_xi, g_sf, g_sc, g_a0, g_an, g_ap)
        if self.mode == "rw":
            Dbar_v = np.asarray(Dbar)
            Dbar_v[sl] += em * MU_FIXED * n_s * phi
            pbar = np.cumsum(Dbar_v[::-1])[::-1]
            cum_eps = np.cumsum(x[8:])
            grad[7] = float(np.sum(Dbar_v * cum_eps))
            grad[8:] = x[7] * pbar
        return lik, grad, pointwise

    def state_path(self, u: np.ndarray) -> dict[str, np.ndarray]:
        x = self.constrained_values(u)
        phi, xi, sigma_f, sigma_c = x[:4]
        pstar = self._fundamental_path(x)
        n = self._fraction_path(x, pstar)
        nc = 1.0 - n
        var = MU_FIXED**2 * (n**2 * sigma_f**2 + nc**2 * sigma_c**2)
        return {"sigma": np.sqrt(var), "n_f": n, "p_star": pstar}

    def forecast_paths(self, u, horizon, rng):
        x = self.constrained_values(u)
        phi, xi, sigma_f, sigma_c, alpha_0, alpha_n, alpha_p = x[:7]
        p = self.data.log_prices
        pstar = self._fundamental_path(x)
        n = self._fraction_path(x, pstar)
        sigma_star = x[7] if self.mode == "rw" else 0.0

        n_cur = float(n[-1])
        p_cur, p_prev = float(p[-1]), float(p[-2])
        pstar_cur = float(pstar[-1])
        rets = np.empty(horizon)
        sig = np.empty(horizon)
        for h in range(horizon):
            gap = pstar_cur - p_cur
            mean, var = conditional_moments(n_cur, gap, p_cur - p_prev, phi, xi, sigma_f, sigma_c)
            sig[h] = math.sqrt(var)
            rets[h] = mean + sig[h] * rng.standard_normal()
            a = attractiveness(n_cur, gap, alpha_0, alpha_n, alpha_p)
            p_prev, p_cur = p_cur, p_cur + rets[h]
            n_cur = _expit(BETA_FIXED * a)
            if self.mode == "rw":
                pstar_cur += sigma_star * rng.standard_normal()
        return {"returns": rets, "sigma": sig}

    def simulate(self, params, T, rng, init_log_price=0.0):
        return simulate(params, T, rng, init_log_price, mode=self.mode, p_star=self.p_star)
