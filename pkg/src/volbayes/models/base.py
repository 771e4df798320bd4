"""Shared model interface.

A model binds a price series, a prior set and a coordinate transform. It
exposes the log posterior (with gradient) on the unconstrained sampling
space, per-observation log likelihoods, latent state paths and forward
simulation. Every likelihood is written twice in spirit: once inside the
evaluator and once inside the simulator; tests cross-check the two paths.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..distributions import Distribution
from ..paramspace import (
    RejectionError,
    TransformSpec,
    constrain_matrix,
    constrain_with_derivs,
    unconstrain,
)
from ..series import PriceSeries

LOG_2PI = np.log(2.0 * np.pi)


def gaussian_loglik(resid: np.ndarray, var: np.ndarray) -> np.ndarray:
    """Elementwise log N(resid | 0, var)."""
    return -0.5 * (LOG_2PI + np.log(var) + resid * resid / var)


@dataclass
class SimulationResult:
    """Output of a forward model run."""

    series: PriceSeries
    #: Latent paths aligned with the price grid (length = len(series)).
    #: "sigma" is the conditional sd of the return leaving each time step.
    states: dict[str, np.ndarray]
    params: dict[str, float] = field(default_factory=dict)


class VolatilityModel(ABC):
    """Log-density evaluator + simulator for one model family.

    Subclasses set ``name``, ``param_names`` (structural parameters, in
    transform order) and implement the likelihood internals. ``dimension``
    includes latent coordinates where the family has them.
    """

    name: str
    param_names: tuple[str, ...]

    def __init__(self, data: PriceSeries, priors: Mapping[str, Distribution]):
        data.require_fit_length()
        self.data = data
        self.priors = dict(priors)
        missing = [p for p in self.param_names if p not in self.priors]
        if missing:
            raise ValueError(f"{self.name}: missing priors for {missing}")
        self.transform_spec = self._build_transform_spec()
        self.dimension = len(self.transform_spec)

    @abstractmethod
    def _build_transform_spec(self) -> TransformSpec: ...

    @abstractmethod
    def _loglik_grad(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Return (loglik, dloglik/dx, pointwise contributions).

        ``x`` is the full constrained vector (structural + latent). The
        pointwise vector holds one entry per likelihood observation, and
        its sum equals ``loglik``.
        """

    # ---- posterior assembly ------------------------------------------------

    def log_prior(self, x: np.ndarray) -> float:
        """Log prior of the structural coordinates plus any latent prior."""
        lp = 0.0
        for i, name in enumerate(self.param_names):
            lp += self.priors[name].logpdf(x[i])
        lp += self._latent_log_prior(x)
        return lp

    def _latent_log_prior(self, x: np.ndarray) -> float:
        return 0.0

    def _latent_prior_grad(self, x: np.ndarray, grad: np.ndarray) -> None:
        """Add latent prior gradient contributions to ``grad`` in place."""

    def log_prior_and_jacobian(self, u: np.ndarray) -> float:
        """log prior + log Jacobian at unconstrained ``u`` (test hook)."""
        x, log_jac, _, _ = constrain_with_derivs(u, self.transform_spec)
        return self.log_prior(x) + log_jac

    def log_posterior(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Log p(data, params) on the unconstrained space, with gradient."""
        x, log_jac, dx_du, dlj_du = constrain_with_derivs(u, self.transform_spec)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            lik, grad_x, _ = self._loglik_grad(x)
            lp = lik + log_jac
            for i, name in enumerate(self.param_names):
                prior = self.priors[name]
                lp += prior.logpdf(x[i])
                grad_x[i] += prior.dlogpdf(x[i])
            lp += self._latent_log_prior(x)
            self._latent_prior_grad(x, grad_x)
            grad_u = grad_x * dx_du + dlj_du
        if not (np.isfinite(lp) and np.all(np.isfinite(grad_u))):
            raise RejectionError(f"{self.name}: non-finite log density")
        return float(lp), grad_u

    def pointwise_loglik(self, u: np.ndarray) -> np.ndarray:
        """Per-observation log likelihoods; sum + prior + Jacobian = lp."""
        x, _, _, _ = constrain_with_derivs(u, self.transform_spec)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            _, _, pointwise = self._loglik_grad(x)
        return pointwise

    # ---- conveniences used by the sampler and CLI --------------------------

    @property
    def coordinate_names(self) -> tuple[str, ...]:
        return self.transform_spec.names

    @property
    @abstractmethod
    def obs_return_indices(self) -> np.ndarray:
        """0-based indices into ``data.returns`` carrying likelihood terms."""

    def constrain_draws(self, U: np.ndarray) -> np.ndarray:
        return constrain_matrix(U, self.transform_spec)

    def constrained_values(self, u: np.ndarray) -> np.ndarray:
        x, _, _, _ = constrain_with_derivs(u, self.transform_spec)
        return x

    def unconstrain_params(self, x: np.ndarray) -> np.ndarray:
        return unconstrain(np.asarray(x, dtype=float), self.transform_spec)

    def initial_params(self, x: np.ndarray) -> dict[str, float]:
        return {n: float(x[i]) for i, n in enumerate(self.param_names)}

    def prior_draw(self, rng: np.random.Generator) -> np.ndarray:
        """Draw structural parameters from the prior (latents excluded)."""
        return np.array([self.priors[n].sample(rng) for n in self.param_names])

    # ---- states, forecasting, simulation -----------------------------------

    @abstractmethod
    def state_path(self, u: np.ndarray) -> dict[str, np.ndarray]:
        """Deterministic latent paths over the observed grid (length N).

        Entry t of "sigma" is the conditional sd of the return leaving
        time t; leading entries without enough lags repeat the first
        defined value.
        """

    @abstractmethod
    def forecast_paths(
        self, u: np.ndarray, horizon: int, rng: np.random.Generator
    ) -> dict[str, np.ndarray]:
        """Simulate ``horizon`` future returns from the terminal state.

        Returns arrays "returns" and "sigma" of length ``horizon``.
        """

    @abstractmethod
    def simulate(
        self,
        params: Mapping[str, float],
        T: int,
        rng: np.random.Generator,
        init_log_price: float = 0.0,
    ) -> SimulationResult:
        """Generate a fresh series of ``T`` prices at fixed parameters."""

    @staticmethod
    def _check_sim_args(params: Mapping[str, float], names: tuple[str, ...], T: int):
        if T < 3:
            raise ValueError("simulation needs T >= 3")
        missing = [n for n in names if n not in params]
        if missing:
            raise ValueError(f"missing simulation parameters: {missing}")
