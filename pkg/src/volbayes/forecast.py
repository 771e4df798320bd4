"""Predictive simulation: prior predictive draws, posterior predictive
forecast fans, and smoothed latent-state bands.

Forecasts reconstruct each draw's terminal model state deterministically
from the observed data, then simulate forward; nothing else about the
data enters the fan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models.base import SimulationResult, VolatilityModel

QUANTILE_LEVELS = (2.5, 25.0, 50.0, 75.0, 97.5)
MIN_FORECAST_DRAWS = 50


@dataclass
class ForecastFan:
    horizon: int
    levels: tuple[float, ...]
    returns: np.ndarray  # horizon x len(levels)
    prices: np.ndarray
    sigma: np.ndarray


@dataclass
class StateBands:
    """Per-time-step posterior mean and central 95% band per state."""

    bands: dict[str, dict[str, np.ndarray]]  # name -> {mean, lower, upper}

    def names(self) -> list[str]:
        return list(self.bands)


def gather_unconstrained_draws(chain_outputs) -> np.ndarray:
    ok = [c for c in chain_outputs if not c.failed]
    if not ok:
        raise ValueError("no successful chains")
    return np.vstack([c.unconstrained_draws for c in ok])


def posterior_predictive(
    model: VolatilityModel,
    chain_outputs,
    horizon: int,
    rng: np.random.Generator,
) -> ForecastFan:
    """Forecast fan over ``horizon`` future steps from posterior draws."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    draws = gather_unconstrained_draws(chain_outputs)
    if draws.shape[0] < MIN_FORECAST_DRAWS:
        raise ValueError(
            f"need at least {MIN_FORECAST_DRAWS} draws for a forecast, got {draws.shape[0]}"
        )
    n = draws.shape[0]
    rets = np.empty((n, horizon))
    sigs = np.empty((n, horizon))
    for i in range(n):
        paths = model.forecast_paths(draws[i], horizon, rng)
        rets[i] = paths["returns"]
        sigs[i] = paths["sigma"]
    log_prices = model.data.log_prices[-1] + np.cumsum(rets, axis=1)
    q = np.array(QUANTILE_LEVELS)
    return ForecastFan(
        horizon=horizon,
        levels=QUANTILE_LEVELS,
        returns=np.percentile(rets, q, axis=0).T,
        prices=np.exp(np.percentile(log_prices, q, axis=0).T),
        sigma=np.percentile(sigs, q, axis=0).T,
    )


def prior_predictive(
    model: VolatilityModel,
    n_series: int,
    T: int,
    rng: np.random.Generator,
    init_log_price: float = 0.0,
) -> list[SimulationResult]:
    """Simulate ``n_series`` series of length ``T`` at prior parameter
    draws; each result records the parameters that generated it."""
    results = []
    for _ in range(n_series):
        x = model.prior_draw(rng)
        params = {name: float(v) for name, v in zip(model.param_names, x)}
        results.append(model.simulate(params, T, rng, init_log_price))
    return results


def smoothed_states(model: VolatilityModel, chain_outputs) -> StateBands:
    """Posterior mean and 95% band of every latent state path, computed
    by rerunning the deterministic recursion for each retained draw."""
    draws = gather_unconstrained_draws(chain_outputs)
    stacks: dict[str, list[np.ndarray]] = {}
    for i in range(draws.shape[0]):
        for name, path in model.state_path(draws[i]).items():
            stacks.setdefault(name, []).append(path)
    bands = {}
    for name, paths in stacks.items():
        arr = np.vstack(paths)
        bands[name] = {
            "mean": arr.mean(axis=0),
            "lower": np.percentile(arr, 2.5, axis=0),
            "upper": np.percentile(arr, 97.5, axis=0),
        }
    return StateBands(bands)
