"""Warmup adaptation: dual-averaging step size and windowed diagonal mass.

The warmup stream is split into an initial step-size-only buffer, a block
of expanding memoryless windows (each estimates marginal variances from
its own draws only), and a terminal step-size-only buffer. The step size
targets a configured mean acceptance statistic and is frozen afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_WARMUP = 20


@dataclass
class DualAveraging:
    """Nesterov dual averaging on log step size."""

    target: float = 0.8
    gamma: float = 0.05
    t0: float = 10.0
    kappa: float = 0.75
    mu: float = field(default=0.0, init=False)
    _hbar: float = field(default=0.0, init=False)
    _log_eps: float = field(default=0.0, init=False)
    _log_eps_bar: float = field(default=0.0, init=False)
    _count: int = field(default=0, init=False)

    def restart(self, eps: float) -> None:
        self.mu = np.log(10.0 * eps)
        self._hbar = 0.0
        self._log_eps = np.log(eps)
        self._log_eps_bar = np.log(eps)
        self._count = 0

    def update(self, accept_stat: float) -> float:
        """Consume one acceptance statistic; returns the next step size."""
        self._count += 1
        m = self._count
        eta = 1.0 / (m + self.t0)
        self._hbar = (1.0 - eta) * self._hbar + eta * (self.target - accept_stat)
        self._log_eps = self.mu - np.sqrt(m) / self.gamma * self._hbar
        w = m ** (-self.kappa)
        self._log_eps_bar = w * self._log_eps + (1.0 - w) * self._log_eps_bar
        return float(np.exp(self._log_eps))

    @property
    def current(self) -> float:
        return float(np.exp(self._log_eps))

    @property
    def averaged(self) -> float:
        return float(np.exp(self._log_eps_bar))


def warmup_windows(warmup: int) -> list[tuple[int, int]]:
    """Half-open [start, end) variance-estimation windows.

    Defaults mirror the usual 75/25-doubling/50 layout, scaled down
    proportionally for short warmups.
    """
    if warmup < MIN_WARMUP:
        raise ValueError(f"warmup must be at least {MIN_WARMUP}, got {warmup}")
    init_buffer = min(75, max(1, int(0.15 * warmup)))
    term_buffer = min(50, max(1, int(0.10 * warmup)))
    base = 25
    last = warmup - term_buffer

    windows = []
    pos = init_buffer
    size = base
    while pos < last:
        end = min(pos + size, last)
        if last - end < 2 * size:
            end = last
        windows.append((pos, end))
        pos = end
        size *= 2
    return windows


def regularized_inv_mass(window_draws: np.ndarray) -> np.ndarray:
    """Shrunk marginal variances of the window draws (rows = iterations)."""
    n = window_draws.shape[0]
    if n < 2:
        return np.ones(window_draws.shape[1])
    var = np.var(window_draws, axis=0, ddof=1)
    shrunk = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
    return np.maximum(shrunk, 1e-12)
