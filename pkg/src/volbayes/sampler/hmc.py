"""Phase-space primitives: leapfrog steps, energy accounting, initial
step-size search.

The target exposes ``log_posterior(theta) -> (lp, grad)`` and may raise
``RejectionError``; both cases collapse to lp = -inf here, which callers
treat as a divergence signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..paramspace import RejectionError


@dataclass
class PhasePoint:
    theta: np.ndarray
    momentum: np.ndarray
    lp: float
    grad: np.ndarray

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.lp))


def evaluate(grad_fn, theta: np.ndarray) -> tuple[float, np.ndarray]:
    """Evaluate the target, mapping rejections and non-finite output to
    lp = -inf so trajectories can be truncated instead of crashing."""
    try:
        lp, grad = grad_fn(theta)
    except RejectionError:
        return -np.inf, np.zeros_like(theta)
    if not (np.isfinite(lp) and np.all(np.isfinite(grad))):
        return -np.inf, np.zeros_like(theta)
    return float(lp), np.asarray(grad, dtype=float)


def kinetic_energy(momentum: np.ndarray, inv_mass: np.ndarray) -> float:
    return 0.5 * float(np.dot(momentum, inv_mass * momentum))


def energy(z: PhasePoint, inv_mass: np.ndarray) -> float:
    """Hamiltonian: potential (-lp) plus Gaussian kinetic energy."""
    if not z.finite:
        return np.inf
    return -z.lp + kinetic_energy(z.momentum, inv_mass)


def draw_momentum(rng: np.random.Generator, inv_mass: np.ndarray) -> np.ndarray:
    """Fresh Gaussian momentum with covariance equal to the mass matrix."""
    return rng.standard_normal(inv_mass.size) / np.sqrt(inv_mass)


def leapfrog(z: PhasePoint, eps: float, inv_mass: np.ndarray, grad_fn) -> PhasePoint:
    """One symplectic step: half momentum, full position, half momentum.

    A non-finite density or gradient at the new position yields a phase
    point with lp = -inf; the caller truncates the trajectory there.
    """
    m_half = z.momentum + 0.5 * eps * z.grad
    theta_new = z.theta + eps * inv_mass * m_half
    lp_new, grad_new = evaluate(grad_fn, theta_new)
    m_new = m_half + 0.5 * eps * grad_new
    return PhasePoint(theta_new, m_new, lp_new, grad_new)


def find_initial_step_size(
    z: PhasePoint,
    inv_mass: np.ndarray,
    grad_fn,
    rng: np.random.Generator,
    eps: float = 1.0,
) -> float:
    """Double or halve the step size until the one-step acceptance
    probability crosses 0.5."""
    momentum = draw_momentum(rng, inv_mass)
    z0 = PhasePoint(z.theta, momentum, z.lp, z.grad)
    h0 = energy(z0, inv_mass)

    def accept_prob(step: float) -> float:
        z1 = leapfrog(z0, step, inv_mass, grad_fn)
        h1 = energy(z1, inv_mass)
        return float(np.exp(min(0.0, h0 - h1)))

    a = accept_prob(eps)
    direction = 1.0 if a > 0.5 else -1.0
    for _ in range(60):
        eps *= 2.0**direction
        if not 1e-12 < eps < 1e7:
            eps = min(max(eps, 1e-12), 1e7)
            break
        a = accept_prob(eps)
        if (direction > 0 and a <= 0.5) or (direction < 0 and a >= 0.5):
            break
    return eps
