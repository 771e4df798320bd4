"""Bijective maps between constrained parameter vectors and the unbounded
sampling space, with log-Jacobian corrections.

Three constraint kinds are supported: unbounded (identity), lower-bounded
(exp map) and interval (scaled logistic map). Each map is strictly
increasing, so the bijection is coordinatewise and the Jacobian diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit, logit


class RejectionError(Exception):
    """Raised when an evaluation cannot produce a finite log density.

    Signals the sampler to reject the proposal (treated as a divergence)
    rather than abort the chain.
    """


class DomainError(ValueError):
    """Raised when a constrained value lies outside (or on the boundary of)
    its declared support."""


UNBOUNDED = "unbounded"
LOWER = "lower"
INTERVAL = "interval"


@dataclass(frozen=True)
class Constraint:
    """Support declaration for one parameter coordinate."""

    kind: str
    lower: float = -np.inf
    upper: float = np.inf

    def __post_init__(self):
        if self.kind not in (UNBOUNDED, LOWER, INTERVAL):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == LOWER and not np.isfinite(self.lower):
            raise ValueError("lower-bounded constraint needs a finite bound")
        if self.kind == INTERVAL:
            if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
                raise ValueError("interval constraint needs finite bounds")
            if not self.lower < self.upper:
                raise ValueError(
                    f"interval requires lower < upper, got ({self.lower}, {self.upper})"
                )

    def contains(self, x: float) -> bool:
        """Strict interior membership (bounds excluded)."""
        if self.kind == UNBOUNDED:
            return bool(np.isfinite(x))
        if self.kind == LOWER:
            return bool(np.isfinite(x)) and x > self.lower
        return bool(np.isfinite(x)) and self.lower < x < self.upper


def unbounded() -> Constraint:
    return Constraint(UNBOUNDED)


def lower_bounded(lower: float) -> Constraint:
    return Constraint(LOWER, lower=float(lower))


def interval(lower: float, upper: float) -> Constraint:
    return Constraint(INTERVAL, lower=float(lower), upper=float(upper))


@dataclass(frozen=True)
class TransformSpec:
    """Ordered constraints with parallel unique names, one per coordinate."""

    constraints: tuple[Constraint, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.constraints) != len(self.names):
            raise ValueError("constraints and names must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("parameter names must be unique")

    def __len__(self) -> int:
        return len(self.constraints)


def constrain(u: np.ndarray, spec: TransformSpec) -> tuple[np.ndarray, float]:
    """Map an unconstrained vector to the constrained space.

    Returns the constrained values and the total log-Jacobian
    log |dx/du| summed over coordinates.
    """
    x, log_jac, _, _ = constrain_with_derivs(u, spec)
    return x, log_jac


def constrain_with_derivs(
    u: np.ndarray, spec: TransformSpec
) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """As :func:`constrain` but also returns dx/du and d(logJ)/du per
    coordinate, needed to assemble gradients on the sampling space."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != len(spec):
        raise ValueError(f"expected vector of length {len(spec)}, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise RejectionError("non-finite unconstrained value")

    x = np.empty_like(u)
    dx_du = np.empty_like(u)
    dlj_du = np.zeros_like(u)
    log_jac = 0.0
    with np.errstate(over="ignore"):
        for i, c in enumerate(spec.constraints):
            ui = u[i]
            if c.kind == UNBOUNDED:
                x[i] = ui
                dx_du[i] = 1.0
            elif c.kind == LOWER:
                e = np.exp(ui)
                x[i] = c.lower + e
                dx_du[i] = e
                log_jac += ui
                dlj_du[i] = 1.0
            else:
                s = expit(ui)
                width = c.upper - c.lower
                x[i] = c.lower + width * s
                dx_du[i] = width * s * (1.0 - s)
                # log width + log s + log(1-s), evaluated overflow-safe
                log_jac += np.log(width) + log_expit(ui) + log_expit(-ui)
                dlj_du[i] = 1.0 - 2.0 * s
    if not np.all(np.isfinite(x)):
        raise RejectionError("constrained value overflowed")
    if not np.isfinite(log_jac):
        raise RejectionError("log-Jacobian overflowed")
    return x, float(log_jac), dx_du, dlj_du


def unconstrain(x: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Inverse of :func:`constrain`. Values must lie strictly inside their
    support; boundary values raise :class:`DomainError`."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != len(spec):
        raise ValueError(f"expected vector of length {len(spec)}, got shape {x.shape}")
    u = np.empty_like(x)
    for i, c in enumerate(spec.constraints):
        xi = x[i]
        if not c.contains(xi):
            raise DomainError(
                f"value {xi!r} for {spec.names[i]!r} outside open support "
                f"of {c.kind} constraint"
            )
        if c.kind == UNBOUNDED:
            u[i] = xi
        elif c.kind == LOWER:
            u[i] = np.log(xi - c.lower)
        else:
            u[i] = logit((xi - c.lower) / (c.upper - c.lower))
    return u


def constrain_matrix(U: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Row-wise :func:`constrain` for a draws matrix, Jacobians discarded."""
    U = np.asarray(U, dtype=float)
    out = np.empty_like(U)
    for r in range(U.shape[0]):
        out[r], _ = constrain(U[r], spec)
    return out
