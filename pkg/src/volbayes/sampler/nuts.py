"""No-U-turn transitions.

Trajectories are grown by successive doublings, backward or forward with
equal probability, until either end-to-end momentum alignment fails (the
U-turn test, applied to every subtree merge as well) or the energy error
exceeds the divergence threshold. The next state is selected uniformly
among the slice-valid states of the trajectory, which reduces to the
Metropolis rule min(1, exp(H_old - H_new)) for a depth-0 tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hmc import PhasePoint, draw_momentum, energy, kinetic_energy, leapfrog

#: Energy error (nats) beyond which a trajectory is declared divergent.
DIVERGENCE_THRESHOLD = 1000.0


@dataclass
class TransitionStats:
    divergent: bool
    tree_depth: int
    accept_stat: float
    energy: float
    step_size: float
    n_leapfrog: int


@dataclass
class _Tree:
    minus: PhasePoint          # backward-in-time end
    plus: PhasePoint           # forward-in-time end
    proposal: PhasePoint | None
    n_valid: int
    keep_going: bool
    divergent: bool
    alpha_sum: float
    n_alpha: int


def _no_uturn(minus: PhasePoint, plus: PhasePoint, inv_mass: np.ndarray) -> bool:
    span = plus.theta - minus.theta
    return (
        float(np.dot(span, inv_mass * minus.momentum)) >= 0.0
        and float(np.dot(span, inv_mass * plus.momentum)) >= 0.0
    )


def _build_tree(
    z: PhasePoint,
    direction: int,
    depth: int,
    eps: float,
    inv_mass: np.ndarray,
    grad_fn,
    log_u: float,
    h0: float,
    rng: np.random.Generator,
) -> _Tree:
    if depth == 0:
        z_new = leapfrog(z, direction * eps, inv_mass, grad_fn)
        h_new = energy(z_new, inv_mass)
        valid = -h_new >= log_u
        divergent = log_u - DIVERGENCE_THRESHOLD > -h_new
        alpha = float(np.exp(min(0.0, h0 - h_new)))
        return _Tree(
            minus=z_new,
            plus=z_new,
            proposal=z_new if valid else None,
            n_valid=int(valid),
            keep_going=not divergent,
            divergent=divergent,
            alpha_sum=alpha,
            n_alpha=1,
        )

    first = _build_tree(z, direction, depth - 1, eps, inv_mass, grad_fn, log_u, h0, rng)
    if not first.keep_going:
        return first
    start = first.minus if direction == -1 else first.plus
    second = _build_tree(start, direction, depth - 1, eps, inv_mass, grad_fn, log_u, h0, rng)

    minus = second.minus if direction == -1 else first.minus
    plus = first.plus if direction == -1 else second.plus
    n_total = first.n_valid + second.n_valid
    proposal = first.proposal
    if second.keep_going and second.n_valid > 0:
        if rng.random() < second.n_valid / n_total:
            proposal = second.proposal
    keep_going = second.keep_going and _no_uturn(minus, plus, inv_mass)
    return _Tree(
        minus=minus,
        plus=plus,
        proposal=proposal,
        n_valid=n_total,
        keep_going=keep_going,
        divergent=first.divergent or second.divergent,
        alpha_sum=first.alpha_sum + second.alpha_sum,
        n_alpha=first.n_alpha + second.n_alpha,
    )


def nuts_transition(
    current: PhasePoint,
    eps: float,
    inv_mass: np.ndarray,
    grad_fn,
    max_depth: int,
    rng: np.random.Generator,
) -> tuple[PhasePoint, TransitionStats]:
    """One trajectory: returns the selected phase point and statistics.

    ``max_depth`` is the highest doubling index; with max_depth = 0 the
    trajectory is a single leapfrog step accepted or rejected by the
    Metropolis rule.
    """
    momentum = draw_momentum(rng, inv_mass)
    z0 = PhasePoint(current.theta, momentum, current.lp, current.grad)
    h0 = -z0.lp + kinetic_energy(momentum, inv_mass)
    # slice variable u ~ Uniform(0, exp(-h0)), stored in log space
    log_u = -h0 + np.log1p(-rng.random())

    minus = z0
    plus = z0
    selected = z0
    n_valid = 1
    depth = 0
    divergent = False
    alpha_sum = 0.0
    n_alpha = 0
    n_leapfrog = 0

    while True:
        direction = 1 if rng.random() < 0.5 else -1
        start = plus if direction == 1 else minus
        branch = _build_tree(start, direction, depth, eps, inv_mass, grad_fn, log_u, h0, rng)
        n_leapfrog += branch.n_alpha
        alpha_sum += branch.alpha_sum
        n_alpha += branch.n_alpha
        divergent = divergent or branch.divergent
        if direction == 1:
            plus = branch.plus
        else:
            minus = branch.minus
        depth += 1
        if branch.keep_going:
            if branch.proposal is not None and rng.random() < min(1.0, branch.n_valid / n_valid):
                selected = branch.proposal
            n_valid += branch.n_valid
        else:
            break
        if not _no_uturn(minus, plus, inv_mass):
            break
        if depth > max_depth:
            break

    stats = TransitionStats(
        divergent=divergent,
        tree_depth=depth,
        accept_stat=alpha_sum / max(n_alpha, 1),
        energy=energy(selected, inv_mass),
        step_size=eps,
        n_leapfrog=n_leapfrog,
    )
    return PhasePoint(selected.theta, selected.momentum, selected.lp, selected.grad), stats
