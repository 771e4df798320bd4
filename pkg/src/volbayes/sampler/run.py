"""Multi-chain orchestration.

Each chain owns an independent RNG stream spawned from the run seed,
initializes uniformly on the unconstrained space, adapts during warmup
and then samples with frozen step size and mass. Chains run sequentially
or in a process pool; outputs merge by chain index either way, so results
are identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..paramspace import RejectionError
from .adapt import DualAveraging, regularized_inv_mass, warmup_windows
from .hmc import PhasePoint, find_initial_step_size
from .nuts import nuts_transition

STAT_FIELDS = ("divergent", "tree_depth", "accept_stat", "energy", "step_size")


class SamplingError(RuntimeError):
    pass


class ChainFailure(RuntimeError):
    pass


@dataclass
class HmcConfig:
    chains: int = 4
    warmup: int = 400
    draws: int = 400
    max_tree_depth: int = 10
    target_accept: float = 0.8
    seed: int = 0
    init_radius: float = 2.0
    workers: int = 1

    def __post_init__(self):
        if self.chains < 1 or self.warmup < 1 or self.draws < 1:
            raise ValueError("chains, warmup and draws must be positive")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")
        if self.max_tree_depth < 0:
            raise ValueError("max_tree_depth must be nonnegative")


@dataclass
class ChainOutput:
    chain_id: int
    seed_entropy: int
    param_names: tuple[str, ...]
    draws: np.ndarray
    unconstrained_draws: np.ndarray
    stats: dict[str, np.ndarray]
    inv_mass: np.ndarray
    step_size: float
    max_tree_depth: int
    failed: bool = False
    error: str = ""

    @property
    def n_divergent(self) -> int:
        if self.failed:
            return 0
        return int(np.sum(self.stats["divergent"]))

    @property
    def n_depth_saturated(self) -> int:
        if self.failed:
            return 0
        return int(np.sum(self.stats["tree_depth"] > self.max_tree_depth))


def _initial_point(target, radius: float, rng: np.random.Generator) -> PhasePoint:
    dim = target.dimension
    for _ in range(100):
        theta = rng.uniform(-radius, radius, dim)
        try:
            lp, grad = target.log_posterior(theta)
        except RejectionError:
            continue
        if np.isfinite(lp) and np.all(np.isfinite(grad)):
            return PhasePoint(theta, np.zeros(dim), float(lp), np.asarray(grad, float))
    raise ChainFailure("no finite starting point found in 100 attempts")


def run_warmup(
    target, z: PhasePoint, config: HmcConfig, rng: np.random.Generator
) -> tuple[float, np.ndarray, PhasePoint]:
    """Adapt step size and diagonal mass; returns (eps, inv_mass, state)."""
    dim = target.dimension
    grad_fn = target.log_posterior
    inv_mass = np.ones(dim)
    eps = find_initial_step_size(z, inv_mass, grad_fn, rng)
    da = DualAveraging(target=config.target_accept)
    da.restart(eps)

    windows = warmup_windows(config.warmup)
    window_idx = 0
    buffer: list[np.ndarray] = []
    n_divergent = 0

    for it in range(config.warmup):
        z, stats = nuts_transition(z, eps, inv_mass, grad_fn, config.max_tree_depth, rng)
        n_divergent += stats.divergent
        eps = da.update(stats.accept_stat)
        if window_idx < len(windows):
            start, end = windows[window_idx]
            if start <= it < end:
                buffer.append(z.theta.copy())
            if it == end - 1:
                inv_mass = regularized_inv_mass(np.asarray(buffer))
                buffer.clear()
                window_idx += 1
                eps = find_initial_step_size(z, inv_mass, grad_fn, rng, eps=da.averaged)
                da.restart(eps)
    if n_divergent >= config.warmup:
        raise ChainFailure(f"all {config.warmup} warmup transitions divergent")
    return da.averaged, inv_mass, z


def _run_single_chain(target, config: HmcConfig, chain_id: int, entropy: int) -> ChainOutput:
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    names = getattr(target, "coordinate_names", None) or tuple(
        f"x[{i}]" for i in range(target.dimension)
    )
    try:
        z = _initial_point(target, config.init_radius, rng)
        eps, inv_mass, z = run_warmup(target, z, config, rng)

        dim = target.dimension
        unconstrained = np.empty((config.draws, dim))
        stats = {
            "divergent": np.zeros(config.draws, dtype=bool),
            "tree_depth": np.zeros(config.draws, dtype=int),
            "accept_stat": np.zeros(config.draws),
            "energy": np.zeros(config.draws),
            "step_size": np.full(config.draws, eps),
        }
        grad_fn = target.log_posterior
        for it in range(config.draws):
            z, tstats = nuts_transition(z, eps, inv_mass, grad_fn, config.max_tree_depth, rng)
            unconstrained[it] = z.theta
            stats["divergent"][it] = tstats.divergent
            stats["tree_depth"][it] = tstats.tree_depth
            stats["accept_stat"][it] = tstats.accept_stat
            stats["energy"][it] = tstats.energy
        constrain = getattr(target, "constrain_draws", None)
        draws = constrain(unconstrained) if constrain is not None else unconstrained.copy()
        return ChainOutput(
            chain_id=chain_id,
            seed_entropy=entropy,
            param_names=tuple(names),
            draws=draws,
            unconstrained_draws=unconstrained,
            stats=stats,
            inv_mass=inv_mass,
            step_size=eps,
            max_tree_depth=config.max_tree_depth,
        )
    except ChainFailure as exc:
        empty = np.empty((0, target.dimension))
        return ChainOutput(
            chain_id=chain_id,
            seed_entropy=entropy,
            param_names=tuple(names),
            draws=empty,
            unconstrained_draws=empty,
            stats={k: np.empty(0) for k in STAT_FIELDS},
            inv_mass=np.ones(target.dimension),
            step_size=np.nan,
            max_tree_depth=config.max_tree_depth,
            failed=True,
            error=str(exc),
        )


def run_chains(target, config: HmcConfig) -> list[ChainOutput]:
    """Run config.chains independent chains; failed chains are returned
    with their error message, and at least one chain must succeed."""
    if target.dimension < 1:
        raise ValueError("target dimension must be at least 1")
    root = np.random.SeedSequence(config.seed)
    entropies = [int(s.generate_state(1)[0]) for s in root.spawn(config.chains)]
    jobs = [(target, config, cid, entropies[cid]) for cid in range(config.chains)]

    if config.workers > 1 and config.chains > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.chains)) as pool:
            outputs = list(pool.map(_chain_job, jobs))
    else:
        outputs = [_chain_job(job) for job in jobs]

    outputs.sort(key=lambda c: c.chain_id)
    if all(c.failed for c in outputs):
        details = "; ".join(f"chain {c.chain_id}: {c.error}" for c in outputs)
        raise SamplingError(f"all chains failed ({details})")
    return outputs


def _chain_job(job) -> ChainOutput:
    return _run_single_chain(*job)
