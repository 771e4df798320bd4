from .adapt import DualAveraging, regularized_inv_mass, warmup_windows
from .hmc import PhasePoint, energy, find_initial_step_size, leapfrog
from .nuts import DIVERGENCE_THRESHOLD, TransitionStats, nuts_transition
from .run import ChainFailure, ChainOutput, HmcConfig, SamplingError, run_chains, run_warmup

__all__ = [
    "ChainFailure",
    "ChainOutput",
    "DIVERGENCE_THRESHOLD",
    "DualAveraging",
    "HmcConfig",
    "PhasePoint",
    "SamplingError",
    "TransitionStats",
    "energy",
    "find_initial_step_size",
    "leapfrog",
    "nuts_transition",
    "regularized_inv_mass",
    "run_chains",
    "run_warmup",
    "warmup_windows",
]
