from .base import SimulationResult, VolatilityModel, gaussian_loglik
from .fw import BETA_FIXED, MU_FIXED, FwModel, FwParams
from .garch import GarchModel, GarchParams
from .vs import VsModel, VsParams

MODEL_CODES = ("garch", "vs", "fw-fixed", "fw-rw")


def build_model(code: str, data, priors=None, p_star: float = 0.0) -> VolatilityModel:
    """Instantiate a model family by its CLI code."""
    if code == "garch":
        return GarchModel(data, priors)
    if code == "vs":
        return VsModel(data, priors)
    if code == "fw-fixed":
        return FwModel(data, mode="fixed", p_star=p_star, priors=priors)
    if code == "fw-rw":
        return FwModel(data, mode="rw", priors=priors)
    raise ValueError(f"unknown model {code!r}; choose from {MODEL_CODES}")


__all__ = [
    "BETA_FIXED",
    "MU_FIXED",
    "MODEL_CODES",
    "FwModel",
    "FwParams",
    "GarchModel",
    "GarchParams",
    "SimulationResult",
    "VolatilityModel",
    "VsModel",
    "VsParams",
    "build_model",
    "gaussian_loglik",
]
