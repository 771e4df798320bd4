import numpy as np
import pytest

from volbayes.models import FwModel, GarchModel
from volbayes.models import fw as fw_mod
from volbayes.sampler import HmcConfig, run_chains
from volbayes.series import PriceSeries

#: Parameters of the published simulation-calibration exercise.
FW_TRUE = {
    "phi": 0.12,
    "xi": 1.5,
    "sigma_f": 0.758,
    "sigma_c": 2.087,
    "alpha_0": -0.327,
    "alpha_n": 1.79,
    "alpha_p": 18.43,
}

VS_TRUE = {"mu": 100.0, "tau": 0.999, "sigma_max": 0.01}

GARCH_TRUE = {"mu": 1e-5, "alpha": 0.1, "beta": 0.85, "sigma1": 0.012}


@pytest.fixture(scope="session")
def small_data():
    """Short random-walk series for construction and gradient tests."""
    rng = np.random.default_rng(42)
    return PriceSeries(4.6 + np.cumsum(rng.normal(0.0, 0.01, 80)))


@pytest.fixture(scope="session")
def fw_sim_1000():
    rng = np.random.default_rng(2024)
    return fw_mod.simulate(FW_TRUE, T=1000, rng=rng, mode="fixed", p_star=0.0)


@pytest.fixture(scope="session")
def fw_fit_1000(fw_sim_1000):
    """Moderate-size fit reused by forecast and state-recovery tests."""
    model = FwModel(fw_sim_1000.series, mode="fixed", p_star=0.0)
    outputs = run_chains(model, HmcConfig(chains=2, warmup=300, draws=300, seed=99))
    assert not all(o.failed for o in outputs)
    return model, outputs


@pytest.fixture(scope="session")
def garch_sim_2000():
    rng = np.random.default_rng(7)
    from volbayes.models import garch as garch_mod

    return garch_mod.simulate(GARCH_TRUE, T=2000, rng=rng, init_log_price=4.6)


@pytest.fixture(scope="session")
def garch_fit_2000(garch_sim_2000):
    model = GarchModel(garch_sim_2000.series)
    outputs = run_chains(model, HmcConfig(seed=17))
    assert not all(o.failed for o in outputs)
    return model, outputs
