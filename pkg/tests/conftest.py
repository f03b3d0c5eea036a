import hypothesis
import numpy as np
import pytest

from pdecode.bundled import bundled_codes
from pdecode.codes import load_parity_check_file
from pdecode.config import resolve_config

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("thorough", max_examples=500)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long Monte-Carlo reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def hamming():
    return load_parity_check_file(bundled_codes["hamming74"])


@pytest.fixture
def bch15():
    return load_parity_check_file(bundled_codes["bch_15_7"])


HEAT_DEMO = {"lambda": 0.2, "h": 0.005, "ell": 0.05, "n_x": 200, "n_t": 100}
NLSE_SMALL = {"s_sign": 1, "n_sq": 1.0, "n_tau": 256, "tau_span": 40.0, "ell_xi": 0.025, "n_steps": 20}


@pytest.fixture
def make_config(tmp_path):
    """ Build an ExperimentConfig from keyword sections, on top of the
    Hamming heat demo """
    def make(pde="heat", experiment=None, heat=None, nlse=None, layout=None, decoder=None, **overrides):
        config_dict = {"experiment": {"pde": pde, "code": "hamming74", "seed": 5, "trials": 4,
                                      "noise_levels": [0.0], "decoders": ["gf", "peak"],
                                      "workers": 1, "output_dir": str(tmp_path)},
                       "layout": {"t0": 0.2}}
        if pde == "heat":
            config_dict["heat"] = dict(HEAT_DEMO)
            config_dict["heat"].update(heat or {})
        else:
            config_dict["nlse"] = dict(NLSE_SMALL)
            config_dict["nlse"].update(nlse or {})
            config_dict["layout"] = {"t0": 1.0, "dispersion_length": 0.1}
        config_dict["experiment"].update(experiment or {})
        config_dict["layout"].update(layout or {})
        if decoder:
            config_dict["decoder"] = dict(decoder)
        return resolve_config(config_dict, overrides)
    return make
