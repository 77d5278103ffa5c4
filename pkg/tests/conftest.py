from pathlib import Path

import numpy as np
import pytest

from wavelq import discretize_system, synthesize
from wavelq.examples import HeatExchangerParams, build_heat_exchanger, build_strings

ROOT = Path(__file__).resolve().parents[1]
SYSTEMS = ROOT / "systems"

# printed 4-decimal fixtures for the three-string network with v = sigma = 1
STRINGS_AD = np.array([
    [0, 3, 0, -2, 0, -2],
    [1, 0, 0, 0, 0, 0],
    [0, 2, 0, -1, 0, -2],
    [0, 0, -1, 0, 0, 0],
    [0, 2, 0, -2, 0, -1],
    [0, 0, 0, 0, -1, 0],
], dtype=float)
STRINGS_BD = np.array([
    [-1, 0, 0], [0, 0, 0], [-1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, 0, 1],
], dtype=float)
STRINGS_CD = np.array([[0, 2, 0, -2, 0, -2], [0, 0, 2, 0, 0, 0]], dtype=float)
STRINGS_DD = np.array([[-1, 0, 0], [0, -1, 0]], dtype=float)
STRINGS_PI = np.array([
    [1.6415, 0, 0, 0, 0.5702, 0],
    [0, 5.6355, 0, -4.1131, 0, -3.5224],
    [0, 0, 2, 0, 0, 0],
    [0, -4.1131, 0, 3.8635, 0, 2.2497],
    [0.5702, 0, 0, 0, 0.7067, 0],
    [0, -3.5224, 0, 2.2497, 0, 3.2728],
])
STRINGS_PI_TILDE = np.array([
    [1.6418, 0, 1.1988, 0, 0.9430, 0],
    [0, 0.8465, 0, 0, 0, -0.6830],
    [1.1988, 0, 1.3069, 0, 0.3919, 0],
    [0, 0, 0, 0.5000, 0, 0],
    [0.9430, 0, 0.3919, 0, 1.0511, 0],
    [0, -0.6830, 0, 0, 0, 1.9661],
])
STRINGS_FD = np.array([
    [0, 2.0283, 0, -1.4659, 0, -1.5624],
    [0.4827, 0, 1, 0, 0.1125, 0],
    [0.5702, 0, 0, 0, 0.7067, 0],
])
STRINGS_AD_EIGS = np.array([1j, -1j, -1 - np.sqrt(2), 1 - np.sqrt(2), -1 + np.sqrt(2), 1 + np.sqrt(2)])
STRINGS_CL_EIGS = np.array([0.6839, -0.6839, 0.4780j, -0.4780j, 0, 0])

# constant; linear-in-zeta coefficients; constant coefficients with linear speed
HE_PARAM_SETS = {
    "constant": HeatExchangerParams(1.0, 2.0, 1.0),
    "linear-alpha": HeatExchangerParams(lambda z: 1.0 + z, lambda z: 0.5 + 0.5 * z, 1.0),
    "linear-v": HeatExchangerParams(1.0, 1.0, lambda z: 1.0 + z),
}


def match_multiset(a, b):
    """Largest distance after greedily pairing each of ``a`` with a nearest unused ``b``."""
    b = list(np.asarray(b, dtype=complex))
    worst = 0.0
    for z in np.asarray(a, dtype=complex):
        d = [abs(z - w) for w in b]
        k = int(np.argmin(d))
        worst = max(worst, d[k])
        b.pop(k)
    return worst


@pytest.fixture(scope="session")
def strings_pipeline():
    disc = discretize_system(build_strings())
    return disc, synthesize(disc.discrete)


@pytest.fixture(scope="session", params=list(HE_PARAM_SETS))
def he_case(request):
    params = HE_PARAM_SETS[request.param]
    disc = discretize_system(build_heat_exchanger(params))
    return params, disc, synthesize(disc.discrete)


@pytest.fixture(scope="session")
def he_default():
    disc = discretize_system(build_heat_exchanger(HE_PARAM_SETS["constant"]))
    return disc, synthesize(disc.discrete)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
