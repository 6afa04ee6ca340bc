import numpy as np
import pytest

from urllc_ris.channel import DESK_PROFILE, gen_channels, random_geometry
from urllc_ris.numerics import RngStream
from urllc_ris.rates import Design, a_coeff

# lines reported by the acceptance checks, echoed at the end of the run
ACCEPTANCE_LINES = {}


def desk_instance(seed, params=DESK_PROFILE):
    rng = RngStream(seed, 0)
    geom = random_geometry(params.K, rng)
    return gen_channels(params, geom, rng)


def random_design(cs, P, rng, power_fraction=None):
    """Random feasible design; total power uniform in (0, P] unless given."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    w = gen.standard_normal((cs.K, cs.M)) + 1j * gen.standard_normal((cs.K, cs.M))
    frac = gen.uniform(0.05, 1.0) if power_fraction is None else power_fraction
    w *= np.sqrt(frac * P / np.sum(np.abs(w) ** 2))
    return Design(w, gen.uniform(0, 2 * np.pi, cs.N))


@pytest.fixture
def desk():
    return DESK_PROFILE


@pytest.fixture
def a_desk():
    return a_coeff(DESK_PROFILE)


@pytest.fixture
def cs_desk():
    return desk_instance(7)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
