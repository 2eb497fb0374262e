import math

import pytest

from sbwave.waveforms import build_profile

# Canonical parameter sets: (alpha, beta, gamma, omega, v)
SET_A = (1.0, 3.0, 0.0, -0.05, 0.0)
SET_B = (1.0, 3.0, 0.0, -0.1, 0.0)
SET_C = (1.0, 2.0, 5.0 / 12.0, -0.05, 0.0)
SET_D = (1.0, 3.0, 0.0, -0.1625, 0.5)


def profile_for(params, **kw):
    a, b, g, om, v = params
    return build_profile(a, b, om, v, gamma=g, **kw)


@pytest.fixture(scope="session")
def prof_a():
    return profile_for(SET_A)


@pytest.fixture(scope="session")
def prof_c():
    return profile_for(SET_C)


@pytest.fixture(scope="session")
def prof_d():
    return profile_for(SET_D)


@pytest.fixture(scope="session")
def consistent_profiles(prof_a, prof_c, prof_d):
    return {"A": prof_a, "C": prof_c, "D": prof_d}


# ---- closed-form oracles, written out independently of the package ----------

def sigma_of(omega, v):
    return -omega - v * v / 4.0


def eta_of(alpha, omega, v):
    return 1.0 - v * v - 4.0 * alpha * sigma_of(omega, v)


def q2_closed(alpha, beta, omega, v):
    s, e = sigma_of(omega, v), eta_of(alpha, omega, v)
    return 12.0 * alpha / beta * math.sqrt(s) * e


def q1_closed(alpha, beta, omega, v):
    s, e = sigma_of(omega, v), eta_of(alpha, omega, v)
    return 48.0 * alpha**2 / beta**2 * v * s**1.5 + 6.0 * alpha / beta * v * math.sqrt(s) * e


# ---- acceptance summary -----------------------------------------------------

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
