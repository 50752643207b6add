from dataclasses import dataclass

import numpy as np
import pytest

from nswp.config import preset
from nswp.exact import ExactState
from nswp.harness import _exact_timeseries
from nswp.oscillator import OscillatorParams, build_grid, eigenstate
from nswp.propagate import propagate
from nswp.pulse import SineSquaredPulse

CYCLE = 2 * np.pi
SNAPSHOT_CYCLES = (2, 5, 10)

# (criterion, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE_LOG = []


@pytest.fixture(scope="session")
def params():
    return OscillatorParams()


@pytest.fixture(scope="session")
def grid():
    return build_grid(-20, 20, 512)


@pytest.fixture(scope="session")
def wide_grid():
    return build_grid(-64, 64, 2048)


@pytest.fixture(scope="session")
def fig1_pulse():
    return SineSquaredPulse(F_m=1.0, Omega=0.5, T=10 * CYCLE)


@pytest.fixture(scope="session")
def fig2_pulse():
    return SineSquaredPulse(F_m=1.0, Omega=1.0, T=10 * CYCLE)


@dataclass
class PresetRun:
    name: str
    grid: object
    pulse: object
    numeric: object
    exact: object
    snapshots: dict
    final: object


def _run_preset(name):
    cfg = preset(name)
    p = cfg.params
    grid = cfg.grid.build()
    pulse = cfg.pulse.build(p)
    prop = cfg.prop.build(grid, p)
    wanted = {round(c * p.period, 9): c for c in SNAPSHOT_CYCLES}
    snapshots = {}

    def keep(t, psi):
        key = round(t, 9)
        if key in wanted:
            snapshots[wanted[key]] = psi

    numeric, final = propagate(eigenstate(cfg.n, p, grid), pulse, p, prop, callback=keep)
    exact, _ = _exact_timeseries(ExactState(cfg.n, pulse, p), numeric["t"], grid)
    return PresetRun(name, grid, pulse, numeric, exact, snapshots, final)


@pytest.fixture(scope="session")
def fig1_run():
    return _run_preset("fig1")


@pytest.fixture(scope="session")
def fig2_run():
    return _run_preset("fig2")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
