import numpy as np
import pytest

from lpvi import integrator as I
from lpvi import systems as S

ELECTRON_Y0 = np.array([0.1, 0, 0.05, 0, 0.1, 0, 0, 0, 0, 0, 0, 0.0])
OC_Y0 = np.array([0.3, 0, 0, 0, 0.1, 0, 0.1, 0, 0.1, 0, 1, 0, 0.5])


def electron_run(h, N, y0=ELECTRON_Y0, multiplier=0.5, params=None):
    model, state = S.electron_initial_state(params or S.ElectronParams(), h, y0, multiplier)
    return I.run_trajectory(model, state, N)


def beanie_fo_run(h, N, params=None, psi0=0.3, dpsi0=0.0, omega0=(1.0, 0.0, 0.5)):
    model, state = S.beanie_first_order_initial_state(params or S.BeanieParams(), h, psi0, dpsi0, omega0)
    return I.run_trajectory(model, state, N)


def beanie_oc_run(h, N, params=None, y0=OC_Y0):
    model, state = S.beanie_optimal_control_initial_state(params or S.BeanieParams(), h, y0)
    return I.run_trajectory(model, state, N)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    """Record and print one pass/fail line for an acceptance criterion."""
    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        VERDICTS.append(line)
        print(line)
        return ok

    return report
