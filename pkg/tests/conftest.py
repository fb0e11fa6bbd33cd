import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ssdc.gas import GasModel, conserved
from ssdc.timestep import Tolerances, step

settings.register_profile("ci", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def random_states(rng, n, gas, spread=0.5):
    """n admissible conserved states with O(1) variation."""
    rho = 0.5 + spread * rng.random(n) * 2
    T = 0.5 + spread * rng.random(n) * 2
    U = rng.standard_normal((3, n))
    return conserved(rho, U, T, gas)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gas():
    return GasModel(gamma=1.4, R=0.9)


def smooth_periodic_state(grid, gas, amp=0.2, seed=0):
    """Smooth admissible state with random low-mode content on a periodic box."""
    r = np.random.default_rng(seed)
    L = grid.hi - grid.lo
    s = [2 * np.pi * (grid.x[d] - grid.lo[d]) / L[d] for d in range(3)]

    def mode():
        a, b, c = r.uniform(0, 2 * np.pi, 3)
        return np.sin(s[0] + a) * np.cos(s[1] + b) * np.sin(s[2] + c)

    rho = 1.0 + amp * mode()
    T = 1.0 + amp * mode()
    U = np.stack([0.5 * mode() + 0.1, 0.5 * mode(), 0.5 * mode() - 0.1])
    return conserved(rho, U, T, gas)


def dp5_order_fit(Ns=(4, 8, 16, 32)):
    """Fitted global order of fixed-step DP5 on y' = -y over [0, 1]."""
    errs = []
    for N in Ns:
        y, dt = np.array([1.0]), 1.0 / N
        for i in range(N):
            y = step(lambda u, t: -u, y, i * dt, dt, Tolerances(1.0, 1.0)).y
        errs.append(abs(y[0] - math.exp(-1.0)))
    return np.polyfit(np.log(1.0 / np.array(Ns)), np.log(errs), 1)[0]


# -- acceptance report ------------------------------------------------------

_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """report(n, ok, detail): record one PASS/FAIL line for criterion n."""
    lines = request.config.stash.setdefault(_LINES, [])

    def emit(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
