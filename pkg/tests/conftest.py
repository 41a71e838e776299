import math
import time

import numpy as np
import pytest

from triodlab.flow import Scenario, run
from triodlab.presets import circle, lens, perturbed_triod, triod

RUNTIMES: dict[str, float] = {}


def timed_run(name: str, scenario: Scenario):
    t0 = time.perf_counter()
    traj = run(scenario)
    RUNTIMES[name] = time.perf_counter() - t0
    return traj

# ---------------------------------------------------------------------------
# acceptance reporting: one visible pass/fail line per criterion
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        mark = "PASS" if ok else "FAIL"
        line = f"[{mark}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# shared (expensive) trajectories
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def circle_run_256():
    sc = Scenario(initial=circle(1.0, 256), dt=1e-5, t_end=0.3,
                  snapshot_stride=250, h_target=2 * math.pi / 256)
    return timed_run("circle_256", sc)


@pytest.fixture(scope="session")
def circle_run_512():
    sc = Scenario(initial=circle(1.0, 512), dt=2.5e-6, t_end=0.3,
                  snapshot_stride=1000, h_target=2 * math.pi / 512)
    return timed_run("circle_512", sc)


@pytest.fixture(scope="session")
def circle_run_vanish():
    # coarser, longer run that approaches the vanishing time t* = 1/2
    sc = Scenario(initial=circle(1.0, 192), dt=2e-5, t_end=0.49,
                  snapshot_stride=100, h_target=2 * math.pi / 192)
    return run(sc)


PERTURBED = dict(extent=2.0, h=0.01)
PERTURBED_RUN = dict(dt=5e-5, t_end=0.75, snapshot_stride=100, h_target=0.01)


def _perturbed_run(amplitude: float):
    sc = Scenario(initial=perturbed_triod(amplitude=amplitude, **PERTURBED),
                  **PERTURBED_RUN)
    return timed_run(f"perturbed_{amplitude}", sc)


@pytest.fixture(scope="session")
def perturbed_run_002():
    return _perturbed_run(0.02)


@pytest.fixture(scope="session")
def perturbed_run_001():
    return _perturbed_run(0.01)


@pytest.fixture(scope="session")
def perturbed_run_0005():
    return _perturbed_run(0.005)


@pytest.fixture(scope="session")
def lens_run():
    sc = Scenario(initial=lens(bridge=0.4, arm=1.2, h=0.01, opening_deg=110.0),
                  dt=5e-5, t_end=1.5, snapshot_stride=100, h_target=0.01)
    return timed_run("lens", sc)


@pytest.fixture(scope="session")
def static_triod_run():
    sc = Scenario(initial=triod(extent=2.0, h=0.01), dt=1e-5, t_end=0.1,
                  snapshot_stride=200, h_target=0.01)
    return timed_run("static_triod", sc)
