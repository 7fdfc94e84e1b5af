import numpy as np
import pytest

from catbranch.config import preset_config
from catbranch.model import CatSpec, OscillatorNetwork, validate


def three_body(k12, k31, k23=1.02236, sigma=0.5):
    net = OscillatorNetwork.from_pairs(
        [1.5, 1.0, 1.0], [2.5, 0.0, 0.0], {(0, 1): k12, (0, 2): k31, (1, 2): k23}
    )
    return validate(net, CatSpec([-5.0, 6.0, 7.5], [sigma] * 3))


@pytest.fixture(scope="session")
def weak_rc():
    return preset_config("weak")


@pytest.fixture(scope="session")
def strong_rc():
    return preset_config("strong")


@pytest.fixture(scope="session")
def decoupled_rc():
    return preset_config("decoupled")


@pytest.fixture(scope="session")
def weak(weak_rc):
    return weak_rc.config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def _record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
