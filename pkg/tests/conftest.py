import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "yblab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("yblab")


def rel(a, b):
    a, b = complex(a), complex(b)
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def nomes03():
    from yblab.specfun import EllipticNomes

    return EllipticNomes(0.3, 0.3)


UNIT_B = complex(math.cos(math.pi / 2 - 0.6), math.sin(math.pi / 2 - 0.6))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list = []


def record_criterion(label: str, passed: bool, detail: str = "") -> None:
    line = f"{'PASS' if passed else 'FAIL'}  {label}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
