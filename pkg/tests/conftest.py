import numpy as np
import pytest

from hellinger_kit.operator_model import build_family


def random_family(seed, n):
    return build_family({"builtin": "random", "n": n, "seed": seed})


def random_points(seed, count=5, radius=2.0):
    rng = np.random.default_rng(seed)
    return [complex(x, y) for x, y in rng.uniform(-radius, radius, size=(count, 2))]


@pytest.fixture
def counterexample():
    return build_family({"builtin": "counterexample"})


@pytest.fixture
def geometric():
    return build_family({"builtin": "geometric", "n": 1, "ratio": 2})


@pytest.fixture
def diag_geometric():
    return build_family({"builtin": "diag_geometric", "ratios": [2, 3]})


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion."""
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
