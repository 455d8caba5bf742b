import numpy as np
import pytest

from gclm.simeval.simulate import GenConfig, generate_model

# reference five-node drift matrix; B[j, i] != 0 means edge i -> j
FIVE_NODE_B = np.array(
    [
        [-1.0, 1.0, 0.0, 0.0, 0.0],
        [-1.0, 0.0, 0.2, 0.0, 0.0],
        [0.0, 0.0, -1.0, -0.5, 0.0],
        [0.0, 0.0, 0.0, -1.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, -1.0],
    ]
)


def random_model(rng, p, d=0.5):
    """Stable B and diagonal PD C from the simulation generator."""
    model = generate_model(GenConfig(p=p, d=d), rng=rng)
    return model.B, model.C


def random_pd(rng, p):
    A = rng.standard_normal((p, p))
    return A @ A.T + np.eye(p)


@pytest.fixture
def five_node():
    return FIVE_NODE_B.copy(), np.eye(5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240321)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    """``report(ok, detail)`` records one pass/fail line for the criterion named by the test."""
    number = int(request.node.name.split("_")[2])
    recorded = []

    def report(ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
        recorded.append(line)
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    yield report
    if not recorded:
        _ACCEPTANCE_LINES.append(f"[FAIL] criterion {number:2d}: error before the criterion was evaluated")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
