import numpy as np
import pytest


def risk_instance(rng, k=None, eps=None, n=None):
    """Random well-conditioned (singular values, projections, eps, n)."""
    from ridgeopt.risk_analytics import RiskInputs

    k = k or int(rng.integers(1, 21))
    s = np.sort(rng.uniform(0.3, 5.0, size=k))[::-1]
    p = rng.normal(size=k)
    p /= np.linalg.norm(p)
    eps = rng.uniform(0.05, 1.0) if eps is None else eps
    return RiskInputs(s, p, float(eps), n or max(k + 1, 10))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
