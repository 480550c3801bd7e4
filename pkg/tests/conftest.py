import numpy as np
import pytest

from tlnmf.signal import Signal


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noise_signal(rng):
    return Signal(0.3 * rng.standard_normal(16000), 16000)


def finite_difference(f, x, step=1e-6):
    """Central finite-difference gradient of scalar ``f`` at matrix ``x``."""
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        d = np.zeros_like(x)
        d[idx] = step
        g[idx] = (f(x + d) - f(x - d)) / (2 * step)
    return g


_CRITERIA_KEY = pytest.StashKey[list]()


class _Criterion:
    def __init__(self, results, number, title):
        self.results, self.number, self.title = results, number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        self.results.append((self.number, self.title, status, self.detail))
        return False


@pytest.fixture
def criterion(request):
    """``with criterion(n, title) as c:`` records one acceptance line."""
    results = request.config.stash.setdefault(_CRITERIA_KEY, [])
    return lambda number, title: _Criterion(results, number, title)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_CRITERIA_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(results):
        line = f"criterion {number} [{status}] {title}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
