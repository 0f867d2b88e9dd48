import numpy as np
import pytest

from spotvol.series import TickSeries


def brownian_series(sigma2, n=23400, T=1.0, noise_sd=0.0, seed=0, x0=1.0):
    """Constant-volatility Brownian path, optionally with i.i.d. Gaussian noise."""
    rng = np.random.default_rng(seed)
    d = T / n
    x = x0 + np.concatenate([[0.0], np.cumsum(np.sqrt(sigma2 * d) * rng.standard_normal(n))])
    y = x + noise_sd * rng.standard_normal(n + 1) if noise_sd > 0 else x
    return TickSeries(0.0, d, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria append "CRITERION k: PASS/FAIL ..." lines here
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
