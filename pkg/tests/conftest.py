import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def disk_monomial(i, j):
    """Closed-form integral of x1^i x2^j over the unit disk."""
    if i % 2 or j % 2:
        return 0.0
    a, b = (i + 1) / 2, (j + 1) / 2
    return 2 * math.gamma(a) * math.gamma(b) / math.gamma(a + b) / (i + j + 2)


def ball_monomial(i, j, k):
    """Closed-form integral of x1^i x2^j x3^k over the unit ball in R^3."""
    if i % 2 or j % 2 or k % 2:
        return 0.0
    a, b, c = (i + 1) / 2, (j + 1) / 2, (k + 1) / 2
    return 2 * math.gamma(a) * math.gamma(b) * math.gamma(c) / math.gamma(a + b + c) / (i + j + k + 3)


def random_ball_points(rng, count, dim, rmax=0.95):
    """Uniform-in-volume interior points with |x| <= rmax."""
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1)[:, None]
    r = rmax * rng.random(count) ** (1.0 / dim)
    return v * r[:, None]


def central_difference_gradient(f, x, h=1e-6):
    """Gradient of a vector-valued f at points x (M, d) -> (M, N, d)."""
    cols = []
    for i in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
