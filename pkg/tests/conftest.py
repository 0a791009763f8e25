import numpy as np
import pytest

from hypercc.geometry import Configuration
from hypercc.potential import min_pair_distance


def random_config(rng, n, spread=1.5, min_distance=0.1, masses=None):
    """Random noncollision configuration through the (theta, phi) chart."""
    m = rng.uniform(0.5, 2.0, n) if masses is None else np.asarray(masses, dtype=float)
    while True:
        cfg = Configuration.from_chart(rng.uniform(-spread, spread, n), rng.uniform(-spread, spread, n), m)
        if n < 2 or min_pair_distance(cfg) > min_distance:
            return cfg


def fd_gradient(f, u, h=1e-5):
    """Central finite differences of a scalar function of chart coordinates."""
    g = np.zeros_like(u)
    for k in range(len(u)):
        e = np.zeros_like(u)
        e[k] = h
        g[k] = (f(u + e) - f(u - e)) / (2 * h)
    return g


def fd_hessian(f, u, h=1e-4):
    """Second-order central differences (four-point stencil off the diagonal)."""
    n = len(u)
    H = np.zeros((n, n))
    f0 = f(u)
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = h
        H[a, a] = (f(u + ea) - 2 * f0 + f(u - ea)) / h ** 2
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = h
            H[a, b] = H[b, a] = (f(u + ea + eb) - f(u + ea - eb) - f(u - ea + eb) + f(u - ea - eb)) / (4 * h * h)
    return H


def brute_force_U(points, masses):
    """Independent double loop over pairs with arcosh distances."""
    total = 0.0
    n = len(masses)
    for i in range(n):
        for j in range(i + 1, n):
            p, q = points[i], points[j]
            s = -(p[0] * q[0] + p[1] * q[1] - p[2] * q[2])
            d = np.arccosh(max(s, 1.0))
            total += masses[i] * masses[j] / np.tanh(d)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
