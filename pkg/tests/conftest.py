import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bubblefd import BubbleProblem, iterate, make_grid
from bubblefd.lcp import LCPInstance
from bubblefd.operator import TridiagonalSystem

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def example_problem():
    return BubbleProblem.example()


@pytest.fixture(scope="session")
def example_run(example_problem):
    """Converged 50x50 run of the reference example (outer tolerance 1e-6)."""
    return iterate(example_problem, make_grid(2.0, 3.0, 50, 50))


def random_m_matrix(rng, n, dominance=(0.1, 2.0)):
    """Tridiagonal M-matrix with identity boundary rows and strictly dominant interior rows."""
    lower = -rng.uniform(0.0, 1.0, n)
    upper = -rng.uniform(0.0, 1.0, n)
    diag = np.abs(lower) + np.abs(upper) + rng.uniform(*dominance, n)
    lower[[0, -1]] = 0.0
    upper[[0, -1]] = 0.0
    diag[[0, -1]] = 1.0
    return TridiagonalSystem(lower, diag, upper)


def planted_lcp(rng, n, side="right", margin=0.1):
    """LCP whose unique solution is known: contact on an interval touching one end.

    Returns ``(instance, u_star, contact_indices)``. Strict complementarity holds
    with ``margin``, so exactly one active set is admissible.
    """
    A = random_m_matrix(rng, n)
    interior = np.arange(1, n - 1)
    k = int(rng.integers(0, n - 1))  # number of contact nodes, possibly 0
    contact = interior[len(interior) - k:] if side == "right" else interior[:k]
    psi = rng.normal(0.0, 1.0, n)
    u = psi + rng.uniform(margin, 1.0 + margin, n)
    u[contact] = psi[contact]
    w = np.zeros(n)
    w[contact] = rng.uniform(margin, 1.0 + margin, len(contact))
    left, right = u[0], u[-1]
    psi[0], psi[-1] = min(psi[0], left), min(psi[-1], right)
    q = A.matvec(u) - w
    return LCPInstance(A, q, psi, left, right), u, tuple(int(i) for i in contact)
