"""Monotone iteration for the non-local bubble problem.

``u_0`` solves the unconstrained problem; ``u_{k+1}`` solves the obstacle
problem with obstacle ``u_k(t, -x) + psi(t, x)``. Under the stability
condition the sequence is non-decreasing and converges to the solution of
``min(L u, u(t,x) - u(t,-x) - psi(t,x)) = 0``.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .grid import Field, reflect, sample
from .lcp import LCPOptions
from .obstacle import BoundaryData, CompatibilityError, solve_obstacle, solve_unconstrained
from .operator import SymmetricCoefficients, apply_Lh
from .stationary import StationaryModel

__all__ = [
    "BubbleProblem",
    "IterationReport",
    "ContactInterval",
    "MonotonicityError",
    "psi_eval",
    "stationary_boundary",
    "stationary_q_boundary",
    "iterate",
    "extract_contact_set",
    "fixed_point_residual",
]

log = logging.getLogger(__name__)


class MonotonicityError(ArithmeticError):
    """Successive iterates decreased by more than the allowed slack."""


@dataclass(frozen=True)
class BubbleProblem:
    """Black-Scholes bubble problem on [0, T] x [-a, a].

    ``g`` defaults to data built from the stationary solution, see
    :func:`stationary_boundary`.
    """

    sigma: float = 1.0
    rho: float = 5.0
    r: float = 10.0
    lam: float = 1.0
    c: float = 0.001
    a: float = 2.0
    T: float = 3.0
    g: Optional[BoundaryData] = None

    def __post_init__(self):
        for name in ("sigma", "rho", "r", "a", "T"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        for name in ("lam", "c"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be non-negative, got {val}")

    @classmethod
    def example(cls, **overrides):
        """Reference configuration: r=10, rho=5, sigma=1, lam=1, c=0.001 on [0,3] x [-2,2]."""
        return cls(**overrides)

    @property
    def coeffs(self):
        return SymmetricCoefficients.black_scholes(self.sigma, self.rho, self.r)

    def stationary(self):
        return StationaryModel(self.r, self.rho, self.sigma, self.lam, self.c, search_upper=max(self.a, 2.0))

    def boundary_data(self):
        return self.g if self.g is not None else stationary_boundary(self)

    def psi(self, t, x):
        return psi_eval(self, t, x)


def psi_eval(problem, t, x):
    """Obstacle ``x (1 - exp(-(r+lam) t)) / (r+lam) - c``."""
    k = problem.r + problem.lam
    return np.asarray(x) * -np.expm1(-k * np.asarray(t)) / k - problem.c


def stationary_boundary(problem, model=None):
    """Boundary data that tend to the stationary solution q and respect the non-local constraint.

    ``g(0, x) = q(-|x|)`` (even, so ``u(0,x) - u(0,-x) = 0 >= psi(0,x) = -c``),
    ``g(t, -a) = q(-a)`` and
    ``g(t, a) = q(-a) + psi(t, a) + c exp(-(r+lam) t)``, which tends to ``q(a)``.
    The lateral difference then stays within ``[psi(t,a), psi(t,a) + 2c]``, so
    ``g >= g(t, -x) + psi`` holds on the whole parabolic boundary.
    """
    model = problem.stationary() if model is None else model
    a = problem.a
    q_left = float(model.q(-a))
    rate = problem.r + problem.lam

    def initial(x):
        return model.q(-np.abs(np.asarray(x, dtype=float)))

    def right(t):
        return q_left + float(psi_eval(problem, t, a)) + problem.c * np.exp(-rate * t)

    return BoundaryData(initial, lambda t: q_left, right)


def stationary_q_boundary(problem, model=None):
    """``g(t, +-a) = q(+-a)`` and ``g(0, x) = max(q(x), psi(0, x))``.

    These data satisfy ``psi <= g`` but not the non-local compatibility
    ``g >= g(t,-x) + psi``: at ``x = -a`` it fails while
    ``exp(-(r+lam) t) > (r+lam) c``. Use with ``check_compat=False``.
    """
    model = problem.stationary() if model is None else model
    a = problem.a
    q_left, q_right = float(model.q(-a)), float(model.q(a))
    floor = -problem.c

    def initial(x):
        return np.maximum(model.q(np.asarray(x, dtype=float)), floor)

    return BoundaryData(initial, lambda t: max(q_left, floor), lambda t: max(q_right, floor))


@dataclass
class IterationReport:
    """Iterates ``u_0..u_K`` and the sup-norm increments between them.

    The history is append-only.
    """

    iterates: List[Field]
    sup_increments: List[float]
    min_increments: List[float]
    converged: bool
    psi: Field = field(repr=False)

    @property
    def K(self):
        return len(self.iterates) - 1

    @property
    def final(self):
        return self.iterates[-1]

    def obstacle(self, k):
        """Obstacle used to compute ``u_k`` (k >= 1)."""
        if not 1 <= k <= self.K:
            raise IndexError(f"no obstacle for iterate {k}")
        return reflect(self.iterates[k - 1]) + self.psi


def iterate(problem, grid, max_outer=50, outer_tol=1e-6, iterations=None, lcp=LCPOptions(),
            allow_unstable=False, monotone_tol=1e-9, check_compat=True):
    """Run the outer iteration on ``grid``.

    Parameters
    ----------
    max_outer : int
        Cap on obstacle solves when ``iterations`` is not given.
    outer_tol : float
        Stop once ``max|u_{k+1} - u_k| <= outer_tol``.
    iterations : int, optional
        Perform exactly this many obstacle solves regardless of increments.
    monotone_tol : float
        Allowed decrease between iterates before :class:`MonotonicityError`
        is raised. Only logged when ``allow_unstable`` is set, since the
        comparison principle does not hold then.
    check_compat : bool
        Require ``g >= g(t,-x) + psi`` on the parabolic boundary (hard error).
        When False only ``psi <= g`` is required and the non-local constraint
        is imposed on interior nodes only.
    """
    if grid.a != problem.a or grid.T != problem.T:
        raise ValueError(f"grid domain [0,{grid.T}]x[-{grid.a},{grid.a}] does not match the problem")
    if iterations is not None and iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    coeffs = problem.coeffs
    g = problem.boundary_data()
    psi = sample(grid, problem.psi)
    _check_psi_below_g(grid, g, psi.values)
    u = solve_unconstrained(grid, coeffs, g, allow_unstable=allow_unstable)
    report = IterationReport([u], [], [], False, psi)
    cap = iterations if iterations is not None else max_outer
    for k in range(cap):
        obstacle = reflect(u) + psi
        try:
            u_next = solve_obstacle(grid, coeffs, g, obstacle, lcp=lcp, allow_unstable=allow_unstable,
                                    check_compat=check_compat)
        except ArithmeticError as exc:
            raise type(exc)(f"outer iteration {k + 1}: {exc}") from exc
        diff = u_next.values - u.values
        inc = float(np.max(np.abs(diff)))
        low = float(np.min(diff))
        report.iterates.append(u_next)
        report.sup_increments.append(inc)
        report.min_increments.append(low)
        log.debug("outer %d: sup increment %.3e, min increment %.3e", k + 1, inc, low)
        if low < -monotone_tol:
            msg = f"iterate {k + 1} decreased by {-low:.3e} (> {monotone_tol:.1e})"
            if not allow_unstable:
                raise MonotonicityError(msg)
            log.warning(msg)
        u = u_next
        report.converged = inc <= outer_tol
        if report.converged and iterations is None:
            break
    return report


def _check_psi_below_g(grid, g, psi, tol=1e-12):
    init, left, right = g.on_grid(grid)
    checks = (("t=0", init, psi[0]), ("x=-a", left, psi[:, 0]), ("x=a", right, psi[:, -1]))
    for where, gv, pv in checks:
        if np.any(gv < pv - tol):
            raise CompatibilityError(f"boundary data below psi on {where}")


def fixed_point_residual(problem, u):
    """Pointwise ``|min(L_h u, u - u(t,-x) - psi)|`` on interior nodes, levels 1..N."""
    grid = u.grid
    coeffs = problem.coeffs
    psi = sample(grid, problem.psi).values
    gap = (u.values - u.values[:, ::-1] - psi)[1:, 1:-1]
    lh = np.array([apply_Lh(u, coeffs, n) for n in range(1, grid.N + 1)])
    return np.abs(np.minimum(lh, gap))


@dataclass(frozen=True)
class ContactInterval:
    n: int
    t: float
    m_left: int
    m_right: int
    x_left: float
    x_right: float


def extract_contact_set(u, Psi, tol=1e-9):
    """Maximal index runs with ``u - Psi <= tol``, one list per time level."""
    grid = u.grid
    x, t = grid.x, grid.t
    contact = (u.values - Psi.values) <= tol
    out = []
    for n in range(grid.N + 1):
        row = contact[n]
        runs = []
        m = 0
        while m <= grid.M:
            if row[m]:
                start = m
                while m + 1 <= grid.M and row[m + 1]:
                    m += 1
                runs.append(ContactInterval(n, float(t[n]), start, m, float(x[start]), float(x[m])))
            m += 1
        out.append(runs)
    return out
