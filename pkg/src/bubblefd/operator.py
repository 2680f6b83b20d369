"""Implicit discrete operator ``-a/2 u'' + b u' + c u`` and its step matrix.

One backward-Euler step of ``u_t + Mu = 0`` reads ``A u^n = u^{n-1}`` with
``A`` tridiagonal: diagonal ``e_m``, super-diagonal ``d_m``, sub-diagonal
``f_m``. Boundary rows are identity rows carrying Dirichlet data.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._kernels import thomas
from .grid import Grid

__all__ = [
    "SymmetricCoefficients",
    "TridiagonalSystem",
    "StabilityReport",
    "StabilityError",
    "check_stability",
    "require_stable",
    "assemble_step_matrix",
    "apply_Lh",
]


class StabilityError(ValueError):
    """The grid violates |b(x)| <= a(x)/dx, so the step matrix is not an M-matrix."""


def _const(value):
    return lambda x: np.full(np.shape(x), float(value))


@dataclass(frozen=True)
class SymmetricCoefficients:
    """Coefficients of ``Mu = -diffusion/2 u'' + drift u' + reaction u``.

    ``diffusion`` and ``reaction`` must be even, ``drift`` odd. The
    Black-Scholes case keeps ``sigma``, ``rho``, ``r`` for closed-form
    stability bounds.
    """

    diffusion: Callable
    drift: Callable
    reaction: Callable
    sigma: Optional[float] = None
    rho: Optional[float] = None
    r: Optional[float] = None

    @classmethod
    def black_scholes(cls, sigma, rho, r):
        if sigma <= 0 or rho < 0 or r < 0:
            raise ValueError(f"need sigma > 0, rho >= 0, r >= 0; got {sigma}, {rho}, {r}")
        return cls(_const(sigma**2), lambda x: rho * np.asarray(x, dtype=float), _const(r),
                   sigma=float(sigma), rho=float(rho), r=float(r))

    @property
    def is_black_scholes(self):
        return self.sigma is not None

    def at(self, x):
        x = np.asarray(x, dtype=float)
        a = np.broadcast_to(np.asarray(self.diffusion(x), dtype=float), x.shape)
        b = np.broadcast_to(np.asarray(self.drift(x), dtype=float), x.shape)
        c = np.broadcast_to(np.asarray(self.reaction(x), dtype=float), x.shape)
        return a, b, c

    def check_symmetry(self, x, rtol=1e-12):
        """Raise ValueError unless the parity conditions hold at the points ``x``."""
        x = np.asarray(x, dtype=float)
        a, b, c = self.at(x)
        am, bm, cm = self.at(-x)
        scale = 1.0 + np.abs(a) + np.abs(b) + np.abs(c)
        if np.any(a <= 0):
            raise ValueError("diffusion must be positive")
        if np.any(np.abs(a - am) > rtol * scale):
            raise ValueError("diffusion must be even")
        if np.any(np.abs(c - cm) > rtol * scale):
            raise ValueError("reaction must be even")
        if np.any(np.abs(b + bm) > rtol * scale):
            raise ValueError("drift must be odd")


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """``(A u)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    grid: Optional[Grid] = None

    def __post_init__(self):
        for name in ("lower", "diag", "upper"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.diag.shape[0]
        if self.lower.shape != (n,) or self.upper.shape != (n,) or n < 3:
            raise ValueError("lower, diag, upper must be 1-D of equal length >= 3")

    @property
    def size(self):
        return self.diag.shape[0]

    def matvec(self, u):
        u = np.asarray(u, dtype=float)
        out = self.diag * u
        out[1:] += self.lower[1:] * u[:-1]
        out[:-1] += self.upper[:-1] * u[1:]
        return out

    def dense(self):
        return (np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1))

    def solve(self, rhs):
        """Thomas algorithm; stable without pivoting for diagonally dominant rows."""
        return thomas(self.lower, self.diag, self.upper, np.asarray(rhs, dtype=float))

    def is_m_matrix(self):
        """Positive diagonal, non-positive off-diagonals and strict row dominance."""
        inner = slice(1, self.size - 1)
        lo, di, up = self.lower[inner], self.diag[inner], self.upper[inner]
        return bool(np.all(self.diag > 0) and np.all(lo <= 0) and np.all(up <= 0)
                    and np.all(di > np.abs(lo) + np.abs(up)))


@dataclass(frozen=True)
class StabilityReport:
    satisfied: bool
    max_dx_allowed: float
    dx: float

    def message(self):
        state = "satisfied" if self.satisfied else "violated"
        return (f"stability condition |b(x)| <= a(x)/dx {state}: dx = {self.dx:.6g}, "
                f"bound dx <= {self.max_dx_allowed:.6g}")


def check_stability(grid, coeffs):
    """Compare ``dx`` with the largest step keeping the step matrix an M-matrix.

    Black-Scholes: ``rho * a * dx <= sigma^2``, i.e. ``dx <= sigma^2/(rho a)``.
    Otherwise the nodewise bound ``min a(x_m)/|b(x_m)|``.
    """
    dx = grid.dx
    if coeffs.is_black_scholes:
        bound = np.inf if coeffs.rho == 0 else coeffs.sigma**2 / (coeffs.rho * grid.a)
    else:
        a, b, _ = coeffs.at(grid.x)
        with np.errstate(divide="ignore"):
            ratios = np.where(b != 0, a / np.abs(b), np.inf)
        bound = float(np.min(ratios))
    # relative slack so that dx == bound up to rounding counts as satisfied
    return StabilityReport(bool(dx <= bound * (1 + 1e-12)), float(bound), float(dx))


def require_stable(grid, coeffs):
    report = check_stability(grid, coeffs)
    if not report.satisfied:
        raise StabilityError(report.message())
    return report


def assemble_step_matrix(grid, coeffs):
    """Backward-Euler step matrix ``A`` over all nodes m = 0..M.

    Interior rows: ``e = 1 + a dt/dx^2 + c dt``,
    ``d = b dt/(2dx) - a dt/(2dx^2)`` (upper), ``f = -b dt/(2dx) - a dt/(2dx^2)`` (lower).
    """
    dx, dt = grid.dx, grid.dt
    a, b, c = coeffs.at(grid.x)
    diff = a * dt / (2.0 * dx * dx)
    adv = b * dt / (2.0 * dx)
    diag = 1.0 + 2.0 * diff + c * dt
    upper = adv - diff
    lower = -adv - diff
    diag[[0, -1]] = 1.0
    upper[[0, -1]] = 0.0
    lower[[0, -1]] = 0.0
    return TridiagonalSystem(lower, diag, upper, grid)


def apply_Lh(field, coeffs, n):
    """Discrete operator at level ``n`` on interior nodes:
    backward difference in time, centered differences in space.
    """
    grid = field.grid
    if not 1 <= n <= grid.N:
        raise ValueError(f"apply_Lh needs 1 <= n <= N, got n={n}")
    v, vp = field.values[n], field.values[n - 1]
    dx, dt = grid.dx, grid.dt
    x = grid.x[1:-1]
    a, b, c = coeffs.at(x)
    second = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dx * dx)
    first = (v[2:] - v[:-2]) / (2.0 * dx)
    return (v[1:-1] - vp[1:-1]) / dt - 0.5 * a * second + b * first + c * v[1:-1]
