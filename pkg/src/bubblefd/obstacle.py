"""Time marching of parabolic obstacle problems ``min(L_h u, u - Psi) = 0``."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field
from .lcp import LCPError, LCPInstance, LCPOptions, complementarity_residual, solve_lcp
from .operator import assemble_step_matrix, require_stable

__all__ = ["BoundaryData", "ObstacleSolveError", "CompatibilityError", "solve_unconstrained", "solve_obstacle"]


class ObstacleSolveError(ArithmeticError):
    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class CompatibilityError(ValueError):
    """Boundary data fall below the obstacle where the constraint is imposed."""


@dataclass(frozen=True)
class BoundaryData:
    """Initial profile ``g(0, x)`` and lateral values ``g(t, -a)``, ``g(t, a)``."""

    initial: Callable
    left: Callable
    right: Callable

    @classmethod
    def from_function(cls, g, a):
        """Data taken from a single function ``g(t, x)`` on [-a, a]."""
        return cls(lambda x: g(0.0, x), lambda t: g(t, -a), lambda t: g(t, a))

    @classmethod
    def zero(cls):
        return cls(lambda x: 0.0 * np.asarray(x, dtype=float), lambda t: 0.0, lambda t: 0.0)

    def on_grid(self, grid, corner_tol=1e-12):
        """Return (initial row, left column, right column) with the corners checked."""
        init = np.broadcast_to(np.asarray(self.initial(grid.x), dtype=float), grid.x.shape).copy()
        left = np.array([float(self.left(t)) for t in grid.t])
        right = np.array([float(self.right(t)) for t in grid.t])
        if not (np.all(np.isfinite(init)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("boundary data must be finite on the grid")
        if abs(init[0] - left[0]) > corner_tol or abs(init[-1] - right[0]) > corner_tol:
            raise ValueError(
                f"corner mismatch: g(0,-a)={init[0]!r} vs left(0)={left[0]!r}, "
                f"g(0,a)={init[-1]!r} vs right(0)={right[0]!r}")
        return init, left, right


def _march(grid, coeffs, g, allow_unstable, level_solver):
    if not allow_unstable:
        require_stable(grid, coeffs)
    A = assemble_step_matrix(grid, coeffs)
    init, left, right = g.on_grid(grid)
    u = np.empty(grid.shape)
    u[0] = init
    u[0, 0], u[0, -1] = left[0], right[0]
    for n in range(1, grid.N + 1):
        u[n] = level_solver(A, n, u[n - 1], left[n], right[n])
    return Field(grid, u)


def solve_unconstrained(grid, coeffs, g, allow_unstable=False):
    """Solve ``L_h u = 0`` with Dirichlet data ``g`` (no obstacle)."""

    def level(A, n, prev, lval, rval):
        rhs = prev.copy()
        rhs[0], rhs[-1] = lval, rval
        out = A.solve(rhs)
        if not np.all(np.isfinite(out)):
            raise ObstacleSolveError(f"singular step system at level {n}", level=n)
        out[0], out[-1] = lval, rval
        return out

    return _march(grid, coeffs, g, allow_unstable, level)


def _check_dominance(grid, g, psi, tol):
    init, left, right = g.on_grid(grid)
    bad = np.nonzero(init < psi[0] - tol)[0]
    if bad.size:
        raise CompatibilityError(f"initial data below the obstacle at x={grid.x[bad[0]]:.6g}")
    for side, vals, col in (("x=-a", left, psi[:, 0]), ("x=a", right, psi[:, -1])):
        bad = np.nonzero(vals < col - tol)[0]
        if bad.size:
            n = int(bad[0])
            raise CompatibilityError(f"boundary data below the obstacle on {side} at level n={n} "
                                     f"(t={grid.t[n]:.6g})")


def solve_obstacle(grid, coeffs, g, Psi, lcp=LCPOptions(), allow_unstable=False, check_compat=True,
                   compat_tol=1e-12):
    """March ``min(L_h u, u - Psi) = 0`` level by level.

    The obstacle is taken at the new level. Each level is warm-started from
    the previous one. ``g`` must dominate ``Psi`` on the parabolic boundary
    unless ``check_compat`` is False, in which case the constraint is imposed
    on interior nodes of levels n >= 1 only and boundary nodes keep their
    Dirichlet values.

    Raises
    ------
    CompatibilityError
        If ``g < Psi`` on the parabolic boundary.
    ObstacleSolveError
        If the LCP solver fails; ``.level`` holds the time index.
    """
    if Psi.grid != grid:
        raise ValueError("obstacle field lives on a different grid")
    psi = Psi.values
    if check_compat:
        _check_dominance(grid, g, psi, compat_tol)

    def level(A, n, prev, lval, rval):
        obst = psi[n].copy()
        obst[0], obst[-1] = min(obst[0], lval), min(obst[-1], rval)
        inst = LCPInstance(A, prev, obst, lval, rval)
        try:
            out = solve_lcp(inst, lcp, x0=np.maximum(prev, obst), check=not allow_unstable)
        except LCPError as exc:
            raise ObstacleSolveError(f"LCP failed at level n={n}: {exc}", level=n) from exc
        if lcp.method == "brennan-schwartz":
            res = complementarity_residual(inst, out)
            if res > lcp.tol:
                raise ObstacleSolveError(f"complementarity residual {res:.3e} at level n={n}", level=n)
        return out

    return _march(grid, coeffs, g, allow_unstable, level)
