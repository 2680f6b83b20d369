"""One-level linear complementarity problems ``min(A u - q, u - psi) = 0``.

The unknowns are indexed 0..n-1; the first and last entries are Dirichlet
values, the complementarity conditions apply to interior rows only.
"""

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .operator import TridiagonalSystem

__all__ = [
    "LCPInstance",
    "LCPOptions",
    "PSORResult",
    "LCPError",
    "LCPConvergenceError",
    "MMatrixError",
    "solve_psor",
    "solve_brennan_schwartz",
    "solve_bruteforce",
    "active_sets",
    "solve_lcp",
    "complementarity_residual",
    "BRUTEFORCE_MAX_INTERIOR",
]

BRUTEFORCE_MAX_INTERIOR = 12


class LCPError(ArithmeticError):
    pass


class LCPConvergenceError(LCPError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class MMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class LCPOptions:
    method: str = "psor"
    tol: float = 1e-10
    omega: float = 1.5
    max_iter: int = 10_000

    def __post_init__(self):
        if self.method not in ("psor", "brennan-schwartz"):
            raise ValueError(f"lcp.method must be 'psor' or 'brennan-schwartz', got {self.method!r}")
        if not 0.0 < self.omega < 2.0:
            raise ValueError(f"lcp.omega must lie in (0, 2), got {self.omega}")
        if not self.tol > 0:
            raise ValueError(f"lcp.tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"lcp.max_iter must be a positive integer, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class LCPInstance:
    """``system`` with right-hand side ``rhs``, lower obstacle and boundary values.

    ``rhs[0]`` and ``rhs[-1]`` are overwritten with ``left`` and ``right``.
    """

    system: TridiagonalSystem
    rhs: np.ndarray
    obstacle: np.ndarray
    left: float
    right: float

    def __post_init__(self):
        n = self.system.size
        rhs = np.array(self.rhs, dtype=float)
        obstacle = np.array(self.obstacle, dtype=float)
        if rhs.shape != (n,) or obstacle.shape != (n,):
            raise ValueError(f"rhs and obstacle must have length {n}")
        rhs[0], rhs[-1] = self.left, self.right
        if not (np.all(np.isfinite(rhs)) and np.all(np.isfinite(obstacle))):
            raise ValueError("LCP data must be finite")
        if self.left < obstacle[0] - 1e-12 or self.right < obstacle[-1] - 1e-12:
            raise ValueError("boundary values must dominate the obstacle at both ends")
        rhs.setflags(write=False)
        obstacle.setflags(write=False)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "obstacle", obstacle)

    @property
    def size(self):
        return self.system.size

    def mirrored(self):
        """The same problem with the index order reversed."""
        s = self.system
        sys_r = TridiagonalSystem(s.upper[::-1], s.diag[::-1], s.lower[::-1])
        return LCPInstance(sys_r, self.rhs[::-1], self.obstacle[::-1], self.right, self.left)


class PSORResult(NamedTuple):
    solution: np.ndarray
    iterations: int
    residual: float


def _arrays(inst):
    s = inst.system
    return s.lower, s.diag, s.upper, inst.rhs, inst.obstacle


def _require_m_matrix(inst):
    if not inst.system.is_m_matrix():
        raise MMatrixError("system matrix is not an M-matrix (check the stability condition)")


def complementarity_residual(inst, u):
    """max over interior rows of ``|min(A u - q, u - psi)|``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (inst.size,):
        raise ValueError(f"u must have length {inst.size}")
    return float(_kernels.residual_inf(*_arrays(inst), u))


def solve_psor(inst, omega=1.5, tol=1e-10, max_iter=10_000, x0=None, check=True):
    """Projected SOR.

    Sweeps until the complementarity residual is at most ``tol``. The result
    satisfies ``u >= psi`` exactly on interior rows.

    Parameters
    ----------
    x0 : array, optional
        Starting guess (warm start); boundary entries are replaced by the
        Dirichlet values.
    check : bool
        Reject systems that are not M-matrices.
    """
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    if check:
        _require_m_matrix(inst)
    u = np.array(inst.obstacle if x0 is None else x0, dtype=float)
    u[0], u[-1] = inst.left, inst.right
    iterations, res = _kernels.psor(*_arrays(inst), u, float(omega), float(tol), int(max_iter))
    if res > tol:
        raise LCPConvergenceError(
            f"PSOR did not converge in {max_iter} sweeps (residual {res:.3e} > {tol:.1e})",
            residual=res, iterations=iterations)
    return PSORResult(u, int(iterations), float(res))


def solve_brennan_schwartz(inst, contact="auto", check=True, tol=None):
    """Direct solve assuming the contact set is an interval at one end.

    ``contact`` selects the end: ``"right"``, ``"left"`` or ``"auto"`` (try
    the right end, then the left, keep the one that is complementary).
    """
    if check:
        _require_m_matrix(inst)
    if contact == "right":
        return _kernels.brennan_schwartz_right(*_arrays(inst), float(inst.left), float(inst.right))
    if contact == "left":
        return solve_brennan_schwartz(inst.mirrored(), "right", check=False)[::-1].copy()
    if contact != "auto":
        raise ValueError(f"contact must be 'right', 'left' or 'auto', got {contact!r}")
    if tol is None:
        tol = 1e-9 * max(1.0, np.max(np.abs(inst.rhs)), np.max(np.abs(inst.obstacle)))
    best, best_res = None, np.inf
    for side in ("right", "left"):
        u = solve_brennan_schwartz(inst, side, check=False)
        res = complementarity_residual(inst, u)
        if res <= tol:
            return u
        if res < best_res:
            best, best_res = u, res
    raise LCPError(f"contact set is not an interval at either end (best residual {best_res:.3e})")


def active_sets(inst, tol=1e-10):
    """Enumerate interior contact sets; return every accepted ``(contact, u)`` pair.

    For a contact set S, ``u = psi`` on S and the remaining interior rows of
    ``A u = q`` are solved exactly. S is accepted when ``u >= psi - tol`` and
    ``A u - q >= -tol`` on every interior row.
    """
    n = inst.size
    interior = list(range(1, n - 1))
    if len(interior) > BRUTEFORCE_MAX_INTERIOR:
        raise ValueError(f"brute force limited to {BRUTEFORCE_MAX_INTERIOR} interior nodes, got {len(interior)}")
    A = inst.system.dense()
    q, psi = inst.rhs, inst.obstacle
    accepted = []
    for k in range(len(interior) + 1):
        for contact in itertools.combinations(interior, k):
            fixed = np.zeros(n, dtype=bool)
            fixed[[0, n - 1]] = True
            fixed[list(contact)] = True
            u = np.empty(n)
            u[0], u[-1] = inst.left, inst.right
            u[list(contact)] = psi[list(contact)]
            free = ~fixed
            if free.any():
                reduced = q[free] - A[np.ix_(free, fixed)] @ u[fixed]
                u[free] = np.linalg.solve(A[np.ix_(free, free)], reduced)
            slack = (A @ u - q)[1:-1]
            gap = (u - psi)[1:-1]
            if np.all(gap >= -tol) and np.all(slack >= -tol):
                accepted.append((contact, u))
    return accepted


def solve_bruteforce(inst, tol=1e-10):
    """Exact LCP solution by enumerating contact sets (testing oracle)."""
    accepted = active_sets(inst, tol)
    if not accepted:
        raise LCPError("no contact set satisfies both sign conditions")
    return accepted[0][1]


def solve_lcp(inst, options=LCPOptions(), x0=None, check=True):
    """Dispatch on ``options.method``."""
    if options.method == "psor":
        return solve_psor(inst, options.omega, options.tol, options.max_iter, x0=x0, check=check).solution
    u = solve_brennan_schwartz(inst, check=check, tol=options.tol)
    return u
