"""Uniform space-time lattice on [0, T] x [-a, a] and fields living on it."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Grid", "Field", "make_grid", "sample", "reflect", "write_field_csv", "read_field_csv"]


@dataclass(frozen=True)
class Grid:
    """Nodes ``x_m = -a + m dx`` (m = 0..M) and ``t_n = n dt`` (n = 0..N)."""

    a: float
    T: float
    M: int
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"half-width a must be positive, got {self.a}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N}")

    @property
    def dx(self):
        return 2.0 * self.a / self.M

    @property
    def dt(self):
        return self.T / self.N

    @property
    def x(self):
        x = -self.a + self.dx * np.arange(self.M + 1)
        # exact endpoints and exact mirror symmetry of the node set
        x[-1] = self.a
        return 0.5 * (x - x[::-1])

    @property
    def t(self):
        t = self.dt * np.arange(self.N + 1)
        t[-1] = self.T
        return t

    @property
    def shape(self):
        return (self.N + 1, self.M + 1)

    def level_at(self, t):
        """Index of the time level nearest to ``t``; raises outside [0, T]."""
        slack = 1e-9 * self.T
        if t < -slack or t > self.T + slack:
            raise ValueError(f"time {t} is outside the horizon [0, {self.T}]")
        return int(np.clip(round(t / self.dt), 0, self.N))


def make_grid(a, T, M, N):
    return Grid(float(a), float(T), int(M), int(N))


@dataclass(frozen=True, eq=False)
class Field:
    """Values on every node, indexed ``values[n, m]``. Read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def level(self, n):
        return self.values[n]

    def __sub__(self, other):
        return Field(self.grid, self.values - other.values)

    def __add__(self, other):
        return Field(self.grid, self.values + other.values)


def sample(grid, f):
    """Evaluate ``f(t, x)`` on every node.

    ``f`` is first called with broadcastable arrays; if it does not
    broadcast it is called node by node.
    """
    tt, xx = np.meshgrid(grid.t, grid.x, indexing="ij")
    try:
        vals = np.broadcast_to(np.asarray(f(tt, xx), dtype=float), grid.shape)
    except (TypeError, ValueError):
        vals = np.array([[f(t, x) for x in grid.x] for t in grid.t], dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise ValueError(f"non-finite value at node (n={bad[0]}, m={bad[1]})")
    return Field(grid, vals)


def reflect(field):
    """Mirror in space: ``out[n, m] = in[n, M - m]``, i.e. u(t, -x)."""
    return Field(field.grid, field.values[:, ::-1])


def write_field_csv(field, path):
    """Write ``t,x,u`` rows, n-major then m, at 17 significant digits."""
    grid = field.grid
    tt, xx = np.meshgrid(grid.t, grid.x, indexing="ij")
    table = np.column_stack([tt.ravel(), xx.ravel(), field.values.ravel()])
    np.savetxt(Path(path), table, fmt="%.17g", delimiter=",", header="t,x,u", comments="")


def read_field_csv(path, grid):
    table = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    if table.shape[0] != (grid.N + 1) * (grid.M + 1):
        raise ValueError(f"{path}: {table.shape[0]} rows do not match grid {grid.shape}")
    return Field(grid, table[:, 2].reshape(grid.shape))
