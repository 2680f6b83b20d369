"""Errors against the stationary solution and refinement studies.

The reference at finite T is the stationary ``q``. At T = 3 the obstacle is
within ``exp(-33)`` of its limit, so what remains is mostly grid error.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .grid import make_grid
from .iteration import iterate
from .lcp import LCPOptions
from .operator import check_stability

__all__ = [
    "ErrorReport",
    "OrderRow",
    "OrderStudy",
    "StudyRunError",
    "error_at_time",
    "order_study",
    "refinement_ladder",
    "write_error_csv",
    "write_order_csv",
]

log = logging.getLogger(__name__)


class StudyRunError(RuntimeError):
    """A single resolution of a study failed; ``resolution`` is the (M, N) pair."""

    def __init__(self, message, resolution):
        super().__init__(message)
        self.resolution = resolution


@dataclass(frozen=True)
class ErrorReport:
    """Per-node error ``u(t_n, x) - oracle(x)`` at the level nearest to ``time``."""

    time: float
    level: int
    x: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    max_error: float
    l2_error: float


def error_at_time(u, oracle, t):
    """Compare the level nearest to ``t`` with ``oracle(x)``.

    ``l2_error`` uses trapezoid weights on [-a, a], so it never exceeds
    ``max_error * sqrt(2a)``.
    """
    grid = u.grid
    n = grid.level_at(t)
    x = grid.x
    try:
        ref = np.broadcast_to(np.asarray(oracle(x), dtype=float), x.shape)
    except (TypeError, ValueError):
        ref = np.array([float(oracle(xm)) for xm in x])
    err = u.values[n] - ref
    if not np.all(np.isfinite(err)):
        raise ValueError(f"non-finite error at t={t}")
    l2 = math.sqrt(float(np.trapezoid(err * err, x)))
    return ErrorReport(float(grid.t[n]), n, x.copy(), err, float(np.max(np.abs(err))), l2)


@dataclass(frozen=True)
class OrderRow:
    M: int
    N: int
    dx: float
    dt: float
    max_error: float
    observed_order: float  # nan on the coarsest row
    outer_iterations: int


@dataclass
class OrderStudy:
    rows: List[OrderRow]

    @property
    def errors(self):
        return [row.max_error for row in self.rows]

    @property
    def finest_order(self):
        return self.rows[-1].observed_order if len(self.rows) > 1 else math.nan

    def strictly_decreasing(self):
        e = self.errors
        return all(a > b for a, b in zip(e, e[1:]))


def refinement_ladder(M0, N0, levels, tie="dx2"):
    """``levels`` resolutions halving dx from ``(M0, N0)``.

    ``tie="dx2"`` multiplies N by 4 per level (dt proportional to dx^2),
    ``tie="dx"`` by 2.
    """
    factor = {"dx2": 4, "dx": 2}.get(tie)
    if factor is None:
        raise ValueError(f"tie must be 'dx2' or 'dx', got {tie!r}")
    return [(M0 * 2**i, N0 * factor**i) for i in range(levels)]


def order_study(problem, resolutions, t=None, lcp=LCPOptions(), allow_unstable=False, **iterate_kw):
    """Run :func:`~bubblefd.iteration.iterate` at each ``(M, N)`` and compare with ``q`` at ``t``.

    Parameters
    ----------
    resolutions : sequence of (M, N)
        Must have strictly decreasing dx.
    t : float, optional
        Comparison time, default ``problem.T``.
    allow_unstable : bool
        Let resolutions that violate the stability condition run. Stable
        resolutions are solved as usual either way.

    The observed order between rows i and i+1 is
    ``log(e_i/e_{i+1}) / log(dx_i/dx_{i+1})`` (``log2`` of the error ratio
    when dx halves).
    """
    resolutions = [(int(M), int(N)) for M, N in resolutions]
    if not resolutions:
        raise ValueError("need at least one resolution")
    dxs = [2.0 * problem.a / M for M, _ in resolutions]
    if any(d1 <= d2 for d1, d2 in zip(dxs, dxs[1:])):
        raise ValueError(f"resolutions must have strictly decreasing dx, got {resolutions}")
    t = problem.T if t is None else t
    model = problem.stationary()
    coeffs = problem.coeffs
    rows = []
    for M, N in resolutions:
        grid = make_grid(problem.a, problem.T, M, N)
        unstable = not check_stability(grid, coeffs).satisfied
        try:
            rep = iterate(problem, grid, lcp=lcp, allow_unstable=allow_unstable and unstable, **iterate_kw)
        except (ArithmeticError, ValueError) as exc:
            raise StudyRunError(f"resolution (M={M}, N={N}): {exc}", (M, N)) from exc
        err = error_at_time(rep.final, model.q, t).max_error
        if rows:
            prev = rows[-1]
            order = math.log(prev.max_error / err) / math.log(prev.dx / grid.dx)
        else:
            order = math.nan
        log.info("M=%d N=%d: error %.3e, K=%d", M, N, err, rep.K)
        rows.append(OrderRow(M, N, grid.dx, grid.dt, err, order, rep.K))
    return OrderStudy(rows)


def _fmt(v):
    return "%.17g" % v


def write_error_csv(path, report):
    """Columns ``t,x,error``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "error"])
        for xm, e in zip(report.x, report.errors):
            w.writerow([_fmt(report.time), _fmt(xm), _fmt(e)])


def write_order_csv(path, study):
    """Columns ``dx,dt,max_error,observed_order`` (order is ``nan`` on the first row)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dx", "dt", "max_error", "observed_order"])
        for row in study.rows:
            w.writerow([_fmt(row.dx), _fmt(row.dt), _fmt(row.max_error), _fmt(row.observed_order)])
