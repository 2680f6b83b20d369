"""Compiled inner loops for the tridiagonal solvers.

Arrays follow one convention: ``lower[i]`` multiplies ``u[i-1]``,
``upper[i]`` multiplies ``u[i+1]``; ``lower[0]`` and ``upper[-1]`` are ignored.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def thomas(lower, diag, upper, rhs):
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom if i < n - 1 else 0.0
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@njit(cache=True)
def residual_inf(lower, diag, upper, rhs, obstacle, u):
    """max over interior rows of |min(A u - q, u - psi)|."""
    n = diag.shape[0]
    worst = 0.0
    for i in range(1, n - 1):
        au = lower[i] * u[i - 1] + diag[i] * u[i] + upper[i] * u[i + 1] - rhs[i]
        gap = u[i] - obstacle[i]
        r = abs(min(au, gap))
        if r > worst:
            worst = r
    return worst


@njit(cache=True)
def psor(lower, diag, upper, rhs, obstacle, u, omega, tol, max_iter):
    """Projected SOR on interior rows; boundary entries of ``u`` stay fixed.

    Returns (iterations, final residual); ``u`` is updated in place.
    """
    n = diag.shape[0]
    for i in range(1, n - 1):
        if u[i] < obstacle[i]:
            u[i] = obstacle[i]
    res = residual_inf(lower, diag, upper, rhs, obstacle, u)
    it = 0
    while res > tol and it < max_iter:
        for i in range(1, n - 1):
            gs = (rhs[i] - lower[i] * u[i - 1] - upper[i] * u[i + 1]) / diag[i]
            v = u[i] + omega * (gs - u[i])
            u[i] = v if v > obstacle[i] else obstacle[i]
        it += 1
        res = residual_inf(lower, diag, upper, rhs, obstacle, u)
    return it, res


@njit(cache=True)
def brennan_schwartz_right(lower, diag, upper, rhs, obstacle, left, right):
    """Direct LCP solve for a contact set that is an interval touching the right end.

    Forward elimination over the interior, then back substitution from the
    right with projection onto the obstacle.
    """
    n = diag.shape[0]
    m = n - 2
    d = np.empty(m)
    y = np.empty(m)
    for j in range(m):
        i = j + 1
        q = rhs[i]
        if i == 1:
            q -= lower[i] * left
        if i == n - 2:
            q -= upper[i] * right
        if j == 0:
            d[j] = diag[i]
            y[j] = q
        else:
            factor = lower[i] / d[j - 1]
            d[j] = diag[i] - factor * upper[i - 1]
            y[j] = q - factor * y[j - 1]
    u = np.empty(n)
    u[0] = left
    u[n - 1] = right
    for j in range(m - 1, -1, -1):
        i = j + 1
        val = y[j]
        if j < m - 1:
            val -= upper[i] * u[i + 1]
        val /= d[j]
        u[i] = val if val > obstacle[i] else obstacle[i]
    return u
