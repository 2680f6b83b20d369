"""Closed-form stationary bubble solution.

The stationary problem ``min(Mq, q(x) - q(-x) - x/(r+lam) + c) = 0`` with
``Mq = -sigma^2/2 q'' + rho x q' + r q`` is solved in closed form through the
function ``h``, the solution of ``Mh = 0`` that vanishes at minus infinity.
The free boundary ``k*`` is the smooth-fit point to the right of which the
non-local constraint binds.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .special import erf_fn, expint_nu, gamma_fn, kummer_m, kummer_m_prime, rgamma, tricomi_u, tricomi_u_prime

__all__ = [
    "StationaryModel",
    "EXAMPLE_PARAMS",
    "h_eval",
    "h_prime",
    "free_boundary_residual",
    "simplified_boundary_residual",
    "free_boundary_k",
    "cubic_root",
    "cubic_poly",
    "q_exact",
    "u_exact_example",
]

EXAMPLE_PARAMS = dict(r=10.0, rho=5.0, sigma=1.0, lam=1.0, c=0.001)


def _elementwise(func):
    """Let a scalar function of ``x`` (last positional argument) accept arrays."""

    @functools.wraps(func)
    def wrapper(*args):
        *head, x = args
        if np.ndim(x) == 0:
            return func(*head, float(x))
        arr = np.asarray(x, dtype=float)
        out = np.empty_like(arr)
        for idx, xi in np.ndenumerate(arr):
            out[idx] = func(*head, float(xi))
        return out

    return wrapper


@dataclass(frozen=True)
class _HParams:
    r: float
    rho: float
    sigma: float

    @property
    def alpha(self):
        return self.r / (2.0 * self.rho)

    def z(self, x):
        return self.rho * x * x / self.sigma**2


@dataclass(frozen=True)
class StationaryModel:
    """Stationary model parameters with the derived free boundary and coefficient.

    ``k_star`` and ``b`` are computed at construction.
    """

    r: float
    rho: float
    sigma: float
    lam: float
    c: float
    search_upper: float = 2.0
    k_star: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        for name in ("r", "rho", "sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lam < 0 or self.c < 0:
            raise ValueError("lam and c must be non-negative")
        k = free_boundary_k(self.r, self.rho, self.sigma, self.lam, self.c, upper=self.search_upper)
        object.__setattr__(self, "k_star", k)
        hp = _HParams(self.r, self.rho, self.sigma)
        slope = _h_prime(hp, k) + _h_prime(hp, -k)
        object.__setattr__(self, "b", _h(hp, -k) / ((self.r + self.lam) * slope))

    @classmethod
    def example(cls):
        return cls(**EXAMPLE_PARAMS)

    @property
    def _hp(self):
        return _HParams(self.r, self.rho, self.sigma)

    def h(self, x):
        return h_eval(self, x)

    def h_prime(self, x):
        return h_prime(self, x)

    def q(self, x):
        return q_exact(self, x)

    def psi_inf(self, x):
        """Stationary obstacle x/(r+lam) - c."""
        return np.asarray(x) / (self.r + self.lam) - self.c


def _h(hp, x):
    a = hp.alpha
    z = hp.z(x)
    u = tricomi_u(a, 0.5, z)
    if x <= 0.0:
        return u
    return 2.0 * math.pi / (gamma_fn(0.5 + a) * gamma_fn(0.5)) * kummer_m(a, 0.5, z) - u


def _h_prime(hp, x):
    a = hp.alpha
    if x == 0.0:
        # limit of the odd part: -Gamma(-1/2)/Gamma(a) * sqrt(rho)/sigma
        return 2.0 * math.sqrt(math.pi) * rgamma(a) * math.sqrt(hp.rho) / hp.sigma
    z = hp.z(x)
    dz_dx = 2.0 * hp.rho * x / hp.sigma**2
    du = tricomi_u_prime(a, 0.5, z)
    if x < 0.0:
        return du * dz_dx
    coef = 2.0 * math.pi / (gamma_fn(0.5 + a) * gamma_fn(0.5))
    return (coef * kummer_m_prime(a, 0.5, z) - du) * dz_dx


def _h_second(hp, x):
    # from Mh = 0
    return 2.0 * (hp.rho * x * _h_prime(hp, x) + hp.r * _h(hp, x)) / hp.sigma**2


@_elementwise
def h_eval(model, x):
    """Decaying solution of ``Mh = 0``, piecewise in U and M."""
    return _h(_HParams(model.r, model.rho, model.sigma), x)


@_elementwise
def h_prime(model, x):
    """Derivative of ``h`` from the differentiated series, chain rule through z."""
    return _h_prime(_HParams(model.r, model.rho, model.sigma), x)


def free_boundary_residual(r, rho, sigma, lam, c, k):
    """Smooth-fit equation ``[k - c(r+lam)][h'(k)+h'(-k)] - h(k) + h(-k)``."""
    hp = _HParams(r, rho, sigma)
    return (k - c * (r + lam)) * (_h_prime(hp, k) + _h_prime(hp, -k)) - _h(hp, k) + _h(hp, -k)


def simplified_boundary_residual(r, rho, sigma, lam, c, k):
    """Reduced smooth-fit equation written with U(., 1/2, .) and U(., 3/2, .).

    Its root coincides with that of :func:`free_boundary_residual` when
    ``r = 2 rho`` (the reference example); for other parameters it does not.
    """
    a = 0.5 * (r / rho - 1.0)
    z = k * k * rho / sigma**2
    s = c * (lam + r)
    first = tricomi_u(a, 0.5, z) * (2.0 * k * k * rho**2 * (k - s) + sigma**2 * (s * (rho - r) + k * (r - 2.0 * rho)))
    if r == 2.0 * rho:
        return first
    return first + k * (r - 2.0 * rho) * tricomi_u(a, 1.5, z) * (2.0 * k * rho * (k - s) - sigma**2)


def free_boundary_k(r, rho, sigma, lam, c, upper=2.0, scan=400):
    """Free boundary point k* in [0, upper).

    A uniform scan brackets the first sign change, bisection narrows it and
    Newton steps polish it. ``c = 0`` gives ``k* = 0``.

    Raises
    ------
    ArithmeticError
        If no sign change is found in ``(0, upper)``.
    """
    if c == 0.0:
        return 0.0
    hp = _HParams(r, rho, sigma)

    def f(k):
        return free_boundary_residual(r, rho, sigma, lam, c, k)

    def fprime(k):
        return (k - c * (r + lam)) * (_h_second(hp, k) - _h_second(hp, -k))

    lo, flo = 0.0, f(0.0)
    hi = None
    for k in np.linspace(0.0, upper, scan + 1)[1:]:
        fk = f(k)
        if fk == 0.0:
            return float(k)
        if np.sign(fk) != np.sign(flo):
            hi = float(k)
            break
        lo, flo = float(k), fk
    if hi is None:
        raise ArithmeticError(f"no sign change of the free-boundary equation in (0, {upper})")
    while hi - lo > 1e-10 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    for _ in range(5):
        d = fprime(k)
        if d == 0.0:
            break
        step = f(k) / d
        k_new = k - step
        if not lo - 1e-9 <= k_new <= hi + 1e-9:
            break
        k = k_new
        if abs(step) < 1e-16:
            break
    return k


def cubic_poly(k):
    return 10000.0 * k**3 - 110.0 * k**2 - 11.0


def cubic_root(tol=1e-12):
    """Real root of 10000 k^3 - 110 k^2 - 11 in (0, 1) by bisection.

    This is the free boundary for the reference parameters
    (r=10, rho=5, sigma=1, lam=1, c=0.001).
    """
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cubic_poly(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@_elementwise
def q_exact(model, x):
    """Exact stationary solution q(x)."""
    hp = model._hp
    k = model.k_star
    scale = model.b / _h(hp, -k)
    if x < k:
        return scale * _h(hp, x)
    return x / (model.r + model.lam) + scale * _h(hp, -x) - model.c


def _u_example(x, k):
    s5p = math.sqrt(5.0 * math.pi)
    pref = math.exp(5.0 * x * x - 5.0 * k * k) / (s5p * (440.0 * k * k + 44.0))
    if x <= 0.0:
        return pref * expint_nu(1.5, 5.0 * x * x)
    if x <= k:
        return pref * 2.0 * (s5p * x * (erf_fn(math.sqrt(5.0) * x) + 1.0) + math.exp(-5.0 * x * x))
    return pref * expint_nu(1.5, 5.0 * x * x) + x / 11.0 - 0.001


def u_exact_example(x, k_star=None):
    """Closed form of the stationary solution for r=10, rho=5, sigma=1, lam=1, c=0.001.

    Written with E_{3/2} and erf; branches x <= 0, 0 < x <= k*, x > k*.
    """
    k = cubic_root() if k_star is None else k_star
    if np.ndim(x) == 0:
        return _u_example(float(x), k)
    arr = np.asarray(x, dtype=float)
    return np.array([_u_example(float(v), k) for v in arr.ravel()]).reshape(arr.shape)
