"""Special functions needed by the closed-form stationary solution.

Kummer's function M (1F1) is summed from its power series. Tricomi's
function U is taken from its Laplace-type integral when ``a > 0``, except
for ``b >= 1`` at small z where that integral converges too slowly. The
connection formula through M cancels two terms of size ~e^z and loses
digits as ``a z`` grows, so it is kept for the remaining cases.
"""

import math

from scipy import integrate

__all__ = [
    "gamma_fn",
    "rgamma",
    "erf_fn",
    "expint_nu",
    "kummer_m",
    "kummer_m_prime",
    "tricomi_u",
    "tricomi_u_prime",
]

_EPS = 1e-17
_MAX_TERMS = 10_000
_EULER = 0.57721566490153286061
# below this z, and for b >= 1, the tail t^(b-2) of the U integral is too heavy for quad
_U_INTEGRAL_MIN_Z = 0.1


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def gamma_fn(x):
    """Gamma function; raises at the poles 0, -1, -2, ..."""
    if _is_nonpositive_integer(x):
        raise ValueError(f"gamma_fn has a pole at {x}")
    return math.gamma(x)


def rgamma(x):
    """Reciprocal gamma function, zero at the poles of gamma."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / math.gamma(x)


def erf_fn(x):
    return math.erf(x)


def expint_nu(nu, x):
    r"""Generalized exponential integral :math:`E_\nu(x)=\int_1^\infty e^{-xt}t^{-\nu}dt`.

    Parameters
    ----------
    nu : float
        Order, ``nu > 1``.
    x : float
        Argument, ``x >= 0``.
    """
    if not nu > 1.0:
        raise ValueError(f"expint_nu requires nu > 1, got {nu}")
    if x < 0.0:
        raise ValueError(f"expint_nu requires x >= 0, got {x}")
    if x == 0.0:
        return 1.0 / (nu - 1.0)
    if x > 1.0:
        return _expint_continued_fraction(nu, x)
    if float(nu).is_integer():
        return _expint_series_integer(int(nu), x)
    if abs(nu - round(nu)) < 1e-3:
        # the two series pieces blow up near integer orders
        val, _ = integrate.quad(lambda t: math.exp(-x * t) * t ** -nu, 1.0, math.inf,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        return val
    total = gamma_fn(1.0 - nu) * x ** (nu - 1.0)
    term = 1.0  # (-x)^k / k!
    for k in range(_MAX_TERMS):
        piece = term / (k + 1.0 - nu)
        total -= piece
        if abs(piece) < _EPS * abs(total):
            return total
        term *= -x / (k + 1)
    raise ArithmeticError(f"expint_nu series did not converge at nu={nu}, x={x}")


def _expint_continued_fraction(nu, x):
    # modified Lentz evaluation, valid for x > 0 and any real order
    tiny = 1e-300
    b = x + nu
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (nu - 1.0 + i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-x)
    raise ArithmeticError(f"expint_nu continued fraction did not converge at x={x}")


def _expint_series_integer(n, x):
    nm1 = n - 1
    total = 1.0 / nm1
    fact = 1.0
    for i in range(1, _MAX_TERMS):
        fact *= -x / i
        if i != nm1:
            delta = -fact / (i - nm1)
        else:
            psi = -_EULER + sum(1.0 / j for j in range(1, nm1 + 1))
            delta = fact * (-math.log(x) + psi)
        total += delta
        if abs(delta) < abs(total) * _EPS:
            return total
    raise ArithmeticError(f"expint_nu series did not converge at n={n}, x={x}")


def kummer_m(a, b, z):
    r"""Kummer's confluent hypergeometric function
    :math:`M(a,b,z)=\sum_n (a)_n z^n / ((b)_n n!)`.
    """
    if _is_nonpositive_integer(b):
        raise ValueError(f"kummer_m undefined for b = {b}")
    total = 1.0
    term = 1.0
    for n in range(_MAX_TERMS):
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        # past n > -a the terms no longer change sign
        if n + 1 > -a and abs(term) <= _EPS * abs(total):
            return total
        if term == 0.0:
            return total
    raise ArithmeticError(f"kummer_m series did not converge for a={a}, b={b}, z={z}")


def kummer_m_prime(a, b, z):
    """d/dz M(a, b, z) = (a/b) M(a+1, b+1, z)."""
    return a / b * kummer_m(a + 1.0, b + 1.0, z)


def tricomi_u(a, b, z):
    """Tricomi's confluent hypergeometric function U(a, b, z), ``z >= 0``."""
    if z < 0.0:
        raise ValueError(f"tricomi_u requires z >= 0, got {z}")
    if z == 0.0:
        if b >= 1.0:
            raise ValueError(f"tricomi_u(a, {b}, 0) is infinite for b >= 1")
        return gamma_fn(1.0 - b) * rgamma(a + 1.0 - b)
    if a > 0.0 and (b < 1.0 or z >= _U_INTEGRAL_MIN_Z):
        return _tricomi_u_integral(a, b, z)
    if float(b).is_integer():
        raise ValueError(f"tricomi_u series form needs non-integer b, got {b}")
    first = gamma_fn(1.0 - b) * rgamma(a - b + 1.0)
    second = gamma_fn(b - 1.0) * rgamma(a)
    value = 0.0
    if first != 0.0:
        value += first * kummer_m(a, b, z)
    if second != 0.0:
        value += second * z ** (1.0 - b) * kummer_m(a - b + 1.0, 2.0 - b, z)
    return value


def _tricomi_u_integral(a, b, z):
    # U(a,b,z) = 1/Gamma(a) * int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt, a > 0
    p = b - a - 1.0
    head, _ = integrate.quad(lambda t: math.exp(-z * t) * (1.0 + t) ** p, 0.0, 1.0,
                             weight="alg", wvar=(a - 1.0, 0.0),
                             epsabs=0.0, epsrel=2e-14, limit=200)
    tail, _ = integrate.quad(lambda t: math.exp(-z * t) * t ** (a - 1.0) * (1.0 + t) ** p,
                             1.0, math.inf, epsabs=0.0, epsrel=2e-14, limit=200)
    return (head + tail) / math.gamma(a)


def tricomi_u_prime(a, b, z):
    """d/dz U(a, b, z) = -a U(a+1, b+1, z)."""
    return -a * tricomi_u(a + 1.0, b + 1.0, z)
