"""Special functions used by the spectral profiles and the transforms.

Everything here is implemented from series, continued fractions and
recurrences so that every digit can be traced back to code in this package.
All functions accept scalars or numpy arrays and return the same shape.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SQRT_PI = 1.7724538509055160273

_TINY = 1e-300


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(out, scalar):
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# exponential integral
# ---------------------------------------------------------------------------

def _e1_series(z):
    # E1(z) = -gamma - ln z - sum_{n>=1} (-z)^n / (n n!)
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(1, 60):
        term = term * (-z) / n
        total += term / n
    return -EULER_GAMMA - np.log(z) - total


def _e1_contfrac(z):
    # modified Lentz on E1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    b = z + 1.0
    c = np.full_like(z, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 300):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return h * np.exp(-z)


def expint_e1(z):
    """Exponential integral E1(z) for z > 0."""
    z, scalar = _as_array(z)
    if np.any(z <= 0) or np.any(np.isnan(z)):
        raise ValueError("expint_e1 requires z > 0")
    out = np.empty_like(z)
    small = z <= 1.0
    if np.any(small):
        out[small] = _e1_series(z[small])
    if np.any(~small):
        out[~small] = _e1_contfrac(z[~small])
    return _ret(out, scalar)


def ei(x):
    """Exponential integral Ei(x) for negative arguments.

    Only x < 0 is supported; ``Ei(x) = -E1(-x)``.  Raises ``ValueError`` for
    ``x >= 0``.  ``Ei(-inf)`` is returned as ``0``.
    """
    x, scalar = _as_array(x)
    if np.any(x >= 0) or np.any(np.isnan(x)):
        raise ValueError("ei is only defined here for x < 0")
    out = np.zeros_like(x)
    finite = np.isfinite(x)
    if np.any(finite):
        out[finite] = -expint_e1(-x[finite])
    return _ret(out, scalar)


# ---------------------------------------------------------------------------
# error function
# ---------------------------------------------------------------------------

def _erf_series(x):
    # erf(x) = 2/sqrt(pi) x e^{-x^2} sum_n (2x^2)^n / (2n+1)!!  -- all terms positive
    x2 = x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(1, 200):
        term = term * 2.0 * x2 / (2 * n + 1)
        total += term
        if np.all(term < 1e-17 * total):
            break
    return 2.0 / SQRT_PI * x * np.exp(-x2) * total


def _erfc_contfrac(x):
    # erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    d = np.zeros_like(x)
    f = x.copy()
    c = x.copy()
    for i in range(1, 500):
        an = 0.5 * i
        d = 1.0 / (x + an * d)
        c = x + an / c
        delta = c * d
        f *= delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-x * x) / (SQRT_PI * f)


_ERF_SWITCH = 3.0


def erfc(x):
    """Complementary error function, accurate in relative terms for large x."""
    x, scalar = _as_array(x)
    out = np.empty_like(x)
    ax = np.abs(x)
    big = ax > _ERF_SWITCH
    if np.any(~big):
        out[~big] = 1.0 - np.sign(x[~big]) * _erf_series(ax[~big])
    if np.any(big):
        tail = _erfc_contfrac(ax[big])
        out[big] = np.where(x[big] > 0, tail, 2.0 - tail)
    return _ret(out, scalar)


def erf(x):
    """Error function; odd, |error| below 1e-14 on the real line."""
    x, scalar = _as_array(x)
    out = np.empty_like(x)
    ax = np.abs(x)
    big = ax > _ERF_SWITCH
    if np.any(~big):
        out[~big] = _erf_series(ax[~big])
    if np.any(big):
        out[big] = 1.0 - _erfc_contfrac(ax[big])
    out = np.sign(x) * out
    return _ret(out, scalar)


# ---------------------------------------------------------------------------
# incomplete gamma at half-integer order
# ---------------------------------------------------------------------------

def gamma_half(j):
    """Gamma(j + 1/2) for a non-negative integer j."""
    if j < 0 or int(j) != j:
        raise ValueError("j must be a non-negative integer")
    return math.gamma(j + 0.5)


def upper_gamma_half(j, x):
    """Upper incomplete gamma function Gamma(j + 1/2, x).

    Built from ``Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x))`` and the upward
    recurrence ``Gamma(a + 1, x) = a Gamma(a, x) + x^a e^{-x}``, in which
    every term is positive.
    """
    if j < 0 or int(j) != j:
        raise ValueError("j must be a non-negative integer")
    x, scalar = _as_array(x)
    if np.any(x < 0):
        raise ValueError("upper_gamma_half requires x >= 0")
    sx = np.sqrt(x)
    val = SQRT_PI * erfc(sx)
    ex = np.exp(-x)
    a = 0.5
    for _ in range(int(j)):
        val = a * val + x ** a * ex
        a += 1.0
    return _ret(np.asarray(val, dtype=float), scalar)


# ---------------------------------------------------------------------------
# Bessel functions J0, J1
# ---------------------------------------------------------------------------

_SERIES_MAX = 6.0
_MILLER_MAX = 25.0
_MILLER_START = 70


def _bessel_series(x, nu):
    # J_nu(x) = sum_k (-1)^k (x/2)^{2k+nu} / (k! (k+nu)!)
    q = -(x * x) / 4.0
    term = np.ones_like(x) if nu == 0 else x / 2.0
    total = term.copy()
    for k in range(1, 40):
        term = term * q / (k * (k + nu))
        total += term
    return total


def _bessel_miller(x):
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}; normalised with
    # J0 + 2 sum_k J_{2k} = 1
    n = _MILLER_START
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j1 = np.zeros_like(x)
    for k in range(n, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        jp1, jk = jk, jm1
        # jk now holds J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * jk
        if k - 1 == 1:
            j1 = jk.copy()
        big = np.abs(jk) > 1e250
        if np.any(big):
            s = np.where(big, 1e-250, 1.0)
            jk *= s
            jp1 *= s
            norm *= s
            j1 *= s
    norm += jk
    return jk / norm, j1 / norm


def _hankel_coeffs(nu, nterms):
    mu = 4.0 * nu * nu
    coeffs = [1.0]
    for k in range(1, nterms):
        coeffs.append(coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return coeffs


_HANKEL = {nu: _hankel_coeffs(nu, 24) for nu in (0, 1)}


def _bessel_asymptotic(x, nu):
    a = _HANKEL[nu]
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    inv = 1.0 / x
    for k in range(len(a)):
        t = a[k] * inv ** k
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * t
        else:
            q += sign * t
    c, s = np.cos(x), np.sin(x)
    if nu == 0:
        cchi, schi = (c + s) / math.sqrt(2.0), (s - c) / math.sqrt(2.0)
    else:
        cchi, schi = (s - c) / math.sqrt(2.0), -(s + c) / math.sqrt(2.0)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cchi - q * schi)


def _bessel(x, nu):
    x, scalar = _as_array(x)
    if np.any(x < 0):
        raise ValueError("Bessel functions are implemented for x >= 0 only")
    out = np.empty_like(x)
    lo = x <= _SERIES_MAX
    mid = (x > _SERIES_MAX) & (x <= _MILLER_MAX)
    hi = x > _MILLER_MAX
    if np.any(lo):
        out[lo] = _bessel_series(x[lo], nu)
    if np.any(mid):
        j0, j1 = _bessel_miller(x[mid])
        out[mid] = j0 if nu == 0 else j1
    if np.any(hi):
        out[hi] = _bessel_asymptotic(x[hi], nu)
    return _ret(out, scalar)


def bessel_j0(x):
    """Bessel function J0 for x >= 0 (absolute error below 1e-13 up to 1e4)."""
    return _bessel(x, 0)


def bessel_j1(x):
    """Bessel function J1 for x >= 0; needed by the 2D phase kernel."""
    return _bessel(x, 1)
