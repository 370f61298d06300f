"""Half-line Fourier and Hankel-type transforms of channel functions.

Conventions (``h`` is the already-subtracted momentum-space function)::

    cos_transform(h, x)          = (1/pi)   int_{kmin}^inf h(k) cos(kx) dk
    sin_transform(h, x)          = (1/pi)   int_{kmin}^inf h(k) sin(kx) dk
    radial_j0_transform(h, r)    = (1/2pi)  int_0^inf k h(k) J0(kr) dk
    radial_phase_transform(h, r) = -(1/4pi) int_0^inf k h(k) J1(kr) dk

The last one is the radial amplitude of a correlator of the form
``g(r) e^{i phi}`` whose momentum-space kernel is ``h(k) e^{i phi_k}``.

Two strategies are available.  ``OSCILLATION_ZEROS`` integrates one
separation at a time with adaptive Gauss-Legendre panels seeded at the zeros
of the kernel.  ``FIXED_PANELS`` uses a common node set for many separations,
which is how matrices are tabulated; its error is still checked by panel
halving.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .specfun import bessel_j0, bessel_j1


class QuadratureError(RuntimeError):
    """Raised when the requested accuracy could not be reached."""

    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class PanelStrategy(str, enum.Enum):
    OSCILLATION_ZEROS = "zeros"
    FIXED_PANELS = "fixed"


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy and panel settings.

    ``scale`` is the momentum scale on which the channel function varies
    (Lambda for every shipped profile); it seeds the panel layout so that no
    feature is skipped by a wide first panel.  ``k_max=None`` selects
    ``max(40 scale, min(50/x, 400 scale))``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    panel_strategy: PanelStrategy = PanelStrategy.OSCILLATION_ZEROS
    k_max: float = None
    ir_kmin: float = 0.0
    scale: float = 1.0
    order: int = 16
    max_panels: int = 400000

    def with_(self, **kw):
        return replace(self, **kw)


_NODES = {}


def _gauss(n):
    if n not in _NODES:
        _NODES[n] = np.polynomial.legendre.leggauss(n)
    return _NODES[n]


def _kernel(kind, k, x):
    kx = k * x
    if kind == "cos":
        return np.cos(kx)
    if kind == "sin":
        return np.sin(kx)
    if kind == "j0":
        return k * bessel_j0(kx)
    if kind == "j1":
        return k * bessel_j1(kx)
    if kind == "j1_over_r":
        # k J1(kr)/r, smooth at r = 0 where it equals k^2/2
        xb = np.broadcast_to(x, np.broadcast(k, x).shape)
        safe = np.where(xb > 0, xb, 1.0)
        return np.where(xb > 0, k * bessel_j1(np.abs(kx)) / safe, 0.5 * k * k)
    raise ValueError(kind)


_PREFACTOR = {"cos": 1.0 / math.pi, "sin": 1.0 / math.pi, "j0": 0.5 / math.pi,
              "j1": -0.25 / math.pi, "j1_over_r": -0.25 / math.pi}


def _kernel_zeros(kind, x, k_lo, k_hi):
    # no kernel has a zero below pi/(2x)
    if x <= 0 or k_hi * x < 0.5 * math.pi:
        return np.empty(0)
    if kind == "cos":
        m0, shift = 0, 0.5
    elif kind == "sin":
        m0, shift = 1, 0.0
    elif kind == "j0":
        m0, shift = 1, -0.25
    else:
        m0, shift = 1, 0.25
    m_hi = int(math.floor(k_hi * x / math.pi - shift)) + 1
    m = np.arange(m0, max(m_hi, m0) + 1)
    z = (m + shift) * math.pi / x
    return z[(z > k_lo) & (z < k_hi)]


def _seed_breaks(spec, k_lo, k_hi):
    s = spec.scale
    pts = [k_lo, k_hi]
    if k_lo > 0:
        top = min(s, k_hi)
        if top > k_lo:
            n = max(int(math.ceil(math.log2(top / k_lo))), 1)
            pts.extend(np.geomspace(k_lo, top, n + 1))
    else:
        pts.extend(s * 2.0 ** -np.arange(1, 8))
    pts.extend(np.arange(0.5 * s, min(k_hi, 40.0 * s), 0.5 * s))
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), k_lo, k_hi))
    return pts


def _panel_sums(h, kind, x, a, b, n):
    t, w = _gauss(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    k = mid[:, None] + half[:, None] * t[None, :]
    vals = np.asarray(h(k.ravel()), dtype=float).reshape(k.shape) * _kernel(kind, k, x)
    vw = vals * w[None, :]
    return vw.sum(axis=1) * half, np.abs(vw).sum(axis=1) * half


_ROUNDOFF = 16 * np.finfo(float).eps


def _adaptive(h, kind, x, spec):
    k_lo = spec.ir_kmin
    if spec.k_max is not None:
        k_hi = spec.k_max
    else:
        # 50/x is capped: shipped integrands are Gaussian-small well before 400 scale
        k_hi = max(40.0 * spec.scale, min(50.0 / x, 400.0 * spec.scale) if x > 0 else 0.0)
    if k_hi <= k_lo:
        return 0.0, 0.0
    breaks = np.union1d(_seed_breaks(spec, k_lo, k_hi), _kernel_zeros(kind, x, k_lo, k_hi))
    a, b = breaks[:-1], breaks[1:]
    n = spec.order
    done_val = 0.0
    done_err = 0.0
    while True:
        m = 0.5 * (a + b)
        whole, _ = _panel_sums(h, kind, x, a, b, n)
        left, mag_l = _panel_sums(h, kind, x, a, m, n)
        right, mag_r = _panel_sums(h, kind, x, m, b, n)
        fine = left + right
        # differences at the rounding level of a panel are not refinable; the
        # kernel at argument kx carries a relative rounding error ~ eps * kx
        noise = _ROUNDOFF * (1.0 + b * x) * (mag_l + mag_r)
        err = np.maximum(np.abs(whole - fine) - noise, 0.0)
        total = done_val + fine.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total)) / abs(_PREFACTOR[kind])
        total_err = done_err + err.sum()
        if total_err <= tol:
            return total * _PREFACTOR[kind], total_err * abs(_PREFACTOR[kind])
        # panels whose share of the error is small are frozen
        share = tol / max(len(a), 1) * 0.5
        keep = err <= share
        done_val += fine[keep].sum()
        done_err += err[keep].sum()
        if done_err > tol:
            # freezing overshoots only with a pathological distribution; refine all
            done_val -= fine[keep].sum()
            done_err -= err[keep].sum()
            keep[:] = False
        a_r, b_r, m_r = a[~keep], b[~keep], m[~keep]
        if 2 * len(a_r) + len(a) > spec.max_panels:
            raise QuadratureError("adaptive quadrature exceeded the panel budget",
                                  total_err * abs(_PREFACTOR[kind]))
        a = np.concatenate([a_r, m_r])
        b = np.concatenate([m_r, b_r])


def _fixed(h, kind, xs, spec):
    xs = np.asarray(xs, dtype=float)
    k_lo = spec.ir_kmin
    k_hi = spec.k_max if spec.k_max is not None else 40.0 * spec.scale
    breaks = _seed_breaks(spec, k_lo, k_hi)
    x_top = float(np.max(xs)) if xs.size else 0.0
    if x_top > 0:
        width = math.pi / x_top
        extra = []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            cnt = int(math.ceil((hi - lo) / width))
            if cnt > 1:
                extra.extend(np.linspace(lo, hi, cnt + 1)[1:-1])
        breaks = np.union1d(breaks, extra)
    a, b = breaks[:-1], breaks[1:]
    n = spec.order
    t, w = _gauss(n)

    def nodes(lo, hi):
        half = 0.5 * (hi - lo)
        k = (0.5 * (hi + lo))[:, None] + half[:, None] * t[None, :]
        return k.ravel(), (half[:, None] * w[None, :]).ravel()

    m = 0.5 * (a + b)
    k_c, w_c = nodes(a, b)
    k_f, w_f = nodes(np.concatenate([a, m]), np.concatenate([m, b]))
    hw_c = np.asarray(h(k_c), dtype=float) * w_c
    hw_f = np.asarray(h(k_f), dtype=float) * w_f
    flat_x = xs.ravel()
    chunk = max(1, int(4e6 // max(k_f.size, 1)))
    res_c = np.empty(flat_x.shape)
    res_f = np.empty(flat_x.shape)
    for s in range(0, flat_x.size, chunk):
        xc = flat_x[s:s + chunk]
        res_c[s:s + chunk] = _kernel(kind, k_c[None, :], xc[:, None]) @ hw_c
        res_f[s:s + chunk] = _kernel(kind, k_f[None, :], xc[:, None]) @ hw_f
    pref = _PREFACTOR[kind]
    out = (res_f * pref).reshape(xs.shape)
    err = (np.abs(res_f - res_c) * abs(pref)).reshape(xs.shape)
    bound = spec.abs_tol + spec.rel_tol * np.abs(out)
    if np.any(err > bound):
        worst = float(np.max(err - bound))
        raise QuadratureError("fixed-panel quadrature missed its tolerance", worst)
    return out, err


def transform(h, x, spec=None, kind="cos", return_error=False):
    """Dispatch a transform of ``h`` at one separation or an array of them."""
    spec = spec or QuadratureSpec()
    if kind not in _PREFACTOR:
        raise ValueError(f"unknown kernel {kind!r}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("separations must be non-negative")
    if PanelStrategy(spec.panel_strategy) is PanelStrategy.FIXED_PANELS:
        val, err = _fixed(h, kind, np.atleast_1d(x_arr), spec)
        if x_arr.ndim == 0:
            val, err = float(val[0]), float(err[0])
        return (val, err) if return_error else val
    flat = np.atleast_1d(x_arr).ravel()
    vals = np.empty(flat.shape)
    errs = np.empty(flat.shape)
    for i, xi in enumerate(flat):
        if kind in ("sin", "j1") and xi == 0:
            vals[i], errs[i] = 0.0, 0.0
            continue
        vals[i], errs[i] = _adaptive(h, kind, float(xi), spec)
    if x_arr.ndim == 0:
        return (float(vals[0]), float(errs[0])) if return_error else float(vals[0])
    vals, errs = vals.reshape(x_arr.shape), errs.reshape(x_arr.shape)
    return (vals, errs) if return_error else vals


def cos_transform(h, x, spec=None, return_error=False):
    """(1/pi) int_{ir_kmin}^inf h(k) cos(kx) dk for an even channel function."""
    return transform(h, x, spec, "cos", return_error)


def sin_transform(h, x, spec=None, return_error=False):
    """(1/pi) int_{ir_kmin}^inf h(k) sin(kx) dk for an odd channel function."""
    return transform(h, x, spec, "sin", return_error)


def radial_j0_transform(h, r, spec=None, return_error=False):
    """(1/2pi) int_0^inf k h(k) J0(kr) dk, the 2D transform of a radial function."""
    return transform(h, r, spec, "j0", return_error)


def radial_phase_transform(h, r, spec=None, return_error=False):
    """Radial amplitude g(r) of a 2D kernel ``h(k) e^{i phi_k}``.

    Uses ``int_0^{2pi} exp(-i(phi + z cos phi)) dphi = -2 pi i J1(z)``, so the
    amplitude is ``-(1/4pi) int_0^inf k h(k) J1(kr) dk``.
    """
    return transform(h, r, spec, "j1", return_error)


def radial_phase_over_r(h, r, spec=None, return_error=False):
    """g(r)/r for the phase kernel, regular at r = 0."""
    return transform(h, r, spec, "j1_over_r", return_error)


def angular_phase_integral(z, n=64):
    """Trapezoid value of int_0^{2pi} exp(-i(phi + z cos phi)) dphi.

    Exponentially convergent for the periodic integrand; used to check the
    identity that maps the 2D phase kernel onto J1.
    """
    phi = 2.0 * math.pi * np.arange(n) / n
    return complex(np.exp(-1j * (phi + z * np.cos(phi))).sum() * 2.0 * math.pi / n)


def richardson_zero(values, steps):
    """Extrapolate ``values`` sampled at ``steps`` to step 0 (Neville scheme)."""
    steps = np.asarray(steps, dtype=float)
    table = list(np.asarray(values, dtype=float))
    n = len(table)
    for level in range(1, n):
        for i in range(n - level):
            x0, x1 = steps[i], steps[i + level]
            table[i] = (x1 * table[i] - x0 * table[i + 1]) / (x1 - x0)
    return table[0]


def abel_limit(transform_at, eta0, levels=4):
    """Abel-regularised value ``lim_{eta->0} T(eta)`` of a non-decaying integrand.

    ``transform_at(eta)`` must return the transform of ``h(k) e^{-eta k}``.
    The limit is taken by polynomial extrapolation over ``eta0 / 2^m``.
    """
    etas = eta0 * 0.5 ** np.arange(levels)
    vals = [transform_at(e) for e in etas]
    return richardson_zero(vals, etas)
