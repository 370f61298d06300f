"""Decay-exponent prediction, short-distance entropy estimates and fits.

Long-distance decay follows from the regularity class of the momentum-space
channel function at k = 0:

* 1D, jump in the n-th derivative             -> |x|^-(n+1)
* 1D, ``|k|^-1`` singularity                    -> logarithm (exponent 0)
* 2D, ``|k|^(2n-1)``                            -> |x|^-(2n+1)
* 2D, ``k^(2n) e^{i phi_k}``                    -> |x|^-(2n+2)
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import correlators as corr
from .gaussian_entropy import binary_entropy, thermal_entropy
from .profiles import Channel, OriginKind, Theory, origin_behavior

SHORT_DISTANCE_LIMIT = 0.3


class UnclassifiableError(ValueError):
    """No decay law follows from the origin behaviour (constant or smooth)."""


def predict_exponent(cfg, channel):
    """Predicted decay exponent p of ``|C(x)| ~ x^-p`` (0 means logarithmic)."""
    ob = origin_behavior(cfg.profile, channel, cfg.dim)
    if ob.kind is OriginKind.KINK_ORDER:
        return ob.n + 1
    if ob.kind is OriginKind.POWER_ODD:
        if cfg.dim == 1:
            if ob.n == 0:
                return 0
            raise UnclassifiableError("odd powers in 1D are classified by derivative jumps")
        return 2 * ob.n + 1
    if ob.kind is OriginKind.POWER_EVEN_PHASE:
        return 2 * ob.n + 2
    raise UnclassifiableError(f"{ob.kind.value} channel functions give no power-law tail")


def measure_origin_power(h, k0=1e-3, ratio=2.0, subtract=True):
    """Local power ``p`` of ``h(k) - h(0) ~ c k^p`` from two small momenta.

    Returns ``(p, c)``.  With ``subtract=False`` the raw function is used,
    which is what singular (p <= 0) channels need.
    """
    k1, k2 = k0, k0 * ratio
    h0 = float(h(np.array([0.0]))[0]) if subtract else 0.0
    v1 = float(h(np.array([k1]))[0]) - h0
    v2 = float(h(np.array([k2]))[0]) - h0
    p = math.log(abs(v2) / abs(v1)) / math.log(ratio)
    return p, v1 / k1 ** p


# ---------------------------------------------------------------------------
# short-distance estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShortDistanceConstants:
    """Zero-separation values of the smooth parts in dimensionless form.

    boson1d: ``A = f(0)``, ``B = g(0)/Lambda^2``; boson2d: ``A = f(0)/Lambda``,
    ``B = g(0)/Lambda^3``; fermion1d: ``A = P11(0)/Lambda``; fermion2d:
    ``A = P11(0)/Lambda^2``.
    """

    theory: str
    A: float
    B: float = 0.0
    lam: float = 1.0


def short_distance_constants(cfg):
    """Measure A and B from the zero-separation limit of the pipeline."""
    lam = cfg.lam
    if cfg.particle is Theory.BOSON:
        f0 = float(corr.tabulate(cfg, Channel.PHI_PHI, np.array([0.0]))[0])
        g0 = float(corr.tabulate(cfg, Channel.PI_PI, np.array([0.0]))[0])
        if cfg.dim == 1:
            return ShortDistanceConstants(cfg.theory, f0, g0 / lam ** 2, lam)
        return ShortDistanceConstants(cfg.theory, f0 / lam, g0 / lam ** 3, lam)
    p0 = float(corr.tabulate(cfg, Channel.P11, np.array([0.0]))[0])
    return ShortDistanceConstants(cfg.theory, p0 / lam ** cfg.dim, 0.0, lam)


def _boson_mode_entropy(lam_sym):
    if lam_sym < 0.25 - 1e-15:
        raise ValueError(f"symplectic eigenvalue {lam_sym} below 1/4")
    s = math.sqrt(max(lam_sym, 0.25))
    zeta = (2.0 * s - 1.0) / (2.0 * s + 1.0)
    return float(thermal_entropy(np.array([zeta]))[0])


def short_eigenvalue(theory, x, consts):
    """The single non-trivial eigenvalue of the short-distance model."""
    u = consts.lam * x
    A, B = consts.A, consts.B
    if theory == "boson1d":
        return (1.0 + 2.0 * A * u) * (1.0 + 2.0 * B * u) / 4.0
    if theory == "boson2d":
        return (1.0 + 2.0 * math.pi * A * u * u) * (1.0 + 2.0 * math.pi * B * u * u) / 4.0
    if theory == "fermion1d":
        return A * u
    if theory == "fermion2d":
        return math.pi * A * u * u
    raise ValueError(f"unknown theory {theory!r}")


def short_entropy(theory, x, consts):
    """Leading short-distance entropy (nats) of a region of size ``x``.

    Bosons: one thermal mode at the model eigenvalue.  Fermions: two binary
    entropies, one for each component.  Warns above ``Lambda x = 0.3``.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    if consts.lam * x > SHORT_DISTANCE_LIMIT:
        warnings.warn(f"short-distance estimate used at Lambda x = {consts.lam * x:.3g} > "
                      f"{SHORT_DISTANCE_LIMIT}", stacklevel=2)
    if x == 0:
        return 0.0
    lam_e = short_eigenvalue(theory, x, consts)
    if theory.startswith("boson"):
        return _boson_mode_entropy(lam_e)
    if not 0.0 < lam_e < 1.0:
        raise ValueError(f"fermionic eigenvalue {lam_e} outside (0, 1)")
    if theory == "fermion1d":
        return 2.0 * float(binary_entropy(lam_e))
    return float(binary_entropy(lam_e) + binary_entropy(1.0 - lam_e))


def short_entropy_log_expansion(theory, x, consts):
    """Small-eigenvalue expansion of the fermion estimate, ``2 l (1 - ln l)``.

    Kept as a secondary formula; ``short_entropy`` uses the exact binary
    entropy.
    """
    if not theory.startswith("fermion"):
        raise ValueError("the log expansion applies to fermions")
    lam_e = short_eigenvalue(theory, x, consts)
    return 2.0 * lam_e * (1.0 - math.log(lam_e))


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    """Least-squares slope with its standard error and fit window."""

    slope: float
    stderr: float
    window: tuple
    residual_norm: float
    n_points: int
    intercept: float = 0.0
    kind: str = "power"

    @property
    def exponent(self):
        return self.slope

    def to_json(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["exponent"] = self.slope
        return json.dumps(d, sort_keys=True)


def _select(xs, ys, window):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("x and y must have the same length")
    if window is None:
        window = (float(np.min(xs)), float(np.max(xs)))
    lo, hi = window
    if not lo < hi:
        raise ValueError("fit window must satisfy lo < hi")
    tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
    m = (xs >= lo - tol) & (xs <= hi + tol)
    if np.count_nonzero(m) < 5:
        raise ValueError(f"fewer than 5 points inside window {window}")
    return xs[m], ys[m], (float(lo), float(hi))


def _ols(u, v):
    n = u.size
    A = np.vstack([u, np.ones(n)]).T
    coef, _, _, _ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - A @ coef
    rss = float(resid @ resid)
    dof = max(n - 2, 1)
    sxx = float(np.sum((u - u.mean()) ** 2))
    stderr = math.sqrt(rss / dof / sxx) if sxx > 0 else float("inf")
    return float(coef[0]), float(coef[1]), stderr, math.sqrt(rss)


def fit_power(xs, ys, window=None):
    """Slope of ln y against ln x (the signed exponent; all y must be > 0)."""
    xs, ys, window = _select(xs, ys, window)
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise ValueError("fit_power needs positive x and y")
    slope, icpt, se, rn = _ols(np.log(xs), np.log(ys))
    return FitResult(slope, se, window, rn, xs.size, icpt, "power")


def fit_log(xs, ys, window=None):
    """Slope of y against ln x."""
    xs, ys, window = _select(xs, ys, window)
    if np.any(xs <= 0):
        raise ValueError("fit_log needs positive x")
    slope, icpt, se, rn = _ols(np.log(xs), ys)
    return FitResult(slope, se, window, rn, xs.size, icpt, "log")


def fit_central_charge(xs, S, window=None):
    """c = 3 x slope of S against ln x (entropies in nats)."""
    r = fit_log(xs, S, window)
    return FitResult(3.0 * r.slope, 3.0 * r.stderr, r.window, r.residual_norm, r.n_points,
                     r.intercept, "central_charge")
