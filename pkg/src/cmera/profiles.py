"""Characteristic functions of the Gaussian states.

Bosonic states are fixed by ``alpha(k)`` and fermionic states by the rotation
angle ``theta(k)``.  Three states are provided for each theory: the target CFT
ground state, the unentangled product state and the cMERA interpolation.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import specfun

SIGMA_DEFAULT = math.exp(specfun.EULER_GAMMA)


class Theory(str, enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"


class State(str, enum.Enum):
    TARGET = "target"
    PRODUCT = "product"
    CMERA = "cmera"


class Channel(str, enum.Enum):
    """Two-point channels.  ``P11`` is <psi1^dag psi1>, ``P12`` <psi1^dag psi2>."""

    PHI_PHI = "phiphi"
    PI_PI = "pipi"
    PHI_PI = "phipi"
    P11 = "p11"
    P12 = "p12"
    P22 = "p22"


BOSON_CHANNELS = (Channel.PHI_PHI, Channel.PI_PI, Channel.PHI_PI)
FERMION_CHANNELS = (Channel.P11, Channel.P12, Channel.P22)


@dataclass(frozen=True)
class SpectralProfile:
    """Immutable description of a translation-invariant Gaussian state.

    Parameters
    ----------
    theory : Theory
    state : State
    lam : float
        Momentum scale Lambda of the cMERA cutoff.
    sigma : float
        Bosonic shape parameter; ``e^gamma`` makes the small-k slope of alpha
        equal to one.
    j : int
        Fermionic cutoff index.
    """

    theory: Theory
    state: State = State.CMERA
    lam: float = 1.0
    sigma: float = SIGMA_DEFAULT
    j: int = 0

    def __post_init__(self):
        object.__setattr__(self, "theory", Theory(self.theory))
        object.__setattr__(self, "state", State(self.state))
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.j < 0 or int(self.j) != self.j:
            raise ValueError("j must be a non-negative integer")
        object.__setattr__(self, "j", int(self.j))

    def to_dict(self):
        return {"theory": self.theory.value, "state": self.state.value,
                "lambda": self.lam, "sigma": self.sigma, "j": self.j}


def cutoff_normalization(j):
    """C_j = (pi/2) / Gamma(j + 1/2), fixed by theta(0) = pi/4."""
    return 0.5 * math.pi / specfun.gamma_half(j)


def cutoff_normalization_alt(j):
    """Closed form 2^(j-1) sqrt(pi) / (2j-1)!!, equal to ``cutoff_normalization``."""
    dfact = 1.0
    for m in range(2 * j - 1, 0, -2):
        dfact *= m
    return 2.0 ** (j - 1) * math.sqrt(math.pi) / dfact


def _half_ei(k, prof):
    # (1/2) Ei(-k^2 / (sigma Lambda^2)); -inf at k = 0
    k = np.asarray(k, dtype=float)
    z = -(k * k) / (prof.sigma * prof.lam ** 2)
    out = np.full(k.shape, -np.inf)
    pos = z < 0
    if np.any(pos):
        out[pos] = 0.5 * specfun.ei(z[pos])
    return out


def alpha(profile, k):
    """Bosonic characteristic function alpha(k), even in k."""
    if profile.theory is not Theory.BOSON:
        raise ValueError("alpha is defined for bosonic profiles")
    k = np.abs(np.asarray(k, dtype=float))
    if profile.state is State.TARGET:
        out = k.copy()
    elif profile.state is State.PRODUCT:
        out = np.full(k.shape, profile.lam)
    else:
        out = profile.lam * np.exp(_half_ei(k, profile))
    return float(out) if out.ndim == 0 else out


def alpha_ratio_minus_one(profile, k, power):
    """(alpha/Lambda)^power - 1 computed without cancellation (cMERA only)."""
    if profile.state is not State.CMERA:
        a = alpha(profile, k) / profile.lam
        return a ** power - 1.0
    k = np.abs(np.asarray(k, dtype=float))
    out = np.expm1(power * _half_ei(k, profile))
    return float(out) if out.ndim == 0 else out


def theta(profile, k):
    """Fermionic rotation angle theta(k) in [0, pi/4], even in k."""
    if profile.theory is not Theory.FERMION:
        raise ValueError("theta is defined for fermionic profiles")
    k = np.abs(np.asarray(k, dtype=float))
    if profile.state is State.TARGET:
        out = np.full(k.shape, 0.25 * math.pi)
    elif profile.state is State.PRODUCT:
        out = np.zeros(k.shape)
    else:
        u = (k / profile.lam) ** 2
        out = 0.25 * math.pi * specfun.upper_gamma_half(profile.j, u) / specfun.gamma_half(profile.j)
        out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def theta_erf(profile, k):
    """j = 0 cMERA angle through the error function; an independent code path."""
    if profile.j != 0 or profile.state is not State.CMERA:
        raise ValueError("theta_erf covers only the j = 0 cMERA profile")
    k = np.abs(np.asarray(k, dtype=float))
    return 0.25 * math.pi * (1.0 - specfun.erf(k / profile.lam))


def channel_momentum(profile, channel, k):
    """Momentum-space channel function before any subtraction.

    Boson: ``1/(2 alpha)`` for phi-phi, ``alpha/2`` for pi-pi.  Fermion:
    ``sin^2 theta`` for P11, ``cos^2 theta`` for P22 and ``sin 2 theta`` for
    the cross channel (odd extension ``sign(k) sin 2 theta`` in 1D, times the
    momentum phase in 2D).  Phi-pi is a pure delta and returns ``1/2``.
    """
    channel = Channel(channel)
    k = np.asarray(k, dtype=float)
    if profile.theory is Theory.BOSON:
        if channel not in BOSON_CHANNELS:
            raise ValueError(f"channel {channel.value} is not a boson channel")
        if channel is Channel.PHI_PI:
            return np.full(k.shape, 0.5)
        a = alpha(profile, k)
        with np.errstate(divide="ignore"):
            return 0.5 / a if channel is Channel.PHI_PHI else 0.5 * a
    if channel not in FERMION_CHANNELS:
        raise ValueError(f"channel {channel.value} is not a fermion channel")
    t = theta(profile, k)
    if channel is Channel.P11:
        return np.sin(t) ** 2
    if channel is Channel.P22:
        return np.cos(t) ** 2
    return np.sin(2.0 * t)


# ---------------------------------------------------------------------------
# behaviour at k = 0
# ---------------------------------------------------------------------------

class OriginKind(str, enum.Enum):
    POWER_ODD = "power_odd"            # ~ |k|^(2n-1)
    POWER_EVEN_PHASE = "power_even_phase"  # ~ k^(2n) e^{i phi_k}
    KINK_ORDER = "kink_order"          # 1D: jump of the n-th derivative
    CONSTANT = "constant"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class OriginBehavior:
    """Regularity class of a channel function at the origin.

    ``coefficient`` multiplies the leading non-analytic term ``|k|^p`` for
    k > 0, where ``p = leading_power``.
    """

    kind: OriginKind
    n: int = 0
    coefficient: float = 0.0

    @property
    def leading_power(self):
        if self.kind is OriginKind.POWER_ODD:
            return 2 * self.n - 1
        if self.kind is OriginKind.POWER_EVEN_PHASE:
            return 2 * self.n
        if self.kind is OriginKind.KINK_ORDER:
            return self.n
        return None


def origin_behavior(profile, channel, dim=1):
    """Classify the k -> 0 behaviour of a channel function.

    The table covers every theory/state/channel combination in the package;
    it is cross-checked numerically in the test-suite.
    """
    channel = Channel(channel)
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    lam = profile.lam
    if profile.theory is Theory.BOSON:
        if channel not in BOSON_CHANNELS:
            raise ValueError(f"unknown boson channel {channel.value}")
        if profile.state is State.PRODUCT or channel is Channel.PHI_PI:
            return OriginBehavior(OriginKind.CONSTANT)
        slope = 1.0
        if profile.state is State.CMERA:
            slope = math.sqrt(SIGMA_DEFAULT / profile.sigma)
        if channel is Channel.PHI_PHI:
            return OriginBehavior(OriginKind.POWER_ODD, 0, 0.5 / slope)
        if dim == 1:
            return OriginBehavior(OriginKind.KINK_ORDER, 1, 0.5 * slope)
        return OriginBehavior(OriginKind.POWER_ODD, 1, 0.5 * slope)

    if channel not in FERMION_CHANNELS:
        raise ValueError(f"unknown fermion channel {channel.value}")
    if profile.state is State.PRODUCT:
        return OriginBehavior(OriginKind.CONSTANT)
    if channel is Channel.P12:
        if dim == 1:
            return OriginBehavior(OriginKind.KINK_ORDER, 0, 1.0)
        return OriginBehavior(OriginKind.POWER_EVEN_PHASE, 0, 1.0)
    if profile.state is State.TARGET:
        return OriginBehavior(OriginKind.CONSTANT)
    j = profile.j
    # sin^2 theta - 1/2 ~ -(pi/4) |k|^(2j+1) / (Gamma(j+3/2) Lambda^(2j+1))
    c = -0.25 * math.pi / (math.gamma(j + 1.5) * lam ** (2 * j + 1))
    if channel is Channel.P22:
        c = -c
    if dim == 1:
        return OriginBehavior(OriginKind.KINK_ORDER, 2 * j + 1, c)
    return OriginBehavior(OriginKind.POWER_ODD, j + 1, c)
