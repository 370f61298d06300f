"""Position-space two-point functions of the Gaussian states.

Every channel is split into the coefficient of ``delta(x - y)`` and a smooth
remainder.  The delta coefficient is the k -> infinity limit of the
momentum-space channel function; the smooth part is the transform of what is
left after that limit is subtracted.

Phase conventions: in 1D the second fermion component is rephased so that
``<psi1^dag(x) psi2(y)>`` is real and odd in ``x - y``.  In 2D the cross
channel is ``g(r) e^{i phi}`` and only the real amplitude ``g`` is returned.
"""

from dataclasses import dataclass, field

import numpy as np

from . import profiles as prof
from .profiles import Channel, State, Theory
from .transforms import (PanelStrategy, QuadratureSpec, abel_limit, transform)

THEORIES = ("boson1d", "boson2d", "fermion1d", "fermion2d")
EPSILON_DEFAULT = 1e-6


@dataclass(frozen=True)
class TheoryConfig:
    """Theory selector plus the parameters of its state.

    Parameters
    ----------
    theory : {"boson1d", "boson2d", "fermion1d", "fermion2d"}
    lam : float
        Lambda, the cMERA momentum scale.
    sigma : float
        Boson shape parameter, ``e^gamma`` by default.
    j : int
        Fermion cutoff index.
    epsilon : float
        IR regulator; momenta below ``epsilon * lam`` are dropped (boson1d only).
    state : {"cmera", "target", "product"}
    quad : QuadratureSpec
        Tolerances; ``scale`` and ``ir_kmin`` are filled in from the theory.
    abel_ratio : float
        Largest damping ``eta`` for non-decaying target integrands, as a
        fraction of the separation; the eta -> 0 limit is extrapolated from
        ``abel_levels`` halvings.  Target integrands are pure powers up to
        delta terms, so the error depends on ``eta / x`` alone.
    """

    theory: str = "boson1d"
    lam: float = 1.0
    sigma: float = prof.SIGMA_DEFAULT
    j: int = 0
    epsilon: float = EPSILON_DEFAULT
    state: str = "cmera"
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    abel_ratio: float = 0.125
    abel_levels: int = 6

    def __post_init__(self):
        if self.theory not in THEORIES:
            raise ValueError(f"theory must be one of {THEORIES}")
        if self.dim == 1 and self.particle is Theory.BOSON and not self.epsilon > 0:
            raise ValueError("boson1d needs a positive IR regulator epsilon")
        self.profile  # validates lam, sigma, j, state

    @property
    def particle(self):
        return Theory.BOSON if self.theory.startswith("boson") else Theory.FERMION

    @property
    def dim(self):
        return int(self.theory[-2])

    @property
    def profile(self):
        return prof.SpectralProfile(self.particle, State(self.state), self.lam, self.sigma, self.j)

    @property
    def channels(self):
        return prof.BOSON_CHANNELS if self.particle is Theory.BOSON else prof.FERMION_CHANNELS

    def quad_spec(self, strategy=None):
        kmin = self.epsilon * self.lam if self.theory == "boson1d" else 0.0
        spec = self.quad.with_(scale=self.lam, ir_kmin=kmin)
        if strategy is not None:
            spec = spec.with_(panel_strategy=PanelStrategy(strategy))
        return spec

    def with_(self, **kw):
        from dataclasses import replace
        return replace(self, **kw)

    def to_dict(self):
        d = {"theory": self.theory, "state": self.state, "lambda": self.lam}
        if self.particle is Theory.BOSON:
            d["sigma"] = self.sigma
            if self.dim == 1:
                d["epsilon"] = self.epsilon
        else:
            d["j"] = self.j
        return d


@dataclass(frozen=True)
class CorrelatorValue:
    """Delta coefficient and smooth part of one channel at one separation.

    ``imaginary`` marks channels whose value is ``i`` times the stored reals
    (phi-pi).  ``phase`` marks the 2D cross channel, whose full value is
    ``smooth * e^{i phi}``.
    """

    channel: Channel
    separation: float
    delta_coeff: float
    smooth: float
    imaginary: bool = False
    phase: bool = False


@dataclass(frozen=True)
class ChannelKernel:
    """Subtracted momentum-space function and how to transform it."""

    h: object
    delta_coeff: float
    kind: str
    abel: bool = False
    zero: bool = False


def _zero(k):
    return np.zeros(np.shape(k))


def delta_coefficient(cfg, channel):
    """Coefficient of delta(x - y); fixed by the theory, the same for every state."""
    channel = Channel(channel)
    if channel is Channel.PHI_PHI:
        return 0.5 / cfg.lam
    if channel is Channel.PI_PI:
        return 0.5 * cfg.lam
    if channel in (Channel.PHI_PI, Channel.P22):
        return 0.5 if channel is Channel.PHI_PI else 1.0
    return 0.0


def channel_kernel(cfg, channel):
    """Build the subtracted channel function for ``cfg`` and ``channel``.

    The subtracted constant is the delta coefficient of the theory.  For the
    target state the remainder does not decay in k and is flagged for Abel
    summation.
    """
    channel = Channel(channel)
    p = cfg.profile
    lam = cfg.lam
    radial = cfg.dim == 2
    if channel not in cfg.channels:
        raise ValueError(f"{channel.value} is not a {cfg.particle.value} channel")
    delta = delta_coefficient(cfg, channel)
    if channel is Channel.P12:
        kind = "j1" if radial else "sin"
    else:
        kind = "j0" if radial else "cos"
    if channel is Channel.PHI_PI or p.state is State.PRODUCT:
        return ChannelKernel(_zero, delta, kind, zero=True)
    abel = p.state is State.TARGET

    if channel is Channel.PHI_PHI:
        if abel:
            h = lambda k: 0.5 / np.abs(k) - 0.5 / lam  # noqa: E731
        else:
            h = lambda k: (0.5 / lam) * prof.alpha_ratio_minus_one(p, k, -1.0)  # noqa: E731
    elif channel is Channel.PI_PI:
        if abel:
            h = lambda k: 0.5 * (np.abs(k) - lam)  # noqa: E731
        else:
            h = lambda k: (0.5 * lam) * prof.alpha_ratio_minus_one(p, k, 1.0)  # noqa: E731
    elif channel is Channel.P12:
        scale = 1.0 if radial else -0.5
        h = lambda k: scale * np.sin(2.0 * prof.theta(p, k))  # noqa: E731
    elif channel is Channel.P11:
        h = lambda k: np.sin(prof.theta(p, k)) ** 2  # noqa: E731
    else:
        h = lambda k: -np.sin(prof.theta(p, k)) ** 2  # noqa: E731
    return ChannelKernel(h, delta, kind, abel=abel)


def _abel_transform(cfg, ker, x):
    def at(eta):
        spec = cfg.quad_spec().with_(k_max=40.0 / eta)
        return transform(lambda k: ker.h(k) * np.exp(-eta * k), x, spec, ker.kind)

    return abel_limit(at, cfg.abel_ratio * x, cfg.abel_levels)


def smooth_part(cfg, channel, x):
    """Smooth part of ``channel`` at separation(s) ``x`` (adaptive, one at a time)."""
    ker = channel_kernel(cfg, channel)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("separation must be non-negative")
    if ker.zero:
        out = np.zeros(x_arr.shape)
    elif ker.abel:
        if np.any(x_arr <= 0):
            raise ValueError("target-state smooth parts need x > 0")
        out = np.array([_abel_transform(cfg, ker, float(xi)) for xi in x_arr.ravel()]).reshape(x_arr.shape)
    else:
        out = np.asarray(transform(ker.h, x_arr, cfg.quad_spec(), ker.kind))
    return float(out) if out.ndim == 0 else out


def tabulate(cfg, channel, seps):
    """Smooth part on many separations with one common node set.

    Used for matrix assembly.  Target-state channels fall back to the
    one-at-a-time Abel route.
    """
    ker = channel_kernel(cfg, channel)
    seps = np.asarray(seps, dtype=float)
    if ker.zero:
        return np.zeros(seps.shape)
    if ker.abel:
        return smooth_part(cfg, channel, seps)
    return np.asarray(transform(ker.h, seps, cfg.quad_spec(PanelStrategy.FIXED_PANELS), ker.kind))


def correlator(cfg, channel, x):
    """Full ``CorrelatorValue`` for one separation ``x > 0``."""
    channel = Channel(channel)
    if not x > 0:
        raise ValueError("separation must be positive")
    ker = channel_kernel(cfg, channel)
    return CorrelatorValue(channel, float(x), ker.delta_coeff, smooth_part(cfg, channel, x),
                           imaginary=channel is Channel.PHI_PI,
                           phase=channel is Channel.P12 and cfg.dim == 2)


def _check(cfg, theory):
    if cfg.theory != theory:
        raise ValueError(f"configuration is for {cfg.theory}, not {theory}")


def boson1d(channel, x, cfg):
    """Boson correlator on the line; ``cfg.epsilon`` sets the IR exclusion."""
    _check(cfg, "boson1d")
    return correlator(cfg, channel, x)


def boson2d(channel, r, cfg):
    """Boson correlator in the plane as a function of the distance ``r``."""
    _check(cfg, "boson2d")
    return correlator(cfg, channel, r)


def fermion1d(channel, x, cfg):
    """Dirac fermion correlator on the line (P12 real and odd after rephasing)."""
    _check(cfg, "fermion1d")
    return correlator(cfg, channel, x)


def fermion2d(channel, r, cfg):
    """Dirac fermion correlator in the plane; P12 is the amplitude of ``e^{i phi}``."""
    _check(cfg, "fermion2d")
    return correlator(cfg, channel, r)


def p22_direct(cfg, x):
    """P22 smooth part from ``cos^2 theta`` minus its own limit.

    A second route to the identity ``P22 = delta - P11``.
    """
    p = cfg.profile
    if cfg.particle is not Theory.FERMION:
        raise ValueError("p22_direct needs a fermion theory")
    if p.state is not State.CMERA:
        raise ValueError("p22_direct is provided for the cMERA state")
    kind = "j0" if cfg.dim == 2 else "cos"
    h = lambda k: np.cos(prof.theta(p, k)) ** 2 - 1.0  # noqa: E731
    return transform(h, x, cfg.quad_spec(), kind)
