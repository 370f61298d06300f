"""Angular-momentum blocks for disc entropies in the plane.

For a rotation-invariant state the correlation matrix of a disc splits into
radial blocks labelled by angular momentum.  With ``d(u)^2 = r^2 + r'^2 -
2 r r' cos u`` and ``I^X_m(r, r') = int_0^{2pi} X(d(u)) cos(m u) du``:

boson, block l::

    C_phiphi = delta(r - r')/(2 Lambda) + sqrt(r r') I^f_l
    C_pipi   = Lambda delta(r - r')/2   + sqrt(r r') I^g_l

fermion, total angular momentum j (psi1 carries m = j - 1/2, psi2 m + 1)::

    C11 = sqrt(r r') I^F_m
    C22 = delta(r - r') - sqrt(r r') I^F_{m+1}
    C12 = sqrt(r r') (r I^G_{m+1} - r' I^G_m),    G(d) = g(d)/d

where ``g`` is the amplitude of the cross channel ``g(d) e^{i phi}``.  The
ratio ``g(d)/d`` is smooth and even, so no case split at ``r = r'`` is
needed.  Radial sampling uses the 1D conventions (weights ``a^0`` for
phi-phi, ``a^2`` for pi-pi, ``a`` for fermions, ``delta -> 1/a``).
"""

import math

import numpy as np
from scipy.interpolate import CubicSpline

from . import correlators as corr
from . import transforms
from .gaussian_entropy import (CorrelationBlocks, EntropyResult, MAX_MATRIX_DIM,
                               MemoryBudgetError, entropy_of)
from .profiles import Channel, Theory

TAB_STEP = 0.01       # radial table step in units of 1/Lambda
ANGULAR_TOL = 1e-12   # relative change allowed when the angular grid is doubled
ANGULAR_START = 64
ANGULAR_MAX = 8192
L_MAX_DEFAULT = 3


class AngularQuadratureError(RuntimeError):
    """Angular integrals did not settle under grid doubling."""


class RadialKernels:
    """Splines of the smooth parts over ``[0, r_max]``, built once per theory.

    Boson: ``f`` (phi-phi) and ``g`` (pi-pi).  Fermion: ``f`` (P11) and
    ``g`` (cross amplitude divided by the distance).
    """

    def __init__(self, cfg, r_max, step=None):
        if cfg.dim != 2:
            raise ValueError("RadialKernels needs a 2D theory")
        self.cfg = cfg
        step = (step or TAB_STEP) / cfg.lam
        n = max(int(math.ceil(r_max / step)), 8) + 4
        self.d = step * np.arange(n + 1)
        self.r_max = float(self.d[-1])
        if cfg.particle is Theory.BOSON:
            fv = corr.tabulate(cfg, Channel.PHI_PHI, self.d)
            gv = corr.tabulate(cfg, Channel.PI_PI, self.d)
        else:
            fv = corr.tabulate(cfg, Channel.P11, self.d)
            ker = corr.channel_kernel(cfg, Channel.P12)
            if ker.zero:
                gv = np.zeros(self.d.shape)
            else:
                spec = cfg.quad_spec(transforms.PanelStrategy.FIXED_PANELS)
                gv = transforms.radial_phase_over_r(ker.h, self.d, spec)
        self.f_values = np.asarray(fv, dtype=float)
        self.g_values = np.asarray(gv, dtype=float)
        # even functions: zero slope at the origin
        self.f = CubicSpline(self.d, self.f_values, bc_type=((1, 0.0), "not-a-knot"))
        self.g = CubicSpline(self.d, self.g_values, bc_type=((1, 0.0), "not-a-knot"))

    def covers(self, r_max):
        return r_max <= self.r_max


def radial_nodes(x, a, nodes="midpoint"):
    """Radial sample points of a disc of radius ``x``.

    ``midpoint`` uses ``(i - 1/2) a``, which integrates a constant kernel
    exactly; ``endpoint`` uses ``i a``.
    """
    n = int(round(x / a))
    if n < 1:
        raise ValueError("disc radius smaller than the spacing")
    i = np.arange(1, n + 1, dtype=float)
    if nodes == "midpoint":
        return (i - 0.5) * a
    if nodes == "endpoint":
        return i * a
    raise ValueError("nodes must be 'midpoint' or 'endpoint'")


def _angular_moments(funcs, r, m_max, n_ang):
    """Trapezoid moments ``int_0^{2pi} X(d(u)) cos(m u) du`` for m = 0..m_max.

    Uses the reflection u -> 2pi - u, so only ``[0, pi]`` is sampled.
    Returns one array of shape (N, N, m_max + 1) per function.
    """
    half = n_ang // 2
    u = 2.0 * math.pi * np.arange(half + 1) / n_ang
    w = np.full(half + 1, 2.0)
    w[0] = w[-1] = 1.0
    w *= 2.0 * math.pi / n_ang
    cosm = np.cos(np.outer(u, np.arange(m_max + 1))) * w[:, None]
    iu, ju = np.triu_indices(r.size)
    ri, rj = r[iu], r[ju]
    d2 = ri[:, None] ** 2 + rj[:, None] ** 2 - 2.0 * (ri * rj)[:, None] * np.cos(u)[None, :]
    d = np.sqrt(np.maximum(d2, 0.0))
    out = []
    for fn in funcs:
        tri = fn(d) @ cosm
        full = np.empty((r.size, r.size, m_max + 1))
        full[iu, ju] = tri
        full[ju, iu] = tri
        out.append(full)
    return out


def angular_moments(funcs, r, m_max, n_ang=None, tol=ANGULAR_TOL):
    """Angular moments with grid doubling until they settle.

    Returns ``(moments, n_ang)``.  A fixed ``n_ang`` skips the check.
    """
    if n_ang is not None:
        return _angular_moments(funcs, r, m_max, n_ang), n_ang
    n = ANGULAR_START
    prev = _angular_moments(funcs, r, m_max, n)
    while n < ANGULAR_MAX:
        n *= 2
        cur = _angular_moments(funcs, r, m_max, n)
        change = max(float(np.max(np.abs(c - p))) for c, p in zip(cur, prev))
        scale = max(max(float(np.max(np.abs(c))) for c in cur), 1e-300)
        if change <= tol * scale:
            return cur, n
        prev = cur
    raise AngularQuadratureError(f"angular integrals still changing at {n} points")


def _kernels_for(cfg, x, kernels):
    if kernels is None or not kernels.covers(2.0 * x) or kernels.cfg != cfg:
        kernels = RadialKernels(cfg, 2.0 * x)
    return kernels


def boson_block(ell, r, a, cfg, moments):
    """Matrices of the angular block ``ell`` from precomputed moments."""
    i_f, i_g = moments
    ell = abs(int(ell))
    root = np.sqrt(np.outer(r, r))
    eye = np.eye(r.size)
    cpp = eye * (corr.delta_coefficient(cfg, Channel.PHI_PHI) / a) + root * i_f[:, :, ell]
    cqq = eye * (corr.delta_coefficient(cfg, Channel.PI_PI) * a) + a * a * root * i_g[:, :, ell]
    return CorrelationBlocks("boson", (cpp, cqq), a, r.size, ell)


def _fermion_parts(j2, r, moments):
    # j2 = 2j (odd integer); psi1 carries m = j - 1/2, psi2 m + 1
    i_f, i_g = moments
    m = (j2 - 1) // 2
    root = np.sqrt(np.outer(r, r))
    ri = r[:, None]
    rj = r[None, :]
    c11 = root * i_f[:, :, abs(m)]
    c22 = root * i_f[:, :, abs(m + 1)]
    c12 = root * (ri * i_g[:, :, abs(m + 1)] - rj * i_g[:, :, abs(m)])
    c21 = root * (rj * i_g[:, :, abs(m + 1)] - ri * i_g[:, :, abs(m)])
    return c11, c12, c21, c22


def fermion_block(j2, r, a, cfg, moments, lower_from_upper=False):
    """2N x 2N block of total angular momentum ``j = j2/2``.

    The lower-left block is computed from its own angular formula unless
    ``lower_from_upper`` is set, so Hermiticity is a genuine check.
    """
    if j2 % 2 == 0:
        raise ValueError("fermionic blocks need half-integer j (odd j2)")
    c11, c12, c21, c22 = _fermion_parts(j2, r, moments)
    eye = np.eye(r.size)
    d11 = corr.delta_coefficient(cfg, Channel.P11)
    d22 = corr.delta_coefficient(cfg, Channel.P22)
    lower = (a * c12).T if lower_from_upper else a * c21
    C = np.block([[eye * d11 + a * c11, a * c12], [lower, eye * d22 - a * c22]])
    return CorrelationBlocks("fermion", (C,), a, r.size, j2 / 2.0)


def block_labels(cfg, l_max):
    """Block labels summed in a disc entropy.

    Bosons: ``l = -l_max..l_max``.  Fermions: ``j = +-1/2 .. +-(l_max + 1/2)``
    returned as odd integers ``2j``.
    """
    if l_max < 0:
        raise ValueError("l_max must be non-negative")
    if cfg.particle is Theory.BOSON:
        return list(range(-l_max, l_max + 1))
    top = 2 * l_max + 1
    return [j2 for j2 in range(-top, top + 1, 2)]


def disc_blocks(x, a, cfg, l_max=None, kernels=None, nodes="midpoint", n_ang=None):
    """All angular blocks of a disc of radius ``x``; returns ``(labels, blocks)``."""
    l_max = L_MAX_DEFAULT if l_max is None else int(l_max)
    r = radial_nodes(x, a, nodes)
    dim = r.size * (1 if cfg.particle is Theory.BOSON else 2)
    if dim > MAX_MATRIX_DIM:
        raise MemoryBudgetError(f"block dimension {dim} exceeds {MAX_MATRIX_DIM}; use a coarser a")
    kernels = _kernels_for(cfg, x, kernels)
    m_max = l_max if cfg.particle is Theory.BOSON else l_max + 1
    moments, _ = angular_moments((kernels.f, kernels.g), r, m_max, n_ang)
    labels = block_labels(cfg, l_max)
    if cfg.particle is Theory.BOSON:
        blocks = [boson_block(l, r, a, cfg, moments) for l in labels]
    else:
        blocks = [fermion_block(j2, r, a, cfg, moments) for j2 in labels]
    return labels, blocks


def disc_entropy(x, a, l_max, cfg, kernels=None, nodes="midpoint", n_ang=None, tol_eig=None):
    """Entanglement entropy of a disc of radius ``x``, summed over blocks.

    ``result.blocks`` holds ``(label, S_block, discarded_fraction)`` with
    label ``l`` for bosons and ``j`` for fermions.  Blocks ``l`` and ``-l``
    coincide for bosons and are diagonalised once.
    """
    l_max = L_MAX_DEFAULT if l_max is None else int(l_max)
    labels, blocks = disc_blocks(x, a, cfg, l_max, kernels, nodes, n_ang)
    per = []
    cache = {}
    total = 0.0
    n_disc = 0
    n_all = 0
    fallback = False
    for lab, blk in zip(labels, blocks):
        key = abs(lab) if cfg.particle is Theory.BOSON else lab
        if key not in cache:
            cache[key] = entropy_of(blk, tol_eig)
        res = cache[key]
        label = lab if cfg.particle is Theory.BOSON else lab / 2.0
        per.append((label, res.S, res.discarded_fraction))
        total += res.S
        n_disc += res.n_discarded
        n_all += res.spectrum.size
        fallback = fallback or res.fallback
    spectrum = np.concatenate([cache[k].spectrum for k in sorted(cache)])
    out = EntropyResult(total, spectrum, n_disc / max(n_all, 1), n_disc, fallback, per)
    return out


def cumulative_by_order(result):
    """Cumulative disc entropy as a function of the truncation order.

    Returns a list ``(order, S_up_to_order)`` with order ``|l|`` for bosons
    and ``|j| - 1/2`` for fermions.
    """
    acc = {}
    for label, s, _ in result.blocks:
        order = int(round(abs(label) - (0.5 if label != int(label) else 0.0)))
        acc[order] = acc.get(order, 0.0) + s
    out = []
    run = 0.0
    for order in sorted(acc):
        run += acc[order]
        out.append((order, run))
    return out


def full_disc_matrix(x, a, cfg, n_ang, kernels=None, nodes="midpoint"):
    """Correlation matrix of the disc sampled directly on a polar point set.

    Points ``(r_i, 2 pi k / n_ang)`` with area weights ``r_i a (2 pi / n_ang)``
    and the Cartesian correlators evaluated at their separations.  Its
    spectrum equals the union of all ``n_ang`` angular blocks built with the
    same angular grid, which makes it an independent check of the block
    construction.
    """
    kernels = _kernels_for(cfg, x, kernels)
    r = radial_nodes(x, a, nodes)
    phi = 2.0 * math.pi * np.arange(n_ang) / n_ang
    rr = np.repeat(r, n_ang)
    pp = np.tile(phi, r.size)
    z = rr * np.exp(1j * pp)
    w = rr * a * (2.0 * math.pi / n_ang)
    dz = z[:, None] - z[None, :]
    d = np.abs(dz)
    sw = np.sqrt(np.outer(w, w))
    eye = np.eye(rr.size)
    if cfg.particle is Theory.BOSON:
        cpp = eye * corr.delta_coefficient(cfg, Channel.PHI_PHI) + sw * kernels.f(d)
        cqq = eye * corr.delta_coefficient(cfg, Channel.PI_PI) + sw * kernels.g(d)
        return CorrelationBlocks("boson", (cpp, cqq), a, rr.size)
    c11 = eye * corr.delta_coefficient(cfg, Channel.P11) + sw * kernels.f(d)
    c22 = eye * corr.delta_coefficient(cfg, Channel.P22) - sw * kernels.f(d)
    # <psi1^dag(x) psi2(y)> = g(|x-y|) e^{i phi_{x-y}} = G(|x-y|) (x - y)
    c12 = sw * kernels.g(d) * dz
    C = np.block([[c11, c12], [c12.conj().T, c22]])
    return CorrelationBlocks("fermion", (C,), a, rr.size)


def all_blocks_entropy(x, a, cfg, n_ang, kernels=None, nodes="midpoint"):
    """Sum of block entropies over every angular momentum resolved by ``n_ang``."""
    kernels = _kernels_for(cfg, x, kernels)
    r = radial_nodes(x, a, nodes)
    half = n_ang // 2
    m_max = half + 1
    moments = _angular_moments((kernels.f, kernels.g), r, m_max, n_ang)
    total = 0.0
    if cfg.particle is Theory.BOSON:
        for ell in range(-half + 1, half + 1):
            total += entropy_of(boson_block(ell, r, a, cfg, moments)).S
    else:
        # m = j - 1/2 runs over one period of the angular grid
        for m in range(-half, half):
            total += entropy_of(fermion_block(2 * m + 1, r, a, cfg, moments)).S
    return total
