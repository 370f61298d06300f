"""Sampled correlation matrices and Gaussian-state entanglement entropy.

A region of length ``x`` is sampled at ``N = round(x/a)`` points.  Fields of
scaling dimension Delta pick up a factor ``a^Delta`` each and ``delta(x - y)``
becomes ``delta_ij / a``.  Entropies are in nats throughout.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import correlators as corr
from .profiles import Channel

TOL_EIG_REL = 1e-9
MAX_MATRIX_DIM = 8000


class MemoryBudgetError(ValueError):
    """The requested matrix would exceed the configured dimension budget."""


@dataclass
class CorrelationBlocks:
    """Sampled correlation matrices of one region (or one angular block).

    ``matrices`` is ``(C_phiphi, C_pipi)`` for bosons and ``(C,)`` for
    fermions, where C is indexed by (component, site).
    """

    kind: str
    matrices: tuple
    a: float
    N: int
    block_label: object = None


@dataclass
class EntropyResult:
    """Entropy in nats, the spectrum it came from and the discard bookkeeping."""

    S: float
    spectrum: np.ndarray
    discarded_fraction: float = 0.0
    n_discarded: int = 0
    fallback: bool = False
    blocks: list = field(default_factory=list)


@dataclass
class EntropyProfile:
    """S(x) on a list of region sizes, with the settings that produced it."""

    x: np.ndarray
    S: np.ndarray
    a: float
    discarded_fraction: np.ndarray
    config: dict
    l_max: object = None
    results: list = field(default_factory=list)

    def rows(self):
        for i in range(len(self.x)):
            yield self.x[i], self.S[i], self.a, self.discarded_fraction[i]


# ---------------------------------------------------------------------------
# spectra and entropies
# ---------------------------------------------------------------------------

def thermal_entropy(zeta):
    """Entropy of one bosonic mode with Boltzmann ratio ``zeta`` in [0, 1)."""
    z = np.asarray(zeta, dtype=float)
    out = np.zeros(z.shape)
    pos = z > 0
    zp = z[pos]
    out[pos] = -zp * np.log(zp) / (1.0 - zp) - np.log1p(-zp)
    return out


def binary_entropy(lam):
    """-l ln l - (1-l) ln(1-l) with 0 ln 0 = 0."""
    l = np.asarray(lam, dtype=float)
    out = np.zeros(l.shape)
    inner = (l > 0) & (l < 1)
    li = l[inner]
    out[inner] = -li * np.log(li) - (1.0 - li) * np.log1p(-li)
    return float(out) if out.ndim == 0 else out


def symplectic_spectrum(blocks):
    """Eigenvalues of ``C_phiphi C_pipi`` for a bosonic block.

    Uses the Cholesky factor ``C_phiphi = L L^T`` so that the symmetric
    matrix ``L^T C_pipi L`` carries the same spectrum.  If ``C_phiphi`` is not
    numerically positive definite the product is diagonalised directly and
    the returned flag is True.
    """
    cpp, cqq = blocks.matrices
    try:
        L = scipy.linalg.cholesky(cpp, lower=True)
        M = L.T @ cqq @ L
        lam = scipy.linalg.eigvalsh(0.5 * (M + M.T))
        return lam, False
    except np.linalg.LinAlgError:
        return general_symplectic_spectrum(blocks), True


def general_symplectic_spectrum(blocks):
    """Spectrum of ``C_phiphi C_pipi`` from a nonsymmetric eigensolve."""
    cpp, cqq = blocks.matrices
    ev = scipy.linalg.eigvals(cpp @ cqq)
    scale = max(float(np.max(np.abs(ev))), 1.0)
    if np.max(np.abs(ev.imag)) > 1e-8 * scale:
        raise np.linalg.LinAlgError("symplectic spectrum has a large imaginary part")
    return np.sort(ev.real)


def boson_entropy(lams, tol_eig=None):
    """Entropy of a bosonic Gaussian state from its symplectic spectrum.

    Modes within ``tol_eig`` of 1/4 are pure and contribute exactly 0; modes
    further below 1/4 are unphysical sampling artefacts, discarded and counted.
    ``tol_eig`` defaults to ``1e-9 * max|lambda|``.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.size == 0:
        return EntropyResult(0.0, lams)
    if tol_eig is None:
        tol_eig = TOL_EIG_REL * float(np.max(np.abs(lams)))
    mixed = lams > 0.25 + tol_eig
    bad = lams < 0.25 - tol_eig
    s = np.sqrt(lams[mixed])
    zeta = (2.0 * s - 1.0) / (2.0 * s + 1.0)
    S = float(np.sum(thermal_entropy(zeta)))
    nd = int(np.count_nonzero(bad))
    return EntropyResult(S, lams, nd / lams.size, nd)


def fermion_entropy(C, tol_eig=None):
    """Entropy of a fermionic Gaussian state from its correlation matrix.

    Eigenvalues within ``tol_eig`` outside [0, 1] are clamped, those further
    out are discarded and counted.
    """
    if isinstance(C, CorrelationBlocks):
        C = C.matrices[0]
    C = np.asarray(C)
    ev = scipy.linalg.eigvalsh(C)
    if ev.size == 0:
        return EntropyResult(0.0, ev)
    if tol_eig is None:
        tol_eig = TOL_EIG_REL * max(float(np.max(np.abs(ev))), 1.0)
    bad = (ev < -tol_eig) | (ev > 1.0 + tol_eig)
    good = np.clip(ev[~bad], 0.0, 1.0)
    S = float(np.sum(binary_entropy(good)))
    nd = int(np.count_nonzero(bad))
    return EntropyResult(S, ev, nd / ev.size, nd)


def entropy_of(blocks, tol_eig=None):
    """Dispatch on ``blocks.kind``."""
    if blocks.kind == "boson":
        lam, flag = symplectic_spectrum(blocks)
        res = boson_entropy(lam, tol_eig)
        res.fallback = flag
        return res
    return fermion_entropy(blocks.matrices[0], tol_eig)


# ---------------------------------------------------------------------------
# 1D sampling
# ---------------------------------------------------------------------------

def _check_budget(dim, x, a):
    if dim > MAX_MATRIX_DIM:
        factor = dim / MAX_MATRIX_DIM
        raise MemoryBudgetError(
            f"x/a = {x / a:.0f} needs a {dim}x{dim} matrix (budget {MAX_MATRIX_DIM}); "
            f"use a >= {a * factor:.3g}")


def n_sites(x, a):
    n = int(round(x / a))
    if n < 2:
        raise ValueError(f"x/a = {x / a:.3g} gives fewer than 2 sites")
    return n


class LatticeTable:
    """Smooth parts at lattice separations ``m a``, computed once and grown on demand."""

    def __init__(self, cfg, a, channels):
        self.cfg = cfg
        self.a = float(a)
        self.channels = tuple(Channel(c) for c in channels)
        self.values = {c: np.empty(0) for c in self.channels}

    def get(self, channel, n):
        channel = Channel(channel)
        have = self.values[channel]
        if have.size < n:
            seps = self.a * np.arange(n)
            self.values[channel] = np.asarray(corr.tabulate(self.cfg, channel, seps), dtype=float)
        return self.values[channel][:n]


def _toeplitz_abs(vals, n):
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return vals[idx]


def sample_interval_boson(x, a, cfg, table=None):
    """``C_phiphi = delta/(2 Lambda a) + f(|i-j|a)``, ``C_pipi = Lambda a delta/2 + a^2 g``."""
    if cfg.theory != "boson1d":
        raise ValueError("sample_interval_boson needs the boson1d theory")
    n = n_sites(x, a)
    _check_budget(n, x, a)
    table = table or LatticeTable(cfg, a, (Channel.PHI_PHI, Channel.PI_PI))
    f = table.get(Channel.PHI_PHI, n)
    g = table.get(Channel.PI_PI, n)
    eye = np.eye(n)
    cpp = eye * (corr.delta_coefficient(cfg, Channel.PHI_PHI) / a) + _toeplitz_abs(f, n)
    cqq = eye * (corr.delta_coefficient(cfg, Channel.PI_PI) * a) + a * a * _toeplitz_abs(g, n)
    return CorrelationBlocks("boson", (cpp, cqq), a, n)


def sample_interval_fermion(x, a, cfg, table=None):
    """2N x 2N matrix ``[[a P11, a P12], [a P12^T, 1 - a P11]]`` over (component, site)."""
    if cfg.theory != "fermion1d":
        raise ValueError("sample_interval_fermion needs the fermion1d theory")
    n = n_sites(x, a)
    _check_budget(2 * n, x, a)
    table = table or LatticeTable(cfg, a, (Channel.P11, Channel.P12))
    p11 = table.get(Channel.P11, n)
    p12 = table.get(Channel.P12, n)
    diff = np.subtract.outer(np.arange(n), np.arange(n))
    c11 = a * p11[np.abs(diff)] + np.eye(n) * corr.delta_coefficient(cfg, Channel.P11)
    c12 = a * np.sign(diff) * p12[np.abs(diff)]
    c22 = np.eye(n) * corr.delta_coefficient(cfg, Channel.P22) - a * p11[np.abs(diff)]
    C = np.block([[c11, c12], [c12.T, c22]])
    return CorrelationBlocks("fermion", (C,), a, n)


def interval_entropy(x, a, cfg, table=None, tol_eig=None):
    """Entropy of an interval of length ``x`` sampled with spacing ``a``."""
    if cfg.theory == "boson1d":
        blocks = sample_interval_boson(x, a, cfg, table)
    elif cfg.theory == "fermion1d":
        blocks = sample_interval_fermion(x, a, cfg, table)
    else:
        raise ValueError("interval_entropy is for 1D theories; use polar2d.disc_entropy")
    return entropy_of(blocks, tol_eig)


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def entropy_profile(xs, a, cfg, l_max=None, workers=1, tol_eig=None, **disc_kw):
    """S(x) for every region size in ``xs``.

    1D theories sample intervals, 2D theories sum angular blocks of a disc up
    to ``l_max`` (boson) or ``|j| <= l_max + 1/2`` (fermion).  Results are
    returned in the order of ``xs`` whatever the worker count.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("no region sizes given")
    if a > np.min(xs) / 2:
        raise ValueError("spacing must satisfy a <= min(x)/2")
    if cfg.dim == 1:
        # fail before any tabulation work
        x_top = float(np.max(xs))
        _check_budget(n_sites(x_top, a) * (1 if cfg.theory == "boson1d" else 2), x_top, a)
        table = LatticeTable(cfg, a, (Channel.PHI_PHI, Channel.PI_PI) if cfg.theory == "boson1d"
                             else (Channel.P11, Channel.P12))
        table.get(table.channels[0], n_sites(np.max(xs), a))
        table.get(table.channels[1], n_sites(np.max(xs), a))
        results = _map(lambda x: interval_entropy(x, a, cfg, table, tol_eig), xs, workers)
    else:
        from . import polar2d
        kernels = polar2d.RadialKernels(cfg, 2.0 * float(np.max(xs)))
        results = _map(lambda x: polar2d.disc_entropy(x, a, l_max, cfg, kernels=kernels,
                                                      tol_eig=tol_eig, **disc_kw), xs, workers)
    S = np.array([r.S for r in results])
    disc = np.array([r.discarded_fraction for r in results])
    return EntropyProfile(xs, S, float(a), disc, cfg.to_dict(), l_max, results)


def convergence_sweep(x0, spacings, cfg, l_max=None, workers=1):
    """``|S(x0, a) - S(x0, a_ref)|`` for each spacing, ``a_ref = min(spacings)``.

    Returns a list of ``(a, difference)`` pairs in the order of ``spacings``
    (the reference itself included, with difference 0).
    """
    spacings = [float(s) for s in spacings]
    if not spacings:
        raise ValueError("no spacings given")
    a_ref = min(spacings)

    def one(a):
        return entropy_profile([x0], a, cfg, l_max=l_max).S[0]

    uniq = sorted(set(spacings))
    vals = dict(zip(uniq, _map(one, uniq, workers)))
    return [(a, abs(vals[a] - vals[a_ref])) for a in spacings]


def convergence_slope(sweep):
    """Log-log slope of the nonzero differences of a ``convergence_sweep``."""
    pts = [(a, d) for a, d in sweep if d > 0]
    if len(pts) < 2:
        raise ValueError("need at least two nonzero differences")
    la = np.log([p[0] for p in pts])
    ld = np.log([p[1] for p in pts])
    return float(np.polyfit(la, ld, 1)[0])


def stitch_profiles(profiles, rtol=0.02):
    """Join profiles computed with different spacings.

    Overlapping region sizes must agree within ``rtol``; the finer spacing
    wins at shared points.
    """
    pts = {}
    for p in sorted(profiles, key=lambda p: -p.a):
        for x, s in zip(p.x, p.S):
            key = round(float(x), 12)
            if key in pts and abs(pts[key] - s) > rtol * max(abs(s), 1e-12):
                raise ValueError(f"profiles disagree at x = {x}: {pts[key]} vs {s}")
            pts[key] = s
    xs = np.array(sorted(pts))
    return xs, np.array([pts[x] for x in xs])
