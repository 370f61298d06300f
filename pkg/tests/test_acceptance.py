"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a single PASS/FAIL line that is printed in the terminal
summary.  Run alone with ``pytest -m acceptance``.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg

from cmera import analysis as an
from cmera import gaussian_entropy as ge
from cmera import polar2d as pd
from cmera import transforms as tr
from cmera.correlators import THEORIES, TheoryConfig, smooth_part, tabulate
from cmera.gaussian_entropy import CorrelationBlocks
from cmera.profiles import Channel

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def report(n, ok, detail, started, limit_s):
    elapsed = time.perf_counter() - started
    ok = bool(ok) and elapsed <= limit_s
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f} s, limit {limit_s:.0f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def grid(lo, hi, n, a=None):
    xs = np.geomspace(lo, hi, n)
    return xs if a is None else np.unique(np.round(xs / a) * a)


def power(xs, ys):
    return an.fit_power(xs, np.abs(ys)).exponent


def test_c01_boson1d_log_coefficient():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="boson1d", epsilon=1e-6)
    xs = grid(10, 1000, 25)
    p1 = -an.fit_log(xs, smooth_part(cfg, Channel.PHI_PHI, xs)).slope
    ok = abs(p1 - 0.15904) <= 0.001 and abs(p1 - 1 / (2 * math.pi)) <= 0.005
    assert report(1, ok, f"p1 = {p1:.6f} (0.15904 +- 0.001, 1/2pi = {1 / (2 * math.pi):.6f} +- 0.005)",
                  t0, 60)


def test_c02_boson1d_pipi_exponent():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="boson1d", epsilon=1e-6)
    xs = grid(10, 100, 15)
    p2 = -power(xs, smooth_part(cfg, Channel.PI_PI, xs))
    predicted = an.predict_exponent(cfg, Channel.PI_PI)
    ok = abs(p2 - 2.0078) <= 0.02 and predicted == 2
    assert report(2, ok, f"p2 = {p2:.4f} (2.0078 +- 0.02), predicted {predicted}", t0, 60)


def test_c03_boson1d_central_charge():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="boson1d", epsilon=1e-6)
    a = 0.01
    xs = grid(1, 10, 12, a)
    prof = ge.entropy_profile(xs, a, cfg)
    c = an.fit_central_charge(xs, prof.S, (1.0, 10.0)).slope
    ok = abs(c - 0.987) <= 0.03
    assert report(3, ok, f"c = {c:.4f} (0.987 +- 0.03), a = {a}, window [1, 10], "
                         f"max discarded {prof.discarded_fraction.max():.2g}", t0, 1200)


def test_c04_fermion1d_central_charge():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="fermion1d")
    a = 0.1
    xs = grid(10, 100, 12, a)
    prof = ge.entropy_profile(xs, a, cfg)
    c = an.fit_central_charge(xs, prof.S, (10.0, 100.0)).slope
    ok = abs(c - 1.003) <= 0.03
    assert report(4, ok, f"c = {c:.4f} (1.003 +- 0.03), a = {a}, window [10, 100]", t0, 1800)


@pytest.mark.parametrize("theory", ["boson1d", "fermion1d"])
def test_c05_convergence_order(theory):
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory=theory)
    sweep = ge.convergence_sweep(1.28, [0.01, 0.02, 0.04, 0.08, 0.16], cfg)
    slope = ge.convergence_slope(sweep)
    ok = abs(slope - 2.0) <= 0.3
    assert report(5, ok, f"{theory} slope = {slope:.3f} (2.0 +- 0.3), x0 = 1.28, a_ref = 0.01",
                  t0, 900)


def test_c06_boson2d_exponents():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="boson2d")
    xs = grid(10, 100, 15)
    p_f = -power(xs, smooth_part(cfg, Channel.PHI_PHI, xs))
    p_g = -power(xs, smooth_part(cfg, Channel.PI_PI, xs))
    ok = abs(p_f - 2 * 0.4998) <= 0.02 and abs(p_g - 2 * 1.502) <= 0.04
    assert report(6, ok, f"phiphi {p_f:.4f} (0.9996 +- 0.02), pipi {p_g:.4f} (3.004 +- 0.04)", t0, 300)


def test_c07_fermion_exponents():
    t0 = time.perf_counter()
    far = grid(10, 100, 15)
    near = grid(1e-3, 1e-2, 8)
    out = {}
    for theory in ("fermion1d", "fermion2d"):
        cfg = TheoryConfig(theory=theory)
        out[theory] = (power(far, smooth_part(cfg, Channel.P11, far)),
                       power(far, smooth_part(cfg, Channel.P12, far)),
                       power(near, smooth_part(cfg, Channel.P12, near)))
    f1, f2 = out["fermion1d"], out["fermion2d"]
    ok = (abs(f1[0] + 2.002) <= 0.03 and abs(f1[1] + 1.004) <= 0.03 and abs(f1[2] - 0.9992) <= 0.01
          and abs(f2[0] + 3.008) <= 0.05 and abs(f2[1] + 2.005) <= 0.05
          and abs(f2[2] - 0.9994) <= 0.01)
    detail = (f"1D {f1[0]:.4f}/{f1[1]:.4f} short {f1[2]:.4f}; "
              f"2D {f2[0]:.4f}/{f2[1]:.4f} short {f2[2]:.4f}")
    assert report(7, ok, detail, t0, 600)


def test_c08_correction_coefficients():
    t0 = time.perf_counter()
    b = TheoryConfig(theory="boson1d")
    xb = grid(5, 30, 8)
    diff_b = smooth_part(b, Channel.PI_PI, xb) - smooth_part(b.with_(state="target"), Channel.PI_PI, xb)
    ratio_b = np.abs(diff_b) / (3 / (2 * math.pi * b.sigma * xb ** 4))
    f = TheoryConfig(theory="fermion1d")
    xf = grid(5, 50, 8)
    diff_f = smooth_part(f, Channel.P12, xf) - smooth_part(f.with_(state="target"), Channel.P12, xf)
    ratio_f = np.abs(diff_f) / (1 / (2 * xf ** 3))
    ok = np.all(np.abs(ratio_b - 1) <= 0.05) and np.all(np.abs(ratio_f - 1) <= 0.05)
    detail = (f"boson ratio {ratio_b.min():.3f}..{ratio_b.max():.3f}, "
              f"fermion ratio {ratio_f.min():.3f}..{ratio_f.max():.3f} (1 +- 0.05 pointwise)")
    assert report(8, ok, detail, t0, 300)


def test_c09_short_distance_estimates():
    t0 = time.perf_counter()
    worst = 0.0
    parts = []
    for theory in THEORIES:
        cfg = TheoryConfig(theory=theory)
        consts = an.short_distance_constants(cfg)
        for x in (0.02, 0.05, 0.1):
            S = ge.entropy_profile([x], x / 32, cfg, l_max=pd.L_MAX_DEFAULT).S[0]
            est = an.short_entropy(theory, x, consts)
            worst = max(worst, abs(est / S - 1))
        parts.append(theory)
    ok = worst <= 0.05
    assert report(9, ok, f"max relative deviation {worst:.2e} over {len(parts)} theories x 3 sizes (5%)",
                  t0, 600)


def test_c10_truncation_convergence():
    t0 = time.perf_counter()
    cfg = TheoryConfig(theory="boson2d")
    kernels = pd.RadialKernels(cfg, 4.0)
    changes = {}
    for x in (0.25, 0.5, 1.0, 2.0):
        cum = dict(pd.cumulative_by_order(pd.disc_entropy(x, 0.01, 3, cfg, kernels=kernels)))
        changes[x] = (abs(cum[3] - cum[0]) / cum[3], abs(cum[3] - cum[1]) / cum[3])
    ok = all(changes[x][0] < 0.01 for x in (0.25, 0.5, 1.0)) and changes[2.0][1] < 0.01
    detail = ", ".join(f"x={x}: l0->3 {changes[x][0]:.2%}" for x in (0.25, 0.5, 1.0))
    detail += f", x=2: l1->3 {changes[2.0][1]:.2%} (1%)"
    assert report(10, ok, detail, t0, 1800)


def _brute_force_fermion(rng):
    occ = rng.uniform(0.02, 0.98, 3)
    U = scipy.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    h = U @ np.diag(np.log((1 - occ) / occ)) @ U.conj().T
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for i in range(3):
        m = np.array([[1.0]])
        for k in range(3):
            m = np.kron(m, z if k < i else (lower if k == i else np.eye(2)))
        ops.append(m)
    H = sum(h[i, j] * ops[i].conj().T @ ops[j] for i in range(3) for j in range(3))
    rho = scipy.linalg.expm(-H)
    rho /= np.trace(rho).real
    p = np.linalg.eigvalsh(rho)
    p = p[p > 0]
    C = np.array([[np.trace(rho @ ops[i].conj().T @ ops[j]) for i in range(3)] for j in range(3)])
    return abs(ge.fermion_entropy(C).S + float(np.sum(p * np.log(p))))


def _thermal_oracle(rng):
    zetas = rng.uniform(0.0, 0.8, 4)
    nu = (1 + zetas) / (1 - zetas)
    A = rng.normal(size=(4, 4)) + 3 * np.eye(4)
    Ai = np.linalg.inv(A)
    blocks = CorrelationBlocks("boson", (A @ np.diag(nu / 2) @ A.T, Ai.T @ np.diag(nu / 2) @ Ai), 1.0, 4)
    n = np.arange(5000)
    ref = 0.0
    for zt in zetas:
        pn = (1 - zt) * zt ** n
        pn = pn[pn > 0]
        ref -= float(np.sum(pn * np.log(pn)))
    lam_c, _ = ge.symplectic_spectrum(blocks)
    lam_g = ge.general_symplectic_spectrum(blocks)
    spec_err = float(np.max(np.abs(np.sort(lam_c) - lam_g) / np.abs(lam_g)))
    return abs(ge.entropy_of(blocks).S - ref), spec_err


def test_c11_oracle_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240611)
    xs = np.linspace(0.0, 12.0, 49)
    g = lambda k: np.exp(-k * k)  # noqa: E731
    kg = lambda k: k * np.exp(-k * k)  # noqa: E731
    gauss_err = max(
        np.max(np.abs(tr.cos_transform(g, xs) - np.exp(-xs ** 2 / 4) / (2 * math.sqrt(math.pi)))),
        np.max(np.abs(tr.sin_transform(kg, xs) - xs * np.exp(-xs ** 2 / 4) / (4 * math.sqrt(math.pi)))),
        np.max(np.abs(tr.radial_j0_transform(g, xs) - np.exp(-xs ** 2 / 4) / (4 * math.pi))),
        np.max(np.abs(tr.radial_phase_transform(kg, xs) + xs * np.exp(-xs ** 2 / 4) / (16 * math.pi))))
    therm = [_thermal_oracle(rng) for _ in range(20)]
    therm_err = max(t[0] for t in therm)
    spec_err = max(t[1] for t in therm)
    brute_err = max(_brute_force_fermion(rng) for _ in range(20))
    product_S = []
    product_C = []
    for theory in THEORIES:
        cfg = TheoryConfig(theory=theory, state="product")
        product_S.append(ge.entropy_profile([0.5], 0.05, cfg, l_max=2).S[0])
        for ch in cfg.channels:
            product_C.append(float(np.max(np.abs(tabulate(cfg, ch, np.linspace(0, 5, 11))))))
    ok = (gauss_err <= 1e-8 and therm_err <= 1e-10 and brute_err <= 1e-10 and spec_err <= 1e-10
          and all(s == 0.0 for s in product_S) and all(c == 0.0 for c in product_C))
    detail = (f"gauss {gauss_err:.1e}, thermal {therm_err:.1e}, brute {brute_err:.1e}, "
              f"symplectic {spec_err:.1e}, product S {max(product_S)}, product C {max(product_C)}")
    assert report(11, ok, detail, t0, 120)
