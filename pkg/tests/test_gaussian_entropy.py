import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from cmera import gaussian_entropy as ge
from cmera.correlators import TheoryConfig
from cmera.gaussian_entropy import CorrelationBlocks

# mpmath: (3/2) ln 3 - ln 2
THERMAL_THIRD = 0.95477125244221922768


def thermal_sum(zeta, n_max=4000):
    n = np.arange(n_max)
    p = (1.0 - zeta) * zeta ** n
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def test_thermal_reference_values():
    assert ge.thermal_entropy(np.array([0.5]))[0] == pytest.approx(2 * math.log(2), abs=1e-15)
    assert ge.thermal_entropy(np.array([1 / 3]))[0] == pytest.approx(THERMAL_THIRD, abs=1e-15)
    assert ge.thermal_entropy(np.array([0.0]))[0] == 0.0


@given(st.floats(1e-6, 0.95))
def test_thermal_matches_occupation_sum(zeta):
    assert ge.thermal_entropy(np.array([zeta]))[0] == pytest.approx(thermal_sum(zeta), abs=1e-10)


def _random_boson_state(rng, zetas):
    # thermal modes with <phi^2><pi^2> = nu^2/4, dressed by phi -> A phi, pi -> A^-T pi
    nu = (1 + zetas) / (1 - zetas)
    r = rng.uniform(0.3, 3.0, zetas.size)
    d1, d2 = 0.5 * nu * r, 0.5 * nu / r
    A = rng.normal(size=(zetas.size, zetas.size)) + 3 * np.eye(zetas.size)
    Ainv = np.linalg.inv(A)
    return CorrelationBlocks("boson", (A @ np.diag(d1) @ A.T, Ainv.T @ np.diag(d2) @ Ainv), 1.0,
                             zetas.size)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_boson_entropy_thermal_oracle(seed, n):
    rng = np.random.default_rng(seed)
    zetas = rng.uniform(0.0, 0.8, n)
    res = ge.entropy_of(_random_boson_state(rng, zetas))
    assert res.S == pytest.approx(sum(thermal_sum(z) for z in zetas), abs=1e-10)
    assert not res.fallback


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_cholesky_and_general_spectra_agree(seed, n):
    rng = np.random.default_rng(seed)
    blocks = _random_boson_state(rng, rng.uniform(0.0, 0.8, n))
    lam_c, flag = ge.symplectic_spectrum(blocks)
    lam_g = ge.general_symplectic_spectrum(blocks)
    assert not flag
    np.testing.assert_allclose(np.sort(lam_c), lam_g, rtol=1e-10, atol=1e-12)


def test_cholesky_fallback_flag():
    cpp = np.array([[1.0, 0.0], [0.0, -1e-3]])
    cqq = np.array([[0.25, 0.0], [0.0, -250.0]])
    res = ge.entropy_of(CorrelationBlocks("boson", (cpp, cqq), 1.0, 2))
    assert res.fallback
    np.testing.assert_allclose(np.sort(res.spectrum), [0.25, 0.25])


def _jordan_wigner(n):
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for i in range(n):
        m = np.array([[1.0]])
        for k in range(n):
            m = np.kron(m, z if k < i else (a if k == i else np.eye(2)))
        ops.append(m)
    return ops


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1))
def test_fermion_entropy_three_mode_brute_force(seed):
    rng = np.random.default_rng(seed)
    occ = rng.uniform(0.02, 0.98, 3)
    U = scipy.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    eps = np.log((1 - occ) / occ)
    h = U @ np.diag(eps) @ U.conj().T
    c = _jordan_wigner(3)
    H = sum(h[i, j] * c[i].conj().T @ c[j] for i in range(3) for j in range(3))
    rho = scipy.linalg.expm(-H)
    rho /= np.trace(rho).real
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-300]
    S_brute = float(-np.sum(p * np.log(p)))
    C = np.array([[np.trace(rho @ c[i].conj().T @ c[j]) for i in range(3)] for j in range(3)])
    assert ge.fermion_entropy(C).S == pytest.approx(S_brute, abs=1e-10)
    np.testing.assert_allclose(np.linalg.eigvalsh(C), np.sort(occ), atol=1e-10)


def test_fermion_clamp_and_discard():
    res = ge.fermion_entropy(np.diag([-1e-12, 0.5, 1.0 + 1e-12, -0.2]))
    assert res.n_discarded == 1
    assert res.discarded_fraction == 0.25
    assert res.S == pytest.approx(math.log(2), abs=1e-14)


def test_boson_discard_below_quarter():
    res = ge.boson_entropy(np.array([0.25, 0.2, 1.0]))
    assert res.n_discarded == 1
    assert res.S == pytest.approx(ge.thermal_entropy(np.array([1 / 3]))[0], abs=1e-14)


def test_single_mode_matrix():
    blocks = CorrelationBlocks("boson", (np.array([[0.5]]), np.array([[2.0]])), 1.0, 1)
    assert ge.entropy_of(blocks).S == pytest.approx(ge.thermal_entropy(np.array([1 / 3]))[0])
    assert ge.fermion_entropy(np.array([[0.5]])).S == pytest.approx(math.log(2))
    assert ge.boson_entropy(np.empty(0)).S == 0.0


@pytest.mark.parametrize("theory", ["boson1d", "fermion1d"])
def test_product_state_exactly_pure(theory):
    cfg = TheoryConfig(theory=theory, state="product")
    prof = ge.entropy_profile([0.5, 1.0], 0.05, cfg)
    assert np.all(prof.S == 0.0)
    assert np.all(prof.discarded_fraction == 0.0)


def test_two_site_structure():
    cfg = TheoryConfig(theory="boson1d")
    a = 0.1
    blocks = ge.sample_interval_boson(2 * a, a, cfg)
    cpp, cqq = blocks.matrices
    table = ge.LatticeTable(cfg, a, ("phiphi", "pipi"))
    f = table.get("phiphi", 2)
    g = table.get("pipi", 2)
    assert cpp[0, 1] == cpp[1, 0] == f[1]
    assert cqq[0, 1] == pytest.approx(a * a * g[1], rel=1e-15)
    assert cpp[0, 0] == pytest.approx(0.5 / a + f[0], rel=1e-15)
    assert cqq[0, 0] == pytest.approx(0.5 * a + a * a * g[0], rel=1e-15)


def test_fermion_matrix_is_real_symmetric_and_physical():
    cfg = TheoryConfig(theory="fermion1d")
    C = ge.sample_interval_fermion(2.0, 0.1, cfg).matrices[0]
    assert np.isrealobj(C)
    np.testing.assert_array_equal(C, C.T)
    ev = np.linalg.eigvalsh(C)
    assert ev.min() > -1e-9 and ev.max() < 1 + 1e-9


def test_boson_uncertainty_respected():
    cfg = TheoryConfig(theory="boson1d")
    lam, _ = ge.symplectic_spectrum(ge.sample_interval_boson(1.0, 0.05, cfg))
    assert lam.min() > 0.25 - 1e-9


def test_memory_budget():
    cfg = TheoryConfig(theory="boson1d")
    with pytest.raises(ge.MemoryBudgetError, match="use a >="):
        ge.sample_interval_boson(100.0, 0.01, cfg)


def test_invalid_regions():
    cfg = TheoryConfig(theory="fermion1d")
    with pytest.raises(ValueError):
        ge.n_sites(0.1, 0.1)
    with pytest.raises(ValueError):
        ge.entropy_profile([], 0.1, cfg)
    with pytest.raises(ValueError):
        ge.entropy_profile([0.3], 0.2, cfg)
    with pytest.raises(ValueError):
        ge.interval_entropy(1.0, 0.1, TheoryConfig(theory="boson2d"))


def test_workers_do_not_change_results():
    cfg = TheoryConfig(theory="fermion1d")
    xs = [1.0, 2.0, 3.0, 4.0]
    one = ge.entropy_profile(xs, 0.1, cfg, workers=1)
    two = ge.entropy_profile(xs, 0.1, cfg, workers=2)
    np.testing.assert_array_equal(one.S, two.S)
    assert list(one.rows())[0][:3] == (1.0, one.S[0], 0.1)


def test_convergence_sweep_reference_and_slope():
    cfg = TheoryConfig(theory="fermion1d")
    sweep = ge.convergence_sweep(1.28, [0.04, 0.08, 0.04, 0.16], cfg)
    assert sweep[0] == (0.04, 0.0) and sweep[2] == (0.04, 0.0)
    assert sweep[1][1] > 0
    assert ge.convergence_slope(sweep) > 1.0
    with pytest.raises(ValueError):
        ge.convergence_slope([(0.1, 0.0), (0.2, 1e-3)])


def test_stitch_profiles():
    cfg = TheoryConfig(theory="fermion1d")
    coarse = ge.entropy_profile([2.0, 4.0], 0.2, cfg)
    fine = ge.entropy_profile([1.0, 2.0], 0.1, cfg)
    xs, S = ge.stitch_profiles([coarse, fine])
    np.testing.assert_array_equal(xs, [1.0, 2.0, 4.0])
    assert S[1] == fine.S[1]
    with pytest.raises(ValueError):
        ge.stitch_profiles([coarse, fine], rtol=1e-9)
