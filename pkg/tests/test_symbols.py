import math

import mpmath
import numpy as np
import pytest

from resolvlab.regions import SpectralPoint
from resolvlab.symbols import (
    BASELINE,
    BranchError,
    NearSingularError,
    SymbolParams,
    core_values,
    eval_M,
    eval_QQprime,
    eval_core,
    eval_lopatinski,
    eval_nJk,
    lopatinski_values,
    mollified_exp,
    mollified_exp_derivatives,
    njk_values,
)

SQ2 = math.sqrt(2.0)


def sample_region_points(n, seed, lam0=1.0, lam_hi=1e4, xi_lo=1e-3, xi_hi=1e3):
    """Re lam >= lam0 points (case C3 region at baseline zeta = 0)."""
    rng = np.random.default_rng(seed)
    re = 10.0 ** rng.uniform(np.log10(lam0), np.log10(lam_hi), size=n)
    im = rng.standard_normal(n) * re
    lam = re + 1j * im
    xi = 10.0 ** rng.uniform(np.log10(xi_lo), np.log10(xi_hi), size=n)
    xi *= rng.choice([-1.0, 1.0], size=n)
    return lam, xi


def test_core_baseline():
    core = eval_core(SpectralPoint(1.0, [0.0]), BASELINE)
    assert core.A == pytest.approx(1 / SQ2, abs=1e-15)
    assert core.B == pytest.approx(1.0, abs=1e-15)
    assert core.eta_coef == 1.0


def test_core_principal_branch():
    core = eval_core(SpectralPoint(1j, [1.0]), BASELINE)
    assert core.B == pytest.approx(complex(mpmath.sqrt(1 + 1j)), abs=1e-15)
    assert core.B.real > 0


def test_core_branch_error_off_sector():
    # lambda on the negative real axis makes B purely imaginary
    with pytest.raises(BranchError):
        eval_core(SpectralPoint(-4.0, [0.0]), BASELINE)


def test_branch_consistency_bulk():
    lam, xi = sample_region_points(10_000, seed=5)
    A, B = core_values(lam, xi**2, BASELINE)
    assert np.max(np.abs(A**2 - (lam / 2 + xi**2)) / np.abs(A**2)) < 1e-14
    assert np.max(np.abs(B**2 - (lam + xi**2)) / np.abs(B**2)) < 1e-14
    assert np.all(A.real > 0) and np.all(B.real > 0)


def test_M_at_zero_and_equal_roots():
    core = eval_core(SpectralPoint(1.0, [0.0]), BASELINE)
    assert eval_M(core, 0.0) == 0.0
    # removable singularity: M -> -x e^{-Ax} as B -> A
    from resolvlab.symbols import CoreSymbols
    m = eval_M(CoreSymbols(A=1.0, B=1.0, eta_coef=1.0), 1.0)
    assert m == pytest.approx(-math.exp(-1.0), rel=1e-12)


def test_M_baseline_against_mpmath():
    core = eval_core(SpectralPoint(1.0, [0.0]), BASELINE)
    with mpmath.workdps(40):
        a = mpmath.mpf(1) / mpmath.sqrt(2)
        exact = (mpmath.e**-1 - mpmath.e**-a) / (1 - a)
    assert eval_M(core, 1.0) == pytest.approx(float(exact), rel=1e-14)
    assert eval_M(core, 1.0) == pytest.approx(-0.4274228359774083, rel=1e-12)


def test_M_taylor_branch_matches_direct():
    # acceptance 7: at |B-A| = 1e-8 (|A|+|B|) the two branches agree
    rng = np.random.default_rng(42)
    for _ in range(200):
        A = complex(rng.uniform(0.3, 3), rng.uniform(-2, 2))
        d = 1e-8 * 2 * abs(A)
        B = A + d * complex(rng.normal(), rng.normal()) / SQ2
        x = rng.uniform(0.0, 5.0)
        direct = (np.exp(-B * x) - np.exp(-A * x)) / (B - A)
        via_code = mollified_exp(A, B, x)  # takes the Taylor branch here
        assert abs(via_code - direct) <= 1e-6 * max(abs(direct), 1e-300)


def test_M_derivative_identity():
    # central differences are the oracle for M' and M''
    lam, xi = sample_region_points(100, seed=9, lam_hi=10.0, xi_hi=3.0)
    A, B = core_values(lam, xi**2, BASELINE)
    x = np.linspace(0.5, 3.0, 6)[None, :]
    h = 1e-5
    M, M1, M2 = mollified_exp_derivatives(A[:, None], B[:, None], x)
    Mp = mollified_exp(A[:, None], B[:, None], x + h)
    Mm = mollified_exp(A[:, None], B[:, None], x - h)
    assert np.max(np.abs(M1 - (Mp - Mm) / (2 * h))) < 1e-8
    assert np.max(np.abs(M2 - (Mp - 2 * M + Mm) / h**2)) < 1e-4


def test_lopatinski_baseline_values():
    L = eval_lopatinski(SpectralPoint(1.0, [0.0]), BASELINE)
    assert L.L11 == pytest.approx(1.0, abs=1e-14)
    assert L.L12 == 0.0
    assert L.L21 == pytest.approx(2 * (1 - 1 / SQ2), abs=1e-14)
    assert L.L22 == pytest.approx(SQ2, abs=1e-14)
    assert L.detL == pytest.approx(SQ2, abs=1e-14)
    assert L.P == pytest.approx(SQ2, abs=1e-14)
    assert L.D == pytest.approx(1.0, abs=1e-14)
    assert L.N == pytest.approx(SQ2 + 1, abs=1e-14)
    assert L.Ntilde == pytest.approx(1 + 1 / SQ2, abs=1e-14)
    assert L.detL == pytest.approx(L.P * L.D, rel=1e-12)
    assert L.N == pytest.approx(L.P * L.Ntilde, rel=1e-12)
    assert L.N == pytest.approx(L.L11 * L.E - L.P * 0, rel=1e-12)  # L12 = 0 here
    assert L.form_rel_diff < 1e-13


@pytest.mark.parametrize("params", [
    BASELINE,
    SymbolParams(alpha=0.7, beta=0.9, zeta=0.2 + 0.1j, sigma=2.0, m=3.0),
    SymbolParams(alpha=2.0, beta=-0.5, zeta=0.0, sigma=0.5, m=1.0),
])
def test_lopatinski_factorizations_bulk(params):
    lam, xi = sample_region_points(10_000, seed=17)
    L = lopatinski_values(lam, xi**2, params)
    assert L.form_rel_diff < 1e-12
    scale = np.abs(L.N)
    assert np.max(np.abs(L.N - L.P * L.Ntilde) / scale) < 1e-12
    assert np.max(np.abs(L.N - (L.L11 * L.E - lam * L.L12 * L.L21)) / scale) < 1e-12
    assert np.max(np.abs(L.detL - L.P * L.D) / np.abs(L.detL)) < 1e-12


def test_lopatinski_near_singular_guard():
    # AB = |xi|^2 happens only off the region; force it through lambda -> 0
    with pytest.raises(NearSingularError):
        lopatinski_values(1e-300, 1.0, BASELINE)


def test_q_values_baseline():
    Q, Qp = eval_QQprime(SpectralPoint(1.0, [0.0]), BASELINE)
    assert Q == pytest.approx(-1 / SQ2, abs=1e-14)
    assert Qp == pytest.approx(SQ2, abs=1e-14)


def test_q_limits_along_xi_ray():
    # |xi| -> infinity with lambda fixed: xi^2 - A^2 stays at -lambda/(2a+b+z),
    # so Q tends to the finite constant -2a/(3a+b+z) (order 0, as its
    # multiplier class asserts) while Q' decays like |xi|^-2.
    lam = 2.0 + 1.0j
    xis = 10.0 ** np.linspace(0, 3, 8)
    from resolvlab.symbols import q_values
    Q = np.array([q_values(lam, x**2, BASELINE)[0] for x in xis])
    Qp = np.array([q_values(lam, x**2, BASELINE)[1] for x in xis])
    assert abs(Q[-1] - (-2.0 / 3.0)) < 1e-5
    assert np.all(np.abs(Q) < 1.0)
    assert np.all(np.abs(Qp[1:]) < np.abs(Qp[:-1]))
    assert abs(Qp[-1]) < 2e-6


def test_njk_baseline():
    n = eval_nJk(SpectralPoint(1.0, [0.0]), BASELINE)
    assert n.shape == (2, 2)
    assert n[0, 0] == 0 and n[0, 1] == 0  # i xi_j factor at xi = 0
    assert n[1, 1] == pytest.approx(1 / (1 + SQ2), abs=1e-14)
    # at xi = 0, Q = -A/B so n_N1 = -sigma A^2 / ((A+B) N)
    expect = -0.5 / ((1 / SQ2 + 1) * (SQ2 + 1))
    assert n[1, 0] == pytest.approx(expect, abs=1e-14)
    assert n[1, 0] == pytest.approx(-0.12132034355964258, rel=1e-12)


def test_njk_vectorized_matches_pointwise():
    lam, xi = sample_region_points(50, seed=23)
    nt1, nt2, nN1, nN2 = njk_values(lam, xi[:, None], BASELINE)
    for i in range(0, 50, 7):
        single = eval_nJk(SpectralPoint(lam[i], [xi[i]]), BASELINE)
        assert single[0, 0] == pytest.approx(nt1[i, 0], rel=1e-14)
        assert single[1, 0] == pytest.approx(nN1[i], rel=1e-14)
        assert single[1, 1] == pytest.approx(nN2[i], rel=1e-14)


def test_core_region_rejection_happens_at_solver_level():
    # symbol evaluation itself is pure algebra; |lambda| < lambda0 is fine here
    core = eval_core(SpectralPoint(1e-4, [0.0]), BASELINE)
    assert core.B.real > 0
