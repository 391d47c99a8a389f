import math

import numpy as np
import pytest

from resolvlab.grids import (
    BoundaryField,
    HalfSpaceField,
    NormalGrid,
    TangentialGrid,
    transform_tangential,
)
from resolvlab.halfspace import (
    QuadratureError,
    ResolventData,
    VolevichQuadrature,
    chebyshev_interp_matrix,
    extend_boundary_datum,
    laplace_beltrami_resolvent_flat,
    smooth_cutoff,
    solve_full_resolvent,
    solve_lame_bvp,
    solve_surface_homogeneous,
    solve_surface_volevich,
    surface_mode_profiles,
)
from resolvlab.regions import FluidParams
from resolvlab.symbols import SymbolParams, core_values, lopatinski_values

SQ2 = math.sqrt(2.0)
BASE = FluidParams()
TG = TangentialGrid(points=64, half_length=8.0)
NG = NormalGrid(points=96, truncation=20.0)


def delta_boundary(tg, value=1.0, mode=0):
    """Spectral boundary field concentrated on a single mode."""
    vals = np.zeros(tg.mode_shape, dtype=complex)
    vals[mode] = value
    return BoundaryField(vals, tg, space="spectral")


def gaussian_boundary(tg, width=1.0, scale=1.0):
    vals = scale * np.exp(-tg.x**2 / (2 * width**2))
    return BoundaryField(vals.astype(complex), tg)


def test_smooth_cutoff_profile():
    s = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    phi = smooth_cutoff(s)
    assert np.all(phi[:3] == 1.0)
    assert 0 < phi[3] < 1
    assert phi[4] == 0.0 and phi[5] == 0.0


def test_chebyshev_interp_matrix_reproduces_nodes():
    ng = NormalGrid(points=24, truncation=10.0)
    I = chebyshev_interp_matrix(ng.nodes, ng.nodes)
    assert np.max(np.abs(I - np.eye(24))) < 1e-12
    y = np.linspace(0, 10, 57)
    I = chebyshev_interp_matrix(ng.nodes, y)
    f = np.exp(-ng.nodes)
    assert np.max(np.abs(I @ f - np.exp(-y))) < 1e-10


def test_surface_zero_mode_kinematic_identity():
    # xi = 0, khat = 1, lam = 1: h = sqrt(2)/(1+sqrt(2)) and lam h + u_N(0) = 1
    k = delta_boundary(TG)
    u, h = solve_surface_homogeneous(k, BASE, 1.0, NG)
    h00 = complex(h.values[0, 0])
    assert h00 == pytest.approx(SQ2 / (1 + SQ2), abs=1e-12)
    uN0 = complex(u.values[0, 0, TG.dims])
    assert 1.0 * h00 + uN0 == pytest.approx(1.0, abs=1e-12)
    # tangential components vanish on the zero mode (i xi_j factor)
    assert np.max(np.abs(u.values[0, :, 0])) == 0.0


def test_surface_zero_data_gives_zero():
    k = BoundaryField(np.zeros(64, dtype=complex), TG, space="spectral")
    u, h = solve_surface_homogeneous(k, BASE, 2.0 + 1.0j, NG)
    assert np.all(u.values == 0) and np.all(h.values == 0)


def test_surface_kinematic_identity_all_modes():
    k = gaussian_boundary(TG)
    lam = 3.0 + 2.0j
    u, h = solve_surface_homogeneous(k, BASE, lam, NG)
    ks = transform_tangential(k, "forward")
    us = transform_tangential(u, "forward")
    hs = transform_tangential(h, "forward")
    resid = lam * hs.values[..., 0] + us.values[..., 0, TG.dims] - ks.values[..., 0]
    scale = np.abs(ks.values[..., 0]).max()
    assert np.max(np.abs(resid)) <= 1e-10 * scale


def test_surface_boundary_stress_rows():
    # tangential: a(d_N u_j + i xi_j u_N) = 0; normal: 2a d_N u_N +
    # (b+z) div u + s(m+xi^2) h = 0, all at x = 0, analytically differentiated
    lam = 2.0 + 1.5j
    p = SymbolParams.from_fluid(BASE)
    k = gaussian_boundary(TG)
    ks = transform_tangential(k, "forward")
    u, du, d2u, hhat = surface_mode_profiles(lam, TG, NG, p, ks.values[..., 0])
    xi = TG.xi[..., 0]
    amp = np.abs(ks.values[..., 0]).max()

    tang = p.alpha * (du[..., 0, 0] + 1j * xi * u[..., 0, TG.dims])
    assert np.max(np.abs(tang)) <= 1e-8 * amp

    div0 = 1j * xi * u[..., 0, 0] + du[..., 0, TG.dims]
    norm = (2 * p.alpha * du[..., 0, TG.dims] + (p.beta + p.zeta) * div0
            + p.sigma * (p.m + TG.xi_sq) * hhat)
    assert np.max(np.abs(norm)) <= 1e-8 * amp


def test_surface_interior_ode_residual():
    # (lam + a xi^2) u - a u'' - (a+b+z)(i xi)(i xi . u' + u_N') = 0 per mode
    lam = 4.0 + 1.0j
    p = SymbolParams.from_fluid(BASE)
    k = gaussian_boundary(TG)
    ks = transform_tangential(k, "forward")
    u, du, d2u, _ = surface_mode_profiles(lam, TG, NG, p, ks.values[..., 0])
    xi = TG.xi[..., 0][..., None]
    xi2 = TG.xi_sq[..., None]
    div = 1j * xi * u[..., 0] + du[..., 1]
    ddiv = 1j * xi * du[..., 0] + d2u[..., 1]
    abz = p.alpha + p.beta + p.zeta
    r_t = (lam + p.alpha * xi2) * u[..., 0] - p.alpha * d2u[..., 0] \
        - abz * 1j * xi * div
    r_n = (lam + p.alpha * xi2) * u[..., 1] - p.alpha * d2u[..., 1] \
        - abz * ddiv
    amp = np.abs(u).max()
    assert np.max(np.abs(r_t)) <= 1e-8 * amp
    assert np.max(np.abs(r_n)) <= 1e-8 * amp


def test_volevich_two_integral_identity():
    # k(y) = e^-y and Z = B: int B e^{-B(x+y)}k - int e^{-B(x+y)} k' = e^{-Bx}
    quad = VolevichQuadrature(truncation=40.0, panels=12)
    y, w = quad.nodes_weights()
    for B in (1.0, 0.8 + 0.6j, 2.3 - 0.4j):
        x = np.linspace(0, 3, 7)
        k = np.exp(-y)
        lhs = (np.exp(-B * (x[:, None] + y)) * (B * k - (-k))) @ w
        assert np.max(np.abs(lhs - np.exp(-B * x))) < 1e-8
        if B == 1.0:
            # each of the two integrals contributes e^{-x}/2
            first = (np.exp(-(x[:, None] + y)) * k) @ w
            assert np.max(np.abs(first - 0.5 * np.exp(-x))) < 1e-10


def test_volevich_mollified_identity():
    # M(x) k(0) = int e^{-B(x+y)}k + int A M(x+y) k - int M(x+y) k'
    from resolvlab.symbols import mollified_exp

    quad = VolevichQuadrature(truncation=40.0, panels=12)
    y, w = quad.nodes_weights()
    A, B = 0.9 + 0.3j, 1.4 - 0.2j
    x = np.linspace(0, 3, 7)
    k = np.exp(-0.7 * y)
    dk = -0.7 * k
    xy = x[:, None] + y
    rhs = (np.exp(-B * xy) * k + A * mollified_exp(A, B, xy) * k
           - mollified_exp(A, B, xy) * dk) @ w
    lhs = mollified_exp(A, B, x) * 1.0
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_volevich_trace_matches_homogeneous():
    # the per-mode direct solver is the oracle for the trace of the
    # kernel-integral form
    lam = 3.0 + 1.0j
    kb = gaussian_boundary(TG)
    k_ext = extend_boundary_datum(kb, NG)
    u_vol, h_vol, err = solve_surface_volevich(k_ext, BASE, lam)
    assert err < 1e-6
    u_hom, h_hom = solve_surface_homogeneous(
        BoundaryField(transform_tangential(kb, "forward").values, TG, "spectral"),
        BASE, lam, NG)
    scale = np.abs(u_hom.values).max()
    gap = np.abs(u_vol.values[..., 0, :] - u_hom.values[..., 0, :]).max()
    assert gap <= 1e-6 * scale
    h_gap = np.abs(h_vol.values[..., 0, 0] - h_hom.values[..., 0]).max()
    assert h_gap <= 1e-6 * np.abs(h_hom.values).max()


def test_volevich_zero_trace_gives_zero_h():
    # k vanishing on the boundary drives no height
    vals = (np.exp(-TG.x**2)[:, None] * (NG.nodes * np.exp(-NG.nodes))[None, :])
    k = HalfSpaceField(vals[..., None].astype(complex), TG, NG)
    _, h, _ = solve_surface_volevich(k, BASE, 2.0)
    assert np.max(np.abs(h.values)) < 1e-13


def manufactured_lame_data(tg, lam, params, decay=1.0 + 0.0j, direction=(1.0, 0.5)):
    """v*(x) = e^{-decay x} * c per mode; returns (F, G') built analytically."""
    p = SymbolParams.from_fluid(params)
    nd = tg.dims
    c = np.asarray(direction, dtype=complex)[: nd + 1]
    xi = tg.xi
    xi_sq = tg.xi_sq

    def fields(ng):
        x = ng.nodes
        prof = np.exp(-decay * x)
        vstar = np.zeros(tg.mode_shape + (ng.points, nd + 1), dtype=complex)
        F = np.zeros_like(vstar)
        Gp = np.zeros(tg.mode_shape + (nd + 1,), dtype=complex)
        # per-mode algebra: v = c e^{-d x}, v' = -d v, v'' = d^2 v
        div = (1j * np.sum(xi * c[:nd], axis=-1) - decay * c[nd])[..., None] * prof
        abz = p.alpha + p.beta + p.zeta
        for j in range(nd):
            vstar[..., j] = c[j] * prof
            F[..., j] = ((lam + p.alpha * xi_sq)[..., None] * c[j] * prof
                         - p.alpha * decay**2 * c[j] * prof
                         - abz * 1j * xi[..., j][..., None] * div)
        vstar[..., nd] = c[nd] * prof
        F[..., nd] = ((lam + p.alpha * xi_sq)[..., None] * c[nd] * prof
                      - p.alpha * decay**2 * c[nd] * prof
                      - abz * (-decay) * div)
        for j in range(nd):
            Gp[..., j] = -(p.alpha * (-decay * c[j] + 1j * xi[..., j] * c[nd]))
        div0 = 1j * np.sum(xi * c[:nd], axis=-1) - decay * c[nd]
        Gp[..., nd] = -(2 * p.alpha * (-decay) * c[nd] + (p.beta + p.zeta) * div0)
        return vstar, F, Gp

    return fields


def test_lame_zero_data_zero_solution():
    F = HalfSpaceField(np.zeros((64, 96, 2), dtype=complex), TG, NG, "spectral")
    Gp = BoundaryField(np.zeros((64, 2), dtype=complex), TG, "spectral")
    v = solve_lame_bvp(F, Gp, BASE, 2.0)
    assert np.max(np.abs(v.values)) == 0.0


def test_lame_manufactured_solution():
    # oscillatory decay on a long box keeps the truncation floor at e^-40
    # so the measurement sees pure collocation error
    lam = 2.0 + 0.7j
    make = manufactured_lame_data(TG, lam, BASE, decay=1.0 + 2.0j)
    ng = NormalGrid(points=64, truncation=40.0)
    vstar, F, Gp = make(ng)
    v = solve_lame_bvp(HalfSpaceField(F, TG, ng, "spectral"),
                       BoundaryField(Gp, TG, "spectral"), BASE, lam)
    err = np.abs(v.values - vstar)
    assert np.max(err) <= 1e-8 * np.abs(vstar).max()


def test_lame_spectral_convergence():
    lam = 2.0 + 0.7j
    make = manufactured_lame_data(TG, lam, BASE, decay=1.0 + 2.0j)
    errs = []
    for n in (32, 64):
        ng = NormalGrid(points=n, truncation=40.0)
        vstar, F, Gp = make(ng)
        v = solve_lame_bvp(HalfSpaceField(F, TG, ng, "spectral"),
                           BoundaryField(Gp, TG, "spectral"), BASE, lam)
        errs.append(np.max(np.abs(v.values - vstar)) / np.abs(vstar).max())
    assert errs[1] <= errs[0] / 10


def gaussian_data(tg, ng, seed=0):
    rng = np.random.default_rng(seed)
    x = tg.x
    t = ng.nodes

    def bump(width_x, width_t, x0=0.0):
        g = np.exp(-((x - x0) ** 2) / (2 * width_x**2))
        decay = np.exp(-(t**2) / (2 * width_t**2))
        return g[:, None] * decay[None, :]

    d = HalfSpaceField((0.5 * bump(1.0, 2.0, 0.5))[..., None].astype(complex), tg, ng)
    Fv = np.stack([bump(1.0, 1.5, -0.4), 0.7 * bump(0.9, 2.5, 0.4)], axis=-1)
    F = HalfSpaceField(Fv.astype(complex), tg, ng)
    gb = np.exp(-(x**2) / 2)
    G = BoundaryField(np.stack([0.3 * gb, -0.6 * gb], axis=-1).astype(complex), tg)
    K = BoundaryField((0.8 * np.exp(-(x - 0.3) ** 2)).astype(complex), tg)
    return ResolventData(d=d, F=F, G=G, K=K)


def test_full_resolvent_zero_data():
    z = np.zeros((64, 96, 1), dtype=complex)
    data = ResolventData(
        d=HalfSpaceField(z, TG, NG, "spectral"),
        F=HalfSpaceField(np.zeros((64, 96, 2), dtype=complex), TG, NG, "spectral"),
        G=BoundaryField(np.zeros((64, 2), dtype=complex), TG, "spectral"),
        K=BoundaryField(np.zeros(64, dtype=complex), TG, "spectral"),
    )
    sol = solve_full_resolvent(data, BASE, 4.0, check_support=False)
    assert np.max(np.abs(sol.u.values)) == 0.0
    assert np.max(np.abs(sol.h.values)) == 0.0
    assert np.max(np.abs(sol.eta.values)) == 0.0


def test_full_resolvent_k_only_reduces_to_surface_solver():
    data = gaussian_data(TG, NG)
    z = np.zeros_like(data.d.values)
    data_k = ResolventData(
        d=HalfSpaceField(z, TG, NG),
        F=HalfSpaceField(np.zeros_like(data.F.values), TG, NG),
        G=BoundaryField(np.zeros_like(data.G.values), TG),
        K=data.K,
    )
    lam = 4.0
    sol = solve_full_resolvent(data_k, BASE, lam)  # solution in spectral space
    K_spec = transform_tangential(data_k.K, "forward")
    u_ref, h_ref = solve_surface_homogeneous(K_spec, BASE, lam, NG,
                                             zeta=BASE.gamma2 / lam)
    assert np.max(np.abs(sol.v.values)) == 0.0
    assert np.max(np.abs(sol.u.values - u_ref.values)) <= 1e-12 * np.abs(u_ref.values).max()
    assert np.max(np.abs(sol.h.values - h_ref.values)) <= 1e-12 * np.abs(h_ref.values).max()


def test_full_resolvent_linearity():
    lam = 4.0 + 0.5j
    d1 = gaussian_data(TG, NG, seed=1)
    d2 = gaussian_data(TG, NG, seed=2)
    a, b = 2.0, -0.7 + 0.3j

    def combine(x, y):
        return ResolventData(
            d=HalfSpaceField(a * x.d.values + b * y.d.values, TG, NG),
            F=HalfSpaceField(a * x.F.values + b * y.F.values, TG, NG),
            G=BoundaryField(a * x.G.values + b * y.G.values, TG),
            K=BoundaryField(a * x.K.values + b * y.K.values, TG),
        )

    s1 = solve_full_resolvent(d1, BASE, lam)
    s2 = solve_full_resolvent(d2, BASE, lam)
    s12 = solve_full_resolvent(combine(d1, d2), BASE, lam, check_support=False)
    for fld, f1, f2 in ((s12.u, s1.u, s2.u), (s12.h, s1.h, s2.h),
                        (s12.eta, s1.eta, s2.eta)):
        lin = a * f1.values + b * f2.values
        assert np.max(np.abs(fld.values - lin)) <= 1e-12 * max(np.abs(lin).max(), 1e-30)


def test_laplace_beltrami_flat():
    f = delta_boundary(TG, 1.0, mode=4)  # |xi| = pi 4/8
    out = laplace_beltrami_resolvent_flat(f, 1.0)
    xi2 = TG.xi_sq[4]
    assert out.values[4, 0] == pytest.approx(1.0 / (1.0 + xi2), rel=1e-14)

    # applying (lam - Lap') after the inverse returns the input
    g = gaussian_boundary(TG)
    inv = laplace_beltrami_resolvent_flat(g, 2.5)
    gs = transform_tangential(g, "forward")
    invs = transform_tangential(inv, "forward")
    back = (2.5 + TG.xi_sq)[:, None] * invs.values
    assert np.max(np.abs(back - gs.values)) <= 1e-13 * np.abs(gs.values).max()

    # m as the spectral parameter reproduces the (m - Lap')^-1 factor
    m_out = laplace_beltrami_resolvent_flat(g, BASE.m)
    ms = transform_tangential(m_out, "forward")
    assert np.allclose((BASE.m + TG.xi_sq)[:, None] * ms.values, gs.values,
                       rtol=0, atol=1e-13 * np.abs(gs.values).max())
