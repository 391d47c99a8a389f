"""Per-mode generators, contour-quadrature propagation and regularity norms.

The evolution semigroup is realized by inverse-Laplace quadrature on a
left-opening hyperbola

    z(theta) = mu (1 - sin(delta + i theta)),   theta in [-T, T],

whose vertex mu(1 - sin delta) is the contour offset and whose asymptotic
angle is pi/2 + delta; delta must keep the contour inside the sectorial
resolvent region.  Uniform theta steps give spectral accuracy in the
node count, with (mu, step, T) balanced for the requested time.

An expm-based propagator (scaling and squaring) is the independent
oracle for the contour path.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .grids import NormalGrid, TangentialGrid
from .regions import FluidParams, SectorSpec, in_lambda_region

EXPM_DIM_CAP = 2000


class ContourError(RuntimeError):
    """A contour node hit the spectrum or left the admissible region."""


class DimensionCapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# per-mode generator with bordered boundary rows
# ---------------------------------------------------------------------------

@dataclass
class PerModeGenerator:
    """Dense reduced generator for one tangential mode.

    State layout before reduction: [eta (n nodes), u (n nodes per
    component), h].  The stress rows at x=0 and the Dirichlet closure at
    x=X are eliminated by expressing the boundary velocity values
    through the interior ones (bordering), leaving a plain square matrix
    on [eta, u-interior, h].
    """

    matrix: np.ndarray        # reduced square generator
    reconstruct: np.ndarray   # reduced state -> full state
    project: np.ndarray       # full state -> reduced state
    full_action: np.ndarray   # un-eliminated operator on the full state
    xi: np.ndarray
    ngrid: NormalGrid

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_generator(xi, params: FluidParams, ngrid: NormalGrid) -> PerModeGenerator:
    """Assemble the block operator for one mode of the density-coupled system.

    Rows: d_t eta = -gamma1 div u; gamma1 d_t u = Div(S(u) - gamma2 eta I);
    d_t h = -u_N(0).  Constraints: tangential stress mu(u_j' + i xi_j u_N)=0
    and normal stress 2 mu u_N' + (nu-mu) div u - gamma2 eta + sigma(m+|xi|^2)h = 0
    at x=0, u = 0 at x=X.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    nd = xi.size
    nc = nd + 1
    n = ngrid.points
    D = ngrid.diff
    D2 = ngrid.diff2
    Ident = np.eye(n)
    xi2 = float(xi @ xi)
    mu, nu = params.mu, params.nu
    g1, g2 = params.gamma1, params.gamma2
    sg, m = params.sigma, params.m

    dim_full = n + nc * n + 1
    i_eta = slice(0, n)
    i_u = lambda c: slice(n + c * n, n + (c + 1) * n)  # noqa: E731
    i_h = dim_full - 1

    A = np.zeros((dim_full, dim_full), dtype=complex)
    # density row: -gamma1 (i xi . u' + u_N')
    for c in range(nd):
        A[i_eta, i_u(c)] += -g1 * 1j * xi[c] * Ident
    A[i_eta, i_u(nd)] += -g1 * D

    # velocity rows: (mu lap u + nu grad div u - gamma2 grad eta)/gamma1
    for c in range(nc):
        A[i_u(c), i_u(c)] += (mu / g1) * (D2 - xi2 * Ident)
    for c in range(nd):
        for c2 in range(nd):
            A[i_u(c), i_u(c2)] += (nu / g1) * (1j * xi[c]) * (1j * xi[c2]) * Ident
        A[i_u(c), i_u(nd)] += (nu / g1) * (1j * xi[c]) * D
        A[i_u(nd), i_u(c)] += (nu / g1) * D * (1j * xi[c])
        A[i_u(c), i_eta] += -(g2 / g1) * 1j * xi[c] * Ident
    A[i_u(nd), i_u(nd)] += (nu / g1) * D2
    A[i_u(nd), i_eta] += -(g2 / g1) * D

    # height row: d_t h = -u_N(0)
    A[i_h, i_u(nd).start] = -1.0

    # constraint rows: C x = 0
    ncon = nc + nc
    C = np.zeros((ncon, dim_full), dtype=complex)
    for c in range(nd):
        C[c, i_u(c)] = mu * D[0, :]
        C[c, n + nd * n] += mu * 1j * xi[c]
    C[nd, i_u(nd)] = 2 * mu * D[0, :] + (nu - mu) * D[0, :]
    for c in range(nd):
        C[nd, n + c * n] += (nu - mu) * 1j * xi[c]
    C[nd, 0] = -g2              # -gamma2 eta(0)
    C[nd, i_h] = sg * (m + xi2)
    for c in range(nc):
        C[nc + c, n + c * n + (n - 1)] = 1.0  # u_c(X) = 0

    # boundary unknowns: u_c at node 0 and node n-1
    b_idx = [n + c * n for c in range(nc)] + [n + c * n + (n - 1) for c in range(nc)]
    r_idx = [i for i in range(dim_full) if i not in set(b_idx)]
    Cb = C[:, b_idx]
    Cr = C[:, r_idx]
    try:
        Xel = -np.linalg.solve(Cb, Cr)     # u_b = Xel @ x_reduced
    except np.linalg.LinAlgError as exc:
        raise ContourError(f"singular boundary bordering: {exc}") from exc

    dim_red = len(r_idx)
    R = np.zeros((dim_full, dim_red), dtype=complex)
    R[r_idx, np.arange(dim_red)] = 1.0
    R[b_idx, :] = Xel
    P = np.zeros((dim_red, dim_full))
    P[np.arange(dim_red), r_idx] = 1.0

    gen = P @ A @ R
    return PerModeGenerator(matrix=gen, reconstruct=R, project=P,
                            full_action=A, xi=xi, ngrid=ngrid)


def apply_full(gen: PerModeGenerator, eta, u, h):
    """Un-eliminated operator applied to a full state (eta, u, h)."""
    n = gen.ngrid.points
    state = np.concatenate([np.asarray(eta, dtype=complex).ravel(),
                            np.asarray(u, dtype=complex).T.ravel(),
                            [complex(h)]])
    out = gen.full_action @ state
    nc = gen.xi.size + 1
    return out[:n], out[n:n + nc * n].reshape(nc, n).T, out[-1]


def pack_state(gen: PerModeGenerator, eta, u, h):
    full = np.concatenate([np.asarray(eta, dtype=complex).ravel(),
                           np.asarray(u, dtype=complex).T.ravel(),
                           [complex(h)]])
    return gen.project @ full


def unpack_state(gen: PerModeGenerator, reduced):
    full = gen.reconstruct @ np.asarray(reduced, dtype=complex)
    n = gen.ngrid.points
    nc = gen.xi.size + 1
    return full[:n], full[n:n + nc * n].reshape(nc, n).T, full[-1]


# ---------------------------------------------------------------------------
# hyperbolic contour quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Hyperbolic inverse-Laplace contour.

    angle is the asymptotic half-angle increment delta (contour angle
    pi/2 + delta), offset the vertex distance from the origin, nodes the
    quadrature node count.  Both must keep the contour inside the
    Lambda region: pi/2 + delta < pi - epsilon and offset >= lambda0.
    """

    family: str = "hyperbolic"
    angle: float = 0.7
    offset: float = 1.0
    nodes: int = 48

    def __post_init__(self):
        if self.family != "hyperbolic":
            raise ValueError("only the hyperbolic family is implemented")
        if not (0 < self.angle < math.pi / 2):
            raise ValueError("angle must lie in (0, pi/2)")
        if self.offset <= 0:
            raise ValueError("offset must be positive")
        if self.nodes < 8:
            raise ValueError("need at least 8 nodes")

    def nodes_weights(self, t: float):
        """Contour nodes z_k and the weights h z'(theta_k)/(2 pi i) e^{z_k t}.

        mu scales like nodes/t (larger contours for small times), the
        uniform step and truncation balance the discretization and tail
        errors of the trapezoid rule for analytic integrands.
        """
        if t <= 0:
            raise ValueError("time must be positive")
        M = self.nodes
        delta = self.angle
        mu = max(0.4 * M / t, self.offset / (1.0 - math.sin(delta)))
        # truncate where the tail factor exp(mu t (1 - sin(delta) cosh th))
        # falls 25 e-folds below the vertex contribution
        theta_max = math.acosh(max((0.4 * M + 25.0) / (mu * t * math.sin(delta)), 1.5))
        h = 2 * theta_max / (M - 1)
        theta = -theta_max + h * np.arange(M)
        # upward orientation: Im z increases with theta
        z = mu * (1.0 - np.sin(delta - 1j * theta))
        dz = 1j * mu * np.cos(delta - 1j * theta)
        w = h * dz / (2j * math.pi)
        return z, w

    def validate_region(self, t: float, region: SectorSpec):
        z, _ = self.nodes_weights(t)
        ok = in_lambda_region(z, region)
        if not np.all(ok):
            bad = z[~np.asarray(ok)]
            raise ContourError(f"contour node(s) outside Lambda region: {bad[:3]}")


def propagate_contour(gen, U0, t: float, contour: ContourSpec,
                      region: SectorSpec | None = None):
    """U(t) as the quadrature of e^{z t}(z - gen)^{-1} U0 over the contour."""
    A = gen.matrix if isinstance(gen, PerModeGenerator) else np.asarray(gen)
    U0 = np.asarray(U0, dtype=complex)
    if region is not None:
        contour.validate_region(t, region)
    z, w = contour.nodes_weights(t)
    eye = np.eye(A.shape[0])
    out = np.zeros_like(U0)
    for zk, wk in sorted(zip(z, w), key=lambda p: p[0].imag):
        try:
            resolvent = np.linalg.solve(zk * eye - A, U0)
        except np.linalg.LinAlgError as exc:
            raise ContourError(f"resolvent solve failed at node {zk}") from exc
        out = out + wk * cmath.exp(zk * t) * resolvent
    return out


def matrix_exponential_oracle(gen, U0, t: float):
    """e^{t gen} U0 by scaling-and-squaring Pade (backward-error bounded)."""
    A = gen.matrix if isinstance(gen, PerModeGenerator) else np.asarray(gen)
    if A.shape[0] > EXPM_DIM_CAP:
        raise DimensionCapError(f"dimension {A.shape[0]} exceeds {EXPM_DIM_CAP}")
    return expm(t * A) @ np.asarray(U0, dtype=complex)


# ---------------------------------------------------------------------------
# maximal-regularity norms
# ---------------------------------------------------------------------------

def maximal_regularity_norms(gen: PerModeGenerator, forcing, t_final: float,
                             n_steps: int, params: FluidParams,
                             gamma0: float = 1.0, p: float = 2.0) -> dict:
    """Discrete two-sided maximal-regularity quantities for one mode.

    forcing(t) returns the reduced-state data vector (d, f, k rows) of
    the inhomogeneous problem at time t; the state starts at zero and is
    advanced with an exponential midpoint rule.  The left side collects
    the weighted L_p-in-time norms of d_t U and the graph norms; the
    half-power weight applies the multiplier |gamma0 + i tau|^(1/2) on
    the Laplace side through an FFT in time.

    Returns the measured left/right quotient and both sides.
    """
    if t_final <= 0 or n_steps < 8:
        raise ValueError("need positive horizon and at least 8 steps")
    A = gen.matrix
    dt = t_final / n_steps
    Eh = expm(dt * A)
    Em = expm(0.5 * dt * A)
    times = dt * np.arange(n_steps + 1)
    dim = A.shape[0]
    U = np.zeros((n_steps + 1, dim), dtype=complex)
    F = np.array([np.asarray(forcing(t), dtype=complex) for t in times])
    for k in range(n_steps):
        U[k + 1] = Eh @ U[k] + dt * (Em @ forcing(times[k] + 0.5 * dt))

    dU = np.gradient(U, dt, axis=0)
    AU = U @ A.T

    weight = np.exp(-gamma0 * times)

    def lp_time(vals):
        return float(np.trapezoid((weight * vals) ** p, times) ** (1.0 / p))

    def half_power(series):
        # multiply by lam^(1/2), lam = gamma0 + i tau, on the Laplace side
        damped = series * weight[:, None]
        pad = np.zeros((len(times) * 3, dim), dtype=complex)
        pad[: len(times)] = damped
        tau = 2 * math.pi * np.fft.fftfreq(len(pad), d=dt)
        mult = np.sqrt(gamma0 + 1j * tau)[:, None]
        out = np.fft.ifft(mult * np.fft.fft(pad, axis=0), axis=0)[: len(times)]
        return np.abs(out)

    lhs = (lp_time(np.linalg.norm(dU, axis=1))
           + lp_time(np.linalg.norm(U, axis=1))
           + lp_time(np.linalg.norm(AU, axis=1))
           + float(np.trapezoid(
               (np.linalg.norm(half_power(U), axis=1)) ** p, times) ** (1.0 / p)))
    rhs = lp_time(np.linalg.norm(F, axis=1))
    ratio = 0.0 if rhs == 0 else lhs / rhs
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio,
            "gamma0": gamma0, "p": p, "steps": n_steps}
