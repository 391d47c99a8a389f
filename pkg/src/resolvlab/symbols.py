"""Closed-form boundary symbols for the half-space resolvent problem.

Everything here is algebra in the pair (lambda, xi'), with xi' the
tangential frequency vector and xi2 = |xi'|^2:

    A = sqrt(lambda/(2a+b+z) + xi2)     B = sqrt(lambda/a + xi2)
    M(x) = (B - A)^-1 (exp(-Bx) - exp(-Ax))

(a, b, z) are the reduced coefficients alpha, beta, zeta.  The 2x2
boundary matrix L couples the normal-velocity and divergence traces;
its determinant combines with the surface term into

    N(A, B) = lambda det L + sigma L11 (m + xi2),

whose reciprocal multiplies every solution symbol n_Jk.  Two printed
forms of L are evaluated: the direct rational entries and the
P-factored form with P = lambda / (AB - xi2); their agreement is a
cross-check recorded on every call.

All low-level evaluators broadcast over numpy arrays; the eval_*
wrappers operate on a single SpectralPoint and validate branch and
singularity conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regions import FluidParams, ReducedParams, SpectralPoint, reduce_params

NEAR_SINGULAR_REL = 1e-14
M_TAYLOR_SWITCH = 1e-6
N_FLOOR = 1e-10


class BranchError(ArithmeticError):
    """Principal square root left the right half plane (lambda outside sector)."""


class NearSingularError(ArithmeticError):
    """Denominator AB - |xi|^2 vanishes to working precision."""


class SingularSymbolError(ArithmeticError):
    """N(A, B) fell below its certified lower bound."""


@dataclass(frozen=True)
class SymbolParams:
    """Reduced coefficients consumed by the symbol formulas."""

    alpha: float
    beta: float
    zeta: complex
    sigma: float
    m: float

    @classmethod
    def from_fluid(cls, params: FluidParams, zeta=None) -> "SymbolParams":
        """Reduce FluidParams; zeta overrides the effective (already reduced) zeta."""
        red = reduce_params(params)
        z = red.zeta_prime if zeta is None else complex(zeta)
        return cls(alpha=red.alpha, beta=red.beta, zeta=z,
                   sigma=red.sigma_prime, m=params.m)

    @property
    def two_ab_z(self) -> complex:
        return 2 * self.alpha + self.beta + self.zeta

    @property
    def eta_coef(self) -> complex:
        # the paper's eta in the velocity formulas, renamed to avoid the density
        return (self.alpha + self.beta + self.zeta) / self.alpha


BASELINE = SymbolParams(alpha=1.0, beta=0.0, zeta=0.0, sigma=1.0, m=1.0)


@dataclass(frozen=True)
class CoreSymbols:
    A: object
    B: object
    eta_coef: complex


@dataclass(frozen=True)
class LopatinskiMatrix:
    L11: object
    L12: object
    L21: object
    L22: object
    detL: object
    P: object
    D: object
    N: object
    Ntilde: object
    E: object
    form_rel_diff: float  # worst relative gap between the two printed forms


# ---------------------------------------------------------------------------
# vectorized kernels
# ---------------------------------------------------------------------------

def core_values(lam, xi_sq, p: SymbolParams):
    """A, B on the principal branch; broadcasts over lam and xi_sq."""
    lam = np.asarray(lam, dtype=complex)
    xi_sq = np.asarray(xi_sq)
    A = np.sqrt(lam / p.two_ab_z + xi_sq)
    B = np.sqrt(lam / p.alpha + xi_sq)
    return A, B


def mollified_exp(A, B, x):
    """M(x) = (B-A)^-1 (e^{-Bx} - e^{-Ax}), continuous across B = A.

    Switches to the three-term Taylor expansion in (B - A) when the
    difference is below M_TAYLOR_SWITCH relative to |A| + |B|, which
    avoids catastrophic cancellation at ~1e-12 accuracy.
    """
    A, B, x = np.broadcast_arrays(np.asarray(A, dtype=complex),
                                  np.asarray(B, dtype=complex),
                                  np.asarray(x))
    delta = B - A
    scale = np.abs(A) + np.abs(B)
    small = np.abs(delta) < M_TAYLOR_SWITCH * scale
    safe_delta = np.where(small, 1.0, delta)
    direct = (np.exp(-B * x) - np.exp(-A * x)) / safe_delta
    dx = delta * x
    taylor = -x * np.exp(-A * x) * (1.0 - dx / 2.0 + dx * dx / 6.0)
    out = np.where(small, taylor, direct)
    return out if out.ndim else complex(out)


def mollified_exp_derivatives(A, B, x):
    """(M, M', M'') using dM/dx = -e^{-Bx} - A M."""
    M = mollified_exp(A, B, x)
    E = np.exp(np.asarray(B, dtype=complex) * (-np.asarray(x)))
    M1 = -E - A * M
    M2 = B * E - A * M1
    return M, M1, M2


def lopatinski_values(lam, xi_sq, p: SymbolParams, check: bool = True) -> LopatinskiMatrix:
    """Both printed forms of the boundary matrix plus the derived determinants.

    The quantities B^2 - xi2, A^2 - xi2 and AB - xi2 are evaluated by
    substituting the defining relations (lambda/a, lambda/(2a+b+z) and the
    rationalized product form); the literal differences lose ~6 digits at
    |xi| ~ 1e3 and would break the 1e-12 cross-form agreement.
    """
    lam = np.asarray(lam, dtype=complex)
    xi_sq = np.asarray(xi_sq)
    A, B = core_values(lam, xi_sq, p)
    a, bz, s2 = p.alpha, p.beta + p.zeta, p.two_ab_z
    s3 = 3 * a + p.beta + p.zeta
    # AB - xi2 = lam (lam + s3 xi2) / (a s2 (AB + xi2)), so P = lam/(AB - xi2):
    P = a * s2 * (A * B + xi_sq) / (lam + s3 * xi_sq)
    den = lam / P
    if check:
        bad = np.abs(den) < NEAR_SINGULAR_REL * (np.abs(A * B) + np.abs(xi_sq))
        if np.any(bad):
            raise NearSingularError("AB - |xi|^2 vanishes to working precision")

    B_minus_A = lam * (p.alpha + p.beta + p.zeta) / (a * s2 * (A + B))
    L11 = a * A * (lam / a) / den
    L12 = a * xi_sq * (den - B * B_minus_A) / den
    L21 = (2 * a * A * B_minus_A - bz * (lam / s2)) / den
    L22 = s2 * B * (lam / s2) / den
    detL = L11 * L22 - L12 * L21

    slope = A / (A + B) - (bz / s2) * B / (A + B)
    D = A * B * P - xi_sq * (2 * a - P) * slope
    L11b = A * P
    L12b = xi_sq * (2 * a - P)
    L21b = slope * P
    L22b = B * P

    mxi2 = p.m + xi_sq
    N = lam * detL + p.sigma * L11 * mxi2
    Ntilde = lam * D + p.sigma * A * mxi2
    E = lam * L22 + p.sigma * mxi2

    def gap(u, v):
        s = np.abs(u) + np.abs(v)
        return float(np.max(np.abs(u - v) / np.where(s > 0, s, 1.0)))

    form_rel_diff = max(gap(L11, L11b), gap(L12, L12b), gap(L21, L21b),
                        gap(L22, L22b), gap(detL, P * D))
    return LopatinskiMatrix(L11=L11, L12=L12, L21=L21, L22=L22, detL=detL,
                            P=P, D=D, N=N, Ntilde=Ntilde, E=E,
                            form_rel_diff=form_rel_diff)


def q_values(lam, xi_sq, p: SymbolParams):
    """Q = (|xi|^2 - A^2)/(AB - |xi|^2) and Q' = (AB + |xi|^2)^-1.

    xi2 - A^2 is -lambda/(2a+b+z) by definition, so Q reduces to the
    stable form -(a)(AB + xi2)/(lambda + s3 xi2) with s3 = 3a + b + z.
    """
    A, B = core_values(lam, xi_sq, p)
    s3 = 3 * p.alpha + p.beta + p.zeta
    Qp = 1.0 / (A * B + xi_sq)
    Q = -p.alpha * (A * B + xi_sq) / (np.asarray(lam, dtype=complex) + s3 * xi_sq)
    return Q, Qp


def n_floor(lam, xi_norm, c: float = N_FLOOR):
    """Certified lower-bound shape c (|lam| + |xi|) (|lam|^1/2 + |xi|)^2."""
    al = np.abs(np.asarray(lam, dtype=complex))
    return c * (al + xi_norm) * (np.sqrt(al) + xi_norm) ** 2


def njk_values(lam, xi, p: SymbolParams, floor: float = N_FLOOR, check: bool = True):
    """Solution-operator symbols n_J1, n_J2 for one or many modes.

    xi has shape (..., N-1); returns (n_t1, n_t2, n_N1, n_N2) where the
    tangential pair carries the i*xi_j factor and shares xi's shape.
    """
    xi = np.asarray(xi, dtype=float)
    xi_sq = np.sum(xi**2, axis=-1)
    lam = np.asarray(lam, dtype=complex)
    A, B = core_values(lam, xi_sq, p)
    L = lopatinski_values(lam, xi_sq, p, check=check)
    if check:
        bad = np.abs(L.N) < n_floor(lam, np.sqrt(xi_sq), floor)
        if np.any(bad):
            raise SingularSymbolError("N(A, B) below certified lower bound")

    Q, _ = q_values(lam, xi_sq, p)
    common = p.eta_coef * (L.L12 + B * L.L11) * Q / (B * (A + B) * L.N)
    ixj = 1j * xi
    n_t1 = -p.sigma * ixj * common[..., None]
    n_t2 = p.sigma * ixj * (L.L11 / (B * L.N))[..., None]
    n_N1 = p.sigma * A * common
    n_N2 = p.sigma * L.L11 / L.N
    return n_t1, n_t2, n_N1, n_N2


# ---------------------------------------------------------------------------
# single-point wrappers
# ---------------------------------------------------------------------------

def eval_core(point: SpectralPoint, params: SymbolParams) -> CoreSymbols:
    A, B = core_values(point.lam, point.xi_norm**2, params)
    A, B = complex(A), complex(B)
    if A.real <= 0 or B.real <= 0:
        raise BranchError(f"Re A = {A.real}, Re B = {B.real}: lambda outside sector")
    return CoreSymbols(A=A, B=B, eta_coef=params.eta_coef)


def eval_M(core: CoreSymbols, x_n: float) -> complex:
    if x_n < 0:
        raise ValueError("x_n must be nonnegative")
    return complex(mollified_exp(core.A, core.B, x_n))


def eval_lopatinski(point: SpectralPoint, params: SymbolParams) -> LopatinskiMatrix:
    L = lopatinski_values(point.lam, point.xi_norm**2, params)
    return LopatinskiMatrix(**{k: (complex(v) if k != "form_rel_diff" else v)
                               for k, v in vars(L).items()})


def eval_QQprime(point: SpectralPoint, params: SymbolParams):
    Q, Qp = q_values(point.lam, point.xi_norm**2, params)
    return complex(Q), complex(Qp)


def eval_nJk(point: SpectralPoint, params: SymbolParams, floor: float = N_FLOOR):
    """All 2N symbols at one point, as an (N, 2) complex array."""
    n_t1, n_t2, n_N1, n_N2 = njk_values(point.lam, point.xi, params, floor)
    out = np.empty((point.xi.size + 1, 2), dtype=complex)
    out[:-1, 0] = n_t1
    out[:-1, 1] = n_t2
    out[-1, 0] = n_N1
    out[-1, 1] = n_N2
    return out


def symbol_registry(p: SymbolParams):
    """Named scalar symbols (lam, xi_vec) -> value for the scan module.

    Orders s and types follow the multiplier classes they are scanned
    against: A, B are order 1 type 1 (A^s, B^s order s), L11/L22 order 1,
    L12 order 2, L21 order 0, detL order +-2, Q order 0, Qprime order -2,
    n_Jk order -2 and detL/N order -2 type 1 (its own bound carries the
    extra (|lam|+|xi|)^-1 factor).
    """

    def with_xi_sq(f):
        def g(lam, xi):
            xi = np.asarray(xi, dtype=float)
            return f(np.asarray(lam, dtype=complex), np.sum(xi**2, axis=-1))
        return g

    def lop(field):
        return with_xi_sq(lambda lam, xi_sq:
                          getattr(lopatinski_values(lam, xi_sq, p, check=False), field))

    reg = {
        "A": with_xi_sq(lambda lam, xi_sq: core_values(lam, xi_sq, p)[0]),
        "B": with_xi_sq(lambda lam, xi_sq: core_values(lam, xi_sq, p)[1]),
        "L11": lop("L11"), "L12": lop("L12"), "L21": lop("L21"), "L22": lop("L22"),
        "detL": lop("detL"),
        "detL_inv": with_xi_sq(lambda lam, xi_sq:
                               1.0 / lopatinski_values(lam, xi_sq, p, check=False).detL),
        "Q": with_xi_sq(lambda lam, xi_sq: q_values(lam, xi_sq, p)[0]),
        "Qprime": with_xi_sq(lambda lam, xi_sq: q_values(lam, xi_sq, p)[1]),
        "detL_over_N": with_xi_sq(lambda lam, xi_sq:
                                  (lambda L: L.detL / L.N)(
                                      lopatinski_values(lam, xi_sq, p, check=False))),
        "N_inv": with_xi_sq(lambda lam, xi_sq:
                            1.0 / lopatinski_values(lam, xi_sq, p, check=False).N),
    }

    def njk_entry(j, k):
        def g(lam, xi):
            parts = njk_values(lam, xi, p, check=False)
            if j == "N":
                return parts[2] if k == 1 else parts[3]
            return parts[0][..., j] if k == 1 else parts[1][..., j]
        return g

    reg["n11"] = njk_entry(0, 1)
    reg["n12"] = njk_entry(0, 2)
    reg["nN1"] = njk_entry("N", 1)
    reg["nN2"] = njk_entry("N", 2)
    return reg
