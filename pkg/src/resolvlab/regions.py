"""Scalar parameters and complex-plane region geometry.

The resolvent parameter lambda lives in one of three nested regions:

    Sigma(eps)            |arg z| <= pi - eps, z != 0
    Sigma(eps, lam0)      additionally |z| >= lam0
    Lambda(eps, lam0)     additionally outside the disk of radius
                          rho3/nu + eps centered at -(rho3/nu + eps)
    Gamma(eps, lam0, zeta) case-dependent:
        C1  (zeta ~ 1/lambda)          -> Lambda(eps, lam0)
        C2  (zeta in Sigma, Re zeta<0) -> Re lam >= |Re z / Im z| |Im lam|,
                                          Re lam >= lam0
        C3  (Re zeta >= 0)             -> Re lam >= lam0

All membership tests are closed-set tests with an absolute boundary
tolerance of 1e-12; boundary points count as inside.  lambda = 0 is
always rejected.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOL = 1e-12

ZETA_CASES = ("C1", "C2", "C3")


class RegionError(ValueError):
    """A spectral parameter lies outside the admissible region."""


class DegenerateCaseError(ValueError):
    """A zeta-case condition is undefined (e.g. C2 with Im zeta = 0)."""


@dataclass(frozen=True)
class FluidParams:
    """Physical constants of the linearized free-surface model.

    mu, nu are the viscosities, sigma the surface tension, m the surface
    mass constant, gamma1/gamma3 the density/pressure weights and zeta
    the complex perturbation parameter with |zeta| <= zeta0.  rho1..rho3
    bracket the gamma's: rho1 <= gamma1 <= rho2 and 0 < gamma3 <= rho3.
    """

    mu: float = 1.0
    nu: float = 1.0
    sigma: float = 1.0
    m: float = 1.0
    gamma1: float = 1.0
    gamma3: float = 1.0
    zeta: complex = 0.0
    zeta0: float = 1.0
    rho1: float = 1.0
    rho2: float = 1.0
    rho3: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.nu > 0 and self.m > 0):
            raise ValueError("mu, nu, m must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if abs(self.zeta) > self.zeta0 + BOUNDARY_TOL:
            raise ValueError("|zeta| exceeds zeta0")
        if not (0 < self.rho1 <= self.gamma1 <= self.rho2):
            raise ValueError("need 0 < rho1 <= gamma1 <= rho2")
        if not (0 < self.gamma3 <= self.rho3):
            raise ValueError("need 0 < gamma3 <= rho3")

    @property
    def gamma2(self) -> float:
        # gamma3 factors as gamma1*gamma2 in the density-coupled system
        return self.gamma3 / self.gamma1


@dataclass(frozen=True)
class ReducedParams:
    """Rescaled coefficients used by the half-space solvers."""

    alpha: float
    beta: float
    zeta_prime: complex
    sigma_prime: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta = nu/gamma1 must be positive")


def reduce_params(params: FluidParams) -> ReducedParams:
    """Rescale (mu, nu, zeta, sigma) by 1/gamma1."""
    g = params.gamma1
    return ReducedParams(
        alpha=params.mu / g,
        beta=(params.nu - params.mu) / g,
        zeta_prime=params.gamma3 * params.zeta / g,
        sigma_prime=params.sigma / g,
    )


@dataclass(frozen=True)
class SectorSpec:
    """Shape of the admissible lambda region."""

    epsilon: float = math.pi / 4
    lambda0: float = 1.0
    zeta_case: str = "C3"
    rho3_over_nu: float = 1.0  # disk parameter of the Lambda region

    def __post_init__(self):
        if not (0 < self.epsilon < math.pi / 2):
            raise ValueError("epsilon must lie in (0, pi/2)")
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be nonnegative")
        if self.zeta_case not in ZETA_CASES:
            raise ValueError(f"zeta_case must be one of {ZETA_CASES}")

    @classmethod
    def for_params(cls, params: FluidParams, epsilon: float = math.pi / 4,
                   lambda0: float = 1.0, zeta_case: str | None = None) -> "SectorSpec":
        if zeta_case is None:
            zeta_case = classify_zeta(params.zeta, epsilon)
        return cls(epsilon=epsilon, lambda0=lambda0, zeta_case=zeta_case,
                   rho3_over_nu=params.rho3 / params.nu)


def classify_zeta(zeta: complex, epsilon: float) -> str:
    """Map a fixed zeta to its case: C3 for Re zeta >= 0, else C2.

    Case C1 (zeta proportional to 1/lambda) cannot be recognized from a
    single value and must be requested explicitly.
    """
    if zeta.real >= 0:
        return "C3"
    if abs(cmath.phase(zeta)) <= math.pi - epsilon:
        return "C2"
    raise DegenerateCaseError("zeta with Re < 0 lies outside Sigma(eps)")


@dataclass(frozen=True)
class SpectralPoint:
    """A resolvent parameter paired with a tangential frequency vector."""

    lam: complex
    xi: np.ndarray  # shape (N-1,)

    def __init__(self, lam, xi):
        object.__setattr__(self, "lam", complex(lam))
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(xi, dtype=float)))

    @property
    def tau(self) -> float:
        return self.lam.imag

    @property
    def xi_norm(self) -> float:
        return float(np.linalg.norm(self.xi))


def in_sigma(lam, epsilon, lambda0=0.0, tol=BOUNDARY_TOL):
    """Membership in Sigma(eps, lam0).  Vectorized over lam."""
    if not (0 < epsilon < math.pi / 2):
        raise ValueError("epsilon must lie in (0, pi/2)")
    lam = np.asarray(lam, dtype=complex)
    nonzero = lam != 0
    # np.angle returns the principal argument in (-pi, pi]
    arg_ok = np.abs(np.angle(lam)) <= math.pi - epsilon + tol
    mod_ok = np.abs(lam) >= lambda0 - tol
    out = nonzero & arg_ok & mod_ok
    return bool(out) if out.ndim == 0 else out


def in_lambda_region(lam, spec: SectorSpec, tol=BOUNDARY_TOL):
    """Membership in Lambda(eps, lam0): sector minus the excluded disk."""
    lam = np.asarray(lam, dtype=complex)
    r = spec.rho3_over_nu + spec.epsilon
    outside_disk = (lam.real + r) ** 2 + lam.imag**2 >= r**2 - tol
    out = in_sigma(lam, spec.epsilon, spec.lambda0, tol) & outside_disk
    return bool(out) if out.ndim == 0 else out


def in_gamma_region(lam, spec: SectorSpec, params: FluidParams, tol=BOUNDARY_TOL):
    """Membership in Gamma(eps, lam0, zeta), by zeta case."""
    lam = np.asarray(lam, dtype=complex)
    if spec.zeta_case == "C1":
        return in_lambda_region(lam, spec, tol)
    if spec.zeta_case == "C2":
        z = complex(params.zeta)
        if z.imag == 0.0:
            raise DegenerateCaseError("case C2 requires Im zeta != 0")
        slope = abs(z.real / z.imag)
        out = (lam.real >= slope * np.abs(lam.imag) - tol) & (lam.real >= spec.lambda0 - tol)
    else:  # C3
        if params.zeta.real < 0:
            raise RegionError("case C3 requires Re zeta >= 0")
        out = lam.real >= spec.lambda0 - tol
    return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SectorInequalityReport:
    lhs: float
    rhs: float
    holds: bool


def sector_inequality_check(sample: SpectralPoint, a: float, epsilon: float,
                            tol=BOUNDARY_TOL) -> SectorInequalityReport:
    """Check |a*lam + |xi|^2| >= sin(eps/2) (a|lam| + |xi|^2) for lam in Sigma(eps)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if not in_sigma(sample.lam, epsilon):
        raise RegionError(f"lambda {sample.lam} outside Sigma({epsilon})")
    xi_sq = sample.xi_norm**2
    lhs = abs(a * sample.lam + xi_sq)
    rhs = math.sin(epsilon / 2) * (a * abs(sample.lam) + xi_sq)
    return SectorInequalityReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs - tol)
