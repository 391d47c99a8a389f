"""Sampled verification of multiplier-class bounds and the N(A,B) lower bound.

A scan draws (lambda, xi') from the admissible region - log-uniform in
|lambda| over [lam0, 1e4*lam0] and in |xi'| over [1e-3, 1e3], uniform in
admissible angles, deterministic under a seed - and measures

  * worst ratios  |d^k_xi (tau d_tau)^l m| / bound(s, type)  per symbol,
  * the smallest lam0 for which  |N| >= c (|lam|+|xi|)(|lam|^1/2+|xi|)^2
    holds with a positive floor, plus the certified c,
  * sampled sector angles (arg of AB, the Lemma-basic(2) quotients) and
    the decay constant c' of exp(-B x_N).

Derivatives are central finite differences with relative step
1e-4*(|lam|^1/2+|xi|), Richardson-extrapolated once; (tau d_tau) is tau
times the finite-difference d/dtau at fixed Re lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .regions import FluidParams, SectorSpec, in_gamma_region
from .symbols import SymbolParams, core_values, lopatinski_values, symbol_registry

FD_REL_STEP = 1e-4
NAB_FLOOR = 1e-10
NAB_LAMBDA0_CAP = 2.0**16


class ScanError(RuntimeError):
    """A sampling plan or search could not be completed."""


@dataclass(frozen=True)
class SamplingPlan:
    """Deterministic sample of admissible (lambda, xi') pairs."""

    n_samples: int = 10_000
    seed: int = 0
    lam_factor: float = 1e4   # |lambda| ranges over [lam0, lam_factor*lam0]
    xi_lo: float = 1e-3
    xi_hi: float = 1e3
    dims: int = 1


def draw_samples(plan: SamplingPlan, spec: SectorSpec, params: FluidParams):
    """(lam, xi) arrays inside Gamma(eps, lam0, zeta); xi has shape (n, dims)."""
    rng = np.random.default_rng(plan.seed)
    n = plan.n_samples
    lam0 = max(spec.lambda0, 1e-12)
    r = 10.0 ** rng.uniform(math.log10(lam0), math.log10(plan.lam_factor * lam0), size=n)

    if spec.zeta_case == "C1":
        # rejection sampling against the excluded disk
        theta_max = math.pi - spec.epsilon
        theta = rng.uniform(-theta_max, theta_max, size=n)
        lam = r * np.exp(1j * theta)
        bad = ~in_gamma_region(lam, spec, params)
        tries = 0
        while np.any(bad):
            theta = rng.uniform(-theta_max, theta_max, size=int(bad.sum()))
            lam[bad] = r[bad] * np.exp(1j * theta)
            bad = ~in_gamma_region(lam, spec, params)
            tries += 1
            if tries > 200:
                raise ScanError("sampling plan keeps hitting the excluded region")
    else:
        if spec.zeta_case == "C2":
            z = complex(params.zeta)
            slope = abs(z.real / z.imag)  # Re lam >= slope |Im lam|
            theta_cap = math.atan2(1.0, slope)
        else:
            theta_cap = math.pi / 2
        # Re lam >= lam0 additionally caps the angle at fixed radius
        tmax = np.minimum(np.arccos(np.minimum(1.0, lam0 / r)), theta_cap - 1e-12)
        theta = rng.uniform(-1.0, 1.0, size=n) * tmax
        lam = r * np.exp(1j * theta)

    xi_mag = 10.0 ** rng.uniform(math.log10(plan.xi_lo), math.log10(plan.xi_hi), size=n)
    if plan.dims == 1:
        xi = (xi_mag * rng.choice([-1.0, 1.0], size=n))[:, None]
    else:
        ang = rng.uniform(0, 2 * math.pi, size=n)
        xi = xi_mag[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    return lam, xi


@dataclass(frozen=True)
class MultiplierClassSpec:
    order: float
    mtype: int = 1          # 1: (|lam|^1/2+|xi|)^(s-|k|);  2: (...)^s |xi|^(-|k|)
    max_deriv_order: int = 2
    region: SectorSpec = field(default_factory=SectorSpec)
    # extra (|lam|+|xi|)^w factor in the bound; -1 for N^-1 and detL/N,
    # whose certified envelopes are not plain multiplier classes
    lam_xi_weight: float = 0.0

    def __post_init__(self):
        if self.mtype not in (1, 2):
            raise ValueError("type must be 1 or 2")
        if self.max_deriv_order > 2:
            raise ValueError("derivative order capped at 2")


def _tangential_derivative(f, lam, xi, kappa, h):
    """Central-difference d^kappa/d xi^kappa with one Richardson pass.

    kappa is a multi-index over the tangential axes; mixed second
    derivatives nest two first-difference stencils.
    """
    order = int(np.sum(kappa))
    if order == 0:
        return f(lam, xi)

    axis = int(np.argmax(np.asarray(kappa) > 0))

    def shift(x, d):
        y = np.array(x, copy=True)
        y[:, axis] = y[:, axis] + d
        return y

    rest = np.array(kappa, copy=True)
    rest[axis] -= 1
    inner = (lambda l, x: _tangential_derivative(f, l, x, rest, h)) \
        if order > 1 else f

    def diff(step):
        return (inner(lam, shift(xi, step)) - inner(lam, shift(xi, -step))) / (2 * step)

    d1, d2 = diff(h), diff(h / 2)
    return (4 * d2 - d1) / 3


def _tau_scaled_derivative(g, lam, h):
    """tau * dg/dtau at fixed Re lambda (tau = Im lambda), Richardson once."""
    def diff(step):
        return (g(lam + 1j * step) - g(lam - 1j * step)) / (2 * step)

    d1, d2 = diff(h), diff(h / 2)
    return lam.imag * (4 * d2 - d1) / 3


def _kappa_list(dims, max_order):
    out = []
    for total in range(max_order + 1):
        if dims == 1:
            out.append((total,))
        else:
            for i in range(total + 1):
                out.append((total - i, i))
    return out


def multiplier_class_scan(symbol: str, spec: MultiplierClassSpec, plan: SamplingPlan,
                          params: FluidParams, x_n: float = 1.0) -> dict:
    """Worst sampled ratio against the class bound, per (kappa, ell).

    For the symbol "exp_BxN" the decay constant c' of Lemma ABL(1) is
    fitted first (0.99 x the sampled minimum of Re B/(|lam|^1/2+|xi|))
    and the bound carries the extra factor exp(-c'(|lam|^1/2+|xi|) x_N).
    """
    sp = SymbolParams.from_fluid(params)
    lam, xi = draw_samples(plan, spec.region, params)
    scale = np.sqrt(np.abs(lam)) + np.linalg.norm(xi, axis=-1)
    h = FD_REL_STEP * scale

    decay_c = None
    if symbol == "exp_BxN":
        decay_c = fit_exp_decay_constant(lam, xi, sp)

        def f(l, x):
            _, B = core_values(l, np.sum(np.asarray(x) ** 2, axis=-1), sp)
            return np.exp(-B * x_n)
    else:
        registry = symbol_registry(sp)
        if symbol not in registry:
            raise KeyError(f"unknown symbol {symbol!r}; known: {sorted(registry)}")
        base = registry[symbol]
        s_int = round(spec.order)
        if symbol in ("A", "B") and s_int != 1:
            f = lambda l, x: base(l, x) ** s_int  # noqa: E731  A^s, B^s
        else:
            f = base

    xi_norm = np.linalg.norm(xi, axis=-1)
    per_derivative = []
    worst_overall = 0.0
    for kappa in _kappa_list(plan.dims, spec.max_deriv_order):
        korder = int(sum(kappa))
        for ell in (0, 1):
            if ell == 0:
                deriv = _tangential_derivative(f, lam, xi, kappa, h)
            else:
                deriv = _tau_scaled_derivative(
                    lambda l: _tangential_derivative(f, l, xi, kappa, h), lam,
                    FD_REL_STEP * np.abs(lam))
            bound = scale ** (spec.order - korder) if spec.mtype == 1 \
                else scale**spec.order * xi_norm ** (-korder)
            if spec.lam_xi_weight:
                bound = bound * (np.abs(lam) + xi_norm) ** spec.lam_xi_weight
            if decay_c is not None:
                bound = bound * np.exp(-decay_c * scale * x_n)
            ratio = np.abs(deriv) / bound
            i = int(np.argmax(ratio))
            per_derivative.append({
                "kappa": list(kappa),
                "ell": ell,
                "worstRatio": float(ratio[i]),
                "argmaxPoint": {"lam_re": float(lam[i].real),
                                "lam_im": float(lam[i].imag),
                                "xi": [float(v) for v in xi[i]]},
            })
            worst_overall = max(worst_overall, float(ratio[i]))

    report = {
        "symbol": symbol,
        "class": {"order": spec.order, "type": spec.mtype},
        "samples": plan.n_samples,
        "seed": plan.seed,
        "perDerivative": per_derivative,
        "worstRatio": worst_overall,
        "violations": [],
    }
    if decay_c is not None:
        report["decayConstant"] = float(decay_c)
    return report


def fit_exp_decay_constant(lam, xi, sp: SymbolParams) -> float:
    """c' with |e^{-B x}| <= e^{-c'(|lam|^1/2+|xi|) x}: min of Re B over the scale."""
    _, B = core_values(lam, np.sum(np.asarray(xi) ** 2, axis=-1), sp)
    scale = np.sqrt(np.abs(lam)) + np.linalg.norm(xi, axis=-1)
    return 0.99 * float(np.min(B.real / scale))


def measured_sector_angles(lam, xi, sp: SymbolParams) -> dict:
    """Sampled sector containment: AB in Sigma(eps0) and the basic-(2) quotients."""
    xi_sq = np.sum(np.asarray(xi) ** 2, axis=-1)
    A, B = core_values(lam, xi_sq, sp)
    ab_margin = math.pi - float(np.max(np.abs(np.angle(A * B))))
    quotients = {}
    for s in (1, 2, 3):
        z = lam / (s * sp.alpha + sp.beta + sp.zeta)
        quotients[f"s{s}"] = math.pi - float(np.max(np.abs(np.angle(z))))
    lower = np.abs(A * B + xi_sq) / (np.abs(lam) + xi_sq)
    return {"eps0_AB": ab_margin, "eps_prime": quotients,
            "int_AB_constant": float(np.min(lower))}


def abl_envelope(lam, xi, sp: SymbolParams) -> dict:
    """Measured c, C with c(|lam|^1/2+|xi|) <= |A|,|B| <= C(|lam|^1/2+|xi|)."""
    xi_sq = np.sum(np.asarray(xi) ** 2, axis=-1)
    A, B = core_values(lam, xi_sq, sp)
    scale = np.sqrt(np.abs(lam)) + np.linalg.norm(xi, axis=-1)
    return {
        "A": (float(np.min(np.abs(A) / scale)), float(np.max(np.abs(A) / scale))),
        "B": (float(np.min(np.abs(B) / scale)), float(np.max(np.abs(B) / scale))),
    }


def _nab_min_ratio(lambda0: float, plan: SamplingPlan, spec: SectorSpec,
                   params: FluidParams, sp: SymbolParams):
    region = SectorSpec(epsilon=spec.epsilon, lambda0=lambda0,
                        zeta_case=spec.zeta_case, rho3_over_nu=spec.rho3_over_nu)
    lam, xi = draw_samples(plan, region, params)
    xi_norm = np.linalg.norm(xi, axis=-1)
    L = lopatinski_values(lam, xi_norm**2, sp, check=False)
    denom = (np.abs(lam) + xi_norm) * (np.sqrt(np.abs(lam)) + xi_norm) ** 2
    ratio = np.abs(L.N) / denom
    return ratio, lam, xi


def nab_lower_bound_scan(params: FluidParams, epsilon: float, sample_budget: int,
                         seed: int = 0, floor: float = NAB_FLOOR,
                         zeta_case: str | None = None) -> dict:
    """Smallest lam0 in [1, 2^16] whose sampled min of |N|/bound clears the floor.

    Doubling finds a bracket, bisection shrinks it to 1% relative width;
    the certified constant is c = 0.99 x the sampled minimum at the
    returned lam0, against which violations are re-counted (zero by
    construction unless the sampling is pathological).
    """
    spec = SectorSpec.for_params(params, epsilon=epsilon, lambda0=1.0,
                                 zeta_case=zeta_case)
    sp = SymbolParams.from_fluid(params)
    plan = SamplingPlan(n_samples=sample_budget, seed=seed)

    def min_ratio(lam0):
        return float(np.min(_nab_min_ratio(lam0, plan, spec, params, sp)[0]))

    lo, hi = None, 1.0
    if min_ratio(hi) <= floor:
        lo = hi
        while True:
            hi *= 2
            if hi > NAB_LAMBDA0_CAP:
                raise ScanError(f"no lambda0 <= {NAB_LAMBDA0_CAP} clears the floor")
            if min_ratio(hi) > floor:
                break
            lo = hi
        while hi - lo > 0.01 * hi:
            mid = 0.5 * (lo + hi)
            if min_ratio(mid) > floor:
                hi = mid
            else:
                lo = mid

    lambda0_found = hi
    ratio, lam, xi = _nab_min_ratio(lambda0_found, plan, spec, params, sp)
    c_found = 0.99 * float(np.min(ratio))
    bad = ratio < c_found
    violations = [{"lam_re": float(lam[i].real), "lam_im": float(lam[i].imag),
                   "xi": [float(v) for v in xi[i]], "ratio": float(ratio[i])}
                  for i in np.nonzero(bad)[0][:32]]
    return {
        "lambda0Found": float(lambda0_found),
        "cFound": c_found,
        "minRatio": float(np.min(ratio)),
        "violations": violations,
        "samples": sample_budget,
        "seed": seed,
        "epsilon": epsilon,
        "zetaCase": spec.zeta_case,
    }
