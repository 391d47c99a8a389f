"""Tangential FFT grids, mapped-Chebyshev normal grids and field containers.

The tangential directions periodize R^(N-1) on a torus of half-length L
with the standard FFT duals xi_k = pi k / L; forward/inverse transforms
carry the continuous-Fourier normalization so that forward(f) samples
the integral transform of box-supported data to spectral accuracy.

The normal direction truncates [0, inf) to [0, X] on Chebyshev points
clustered at both ends (first node exactly 0), with the usual dense
differentiation matrix and Clenshaw-Curtis quadrature weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TangentialGrid:
    """Periodized tangential grid; dims in {1, 2}, points a power of two."""

    dims: int = 1
    points: int = 64
    half_length: float = 8.0

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        n = self.points
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError("points must be a power of two >= 4")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")

    @property
    def dx(self) -> float:
        return 2 * self.half_length / self.points

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.points)

    @property
    def xi_axis(self) -> np.ndarray:
        # FFT layout: pi k / L for k = 0..n/2-1, -n/2..-1
        k = np.fft.fftfreq(self.points) * self.points
        return (np.pi / self.half_length) * k

    @property
    def xi(self) -> np.ndarray:
        """Frequency vectors, shape (points,)*dims + (dims,), FFT layout."""
        axes = [self.xi_axis] * self.dims
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @property
    def xi_sq(self) -> np.ndarray:
        return np.sum(self.xi**2, axis=-1)

    @property
    def mode_shape(self):
        return (self.points,) * self.dims

    def _phase(self):
        # e^{i xi_k L} = (-1)^k per axis, flattening the x-offset of the box
        k = (np.fft.fftfreq(self.points) * self.points).astype(int)
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        out = sign
        for _ in range(self.dims - 1):
            out = np.multiply.outer(out, sign)
        return out

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Continuous Fourier transform of box-supported samples."""
        axes = tuple(range(self.dims))
        extra = values.ndim - self.dims
        phase = self._phase().reshape(self.mode_shape + (1,) * extra)
        return self.dx**self.dims * phase * np.fft.fftn(values, axes=axes)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        axes = tuple(range(self.dims))
        extra = values.ndim - self.dims
        phase = self._phase().reshape(self.mode_shape + (1,) * extra)
        return np.fft.ifftn(phase * values, axes=axes) / self.dx**self.dims


def chebyshev_matrix(n_nodes: int):
    """Nodes descending on [-1, 1] and the dense differentiation matrix."""
    n = n_nodes - 1
    if n == 0:
        return np.zeros((1, 1)), np.array([1.0])
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def clenshaw_curtis_weights(n_nodes: int) -> np.ndarray:
    """Quadrature weights on [-1, 1] for the Chebyshev extreme points."""
    n = n_nodes - 1
    if n == 0:
        return np.array([2.0])
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    ii = np.arange(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n**2 - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k**2 - 1)
        v -= np.cos(n * theta[ii]) / (n**2 - 1)
    else:
        w[0] = w[n] = 1.0 / n**2
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k**2 - 1)
    w[ii] = 2.0 * v / n
    return w


@dataclass(frozen=True)
class NormalGrid:
    """Mapped Chebyshev collocation on [0, X]; first node exactly 0."""

    points: int = 64
    truncation: float = 20.0

    def __post_init__(self):
        if self.points < 8:
            raise ValueError("need at least 8 collocation nodes")
        if self.truncation <= 0:
            raise ValueError("truncation length must be positive")

    @property
    def nodes(self) -> np.ndarray:
        _, xc = chebyshev_matrix(self.points)
        t = self.truncation * (1.0 - xc) / 2.0
        t[0] = 0.0
        return t

    @property
    def diff(self) -> np.ndarray:
        Dc, _ = chebyshev_matrix(self.points)
        return -(2.0 / self.truncation) * Dc

    @property
    def diff2(self) -> np.ndarray:
        D = self.diff
        return D @ D

    @property
    def weights(self) -> np.ndarray:
        return (self.truncation / 2.0) * clenshaw_curtis_weights(self.points)


def choose_truncation(lam: complex, alpha: float, minimum: float = 20.0) -> float:
    """X = max(minimum, 10 / min-mode Re B); the slowest decay sits at xi = 0."""
    reb = np.sqrt(complex(lam) / alpha).real
    if reb <= 0:
        raise ValueError("lambda outside the admissible sector")
    return max(minimum, 10.0 / reb)


@dataclass
class HalfSpaceField:
    """Complex field indexed (mode axes..., normal node, component)."""

    values: np.ndarray
    tgrid: TangentialGrid
    ngrid: NormalGrid
    space: str = "physical"  # tangential representation: physical | spectral

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = self.tgrid.mode_shape + (self.ngrid.points,)
        if self.values.shape[:-1] != expected:
            raise ValueError(f"shape {self.values.shape} incompatible with grids")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]

    def boundary(self) -> np.ndarray:
        """Trace at x_N = 0 (first normal node)."""
        return self.values[..., 0, :]


@dataclass
class BoundaryField:
    """Complex boundary data indexed (mode axes..., component)."""

    values: np.ndarray
    tgrid: TangentialGrid
    space: str = "physical"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[: self.tgrid.dims] != self.tgrid.mode_shape:
            raise ValueError(f"shape {self.values.shape} incompatible with grid")
        if self.values.ndim == self.tgrid.dims:
            self.values = self.values[..., None]
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]


def transform_tangential(fld, direction: str):
    """FFT along the tangential axes only; forward o inverse = identity."""
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    g = fld.tgrid
    if direction == "forward":
        if fld.space != "physical":
            raise ValueError("field already spectral")
        vals, space = g.forward(fld.values), "spectral"
    else:
        if fld.space != "spectral":
            raise ValueError("field already physical")
        vals, space = g.inverse(fld.values), "physical"
    if isinstance(fld, HalfSpaceField):
        return HalfSpaceField(vals, fld.tgrid, fld.ngrid, space)
    return BoundaryField(vals, fld.tgrid, space)


def edge_support_ratio(fld) -> float:
    """Largest edge amplitude relative to the field maximum.

    Solvers require < 1e-10: the periodization is only faithful for data
    numerically supported inside the box.
    """
    v = np.abs(np.asarray(fld.values))
    peak = float(v.max())
    if peak == 0:
        return 0.0
    edges = 0.0
    for ax in range(fld.tgrid.dims):
        edges = max(edges, float(np.take(v, 0, axis=ax).max()))
    return edges / peak
