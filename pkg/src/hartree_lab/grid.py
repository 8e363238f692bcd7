"""Uniform periodic box grids and the sampled-wavefunction container.

The box is ``[-L, L)^d`` with ``points`` samples per axis.  Arrays are
indexed ``values[i0, i1, ...]`` with axis ``k`` running along ``x_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    d: int
    half_width: float
    points: int
    dt: float = 1e-3

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.points < 64 or self.points & (self.points - 1):
            raise ValueError("points must be a power of two >= 64")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @cached_property
    def x(self) -> np.ndarray:
        """1-D node coordinates shared by every axis."""
        return -self.half_width + self.dx * np.arange(self.points)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def cell(self) -> float:
        return self.dx ** self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.d

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular wavenumbers of the periodic box (FFT ordering)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)

    def axis(self, k: int) -> np.ndarray:
        """Coordinate ``x_k`` broadcast to the full grid shape."""
        shp = [1] * self.d
        shp[k] = self.points
        return self.x.reshape(shp)

    def wavenumber(self, k: int) -> np.ndarray:
        shp = [1] * self.d
        shp[k] = self.points
        return self.xi.reshape(shp)

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(self.axis(k) ** 2 for k in range(self.d)) * np.ones(self.shape)

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(self.wavenumber(k) ** 2 for k in range(self.d)) * np.ones(self.shape)

    def sample(self, f: Callable[..., np.ndarray]) -> "GridState":
        """Sample ``f(x_0, ..., x_{d-1})`` on the grid."""
        coords = np.meshgrid(*([self.x] * self.d), indexing="ij")
        return GridState(self, np.asarray(f(*coords), dtype=complex))


@dataclass(frozen=True)
class GridState:
    spec: GridSpec
    values: np.ndarray
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.spec.shape:
            raise ValueError(f"values shape {self.values.shape} != grid {self.spec.shape}")

    def with_values(self, values: np.ndarray, **diag: float) -> "GridState":
        merged = dict(self.diagnostics)
        merged.update(diag)
        return GridState(self.spec, np.asarray(values, dtype=complex), merged)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def mass(self) -> float:
        return float(self.density.sum() * self.spec.cell)

    def inner(self, other: "GridState") -> complex:
        """L^2 inner product, conjugate-linear in ``self``."""
        return complex(np.vdot(self.values, other.values) * self.spec.cell)

    def norm(self, p: float = 2) -> float:
        return float((np.sum(np.abs(self.values) ** p) * self.spec.cell) ** (1.0 / p))

    def boundary_ratio(self, margin: int = 2) -> float:
        """Peak density in the outer ``margin`` cells relative to the global peak."""
        rho = self.density
        peak = rho.max()
        if peak == 0:
            return 0.0
        edge = 0.0
        for k in range(self.spec.d):
            sl_lo = [slice(None)] * self.spec.d
            sl_hi = [slice(None)] * self.spec.d
            sl_lo[k] = slice(0, margin)
            sl_hi[k] = slice(-margin, None)
            edge = max(edge, rho[tuple(sl_lo)].max(), rho[tuple(sl_hi)].max())
        return float(edge / peak)

    def __add__(self, other: "GridState") -> "GridState":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridState") -> "GridState":
        return self.with_values(self.values - other.values)

    def scaled(self, factor: complex) -> "GridState":
        return self.with_values(factor * self.values)


def gradient(u: GridState) -> list[np.ndarray]:
    """Spectral partial derivatives, one array per axis."""
    uh = np.fft.fftn(u.values)
    return [np.fft.ifftn(1j * u.spec.wavenumber(k) * uh) for k in range(u.spec.d)]


def laplacian(u: GridState) -> np.ndarray:
    return np.fft.ifftn(-u.spec.xi2 * np.fft.fftn(u.values))


def translate(u: GridState, shift) -> np.ndarray:
    """Band-limited periodic translation: returns samples of ``u(x - shift)``."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    phase = np.ones(u.spec.shape, dtype=complex)
    for k in range(u.spec.d):
        phase = phase * np.exp(-1j * u.spec.wavenumber(k) * shift[k])
    return np.fft.ifftn(np.fft.fftn(u.values) * phase)


def wrapped_mass(u: GridState, shift) -> float:
    """Mass that a translation by ``shift`` carries across the periodic seam."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    L = u.spec.half_width
    mask = np.zeros(u.spec.shape, dtype=bool)
    for k in range(u.spec.d):
        moved = u.spec.axis(k) + shift[k]
        mask = mask | np.broadcast_to((moved < -L) | (moved >= L), u.spec.shape)
    return float(u.density[mask].sum() * u.spec.cell)


def interpolate(u: GridState, points_per_axis: list[np.ndarray]) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``u`` on a tensor product of points.

    Returns an array of shape ``(len(p0), len(p1), ...)``.
    """
    spec = u.spec
    n = spec.points
    coeffs = np.fft.fftn(u.values) / n ** spec.d
    # symmetric treatment of the Nyquist column keeps the interpolant real for real data
    k = np.fft.fftfreq(n, d=1.0 / n)
    out = coeffs
    for ax, pts in enumerate(points_per_axis):
        t = (np.asarray(pts, dtype=float)[:, None] + spec.half_width) * (2 * np.pi / (2 * spec.half_width))
        E = np.exp(1j * t * k[None, :])
        E[:, n // 2] = np.cos(t[:, 0] * (n // 2))
        out = np.moveaxis(np.tensordot(E, out, axes=([1], [ax])), 0, ax)
    return out
