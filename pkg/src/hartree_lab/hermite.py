"""Scaled Hermite functions and the coefficient representation built on them.

``Omega_{n,kappa}(x) = kappa^{d/8} prod_i psi_{n_i}(kappa^{1/4} x_i)`` where
``psi_n`` is the L^2-normalized Hermite function.  For every ``kappa > 0`` these
form an orthonormal basis of eigenfunctions of ``-Delta/2 + kappa |x|^2 / 2``
with eigenvalues ``sqrt(kappa) (|n| + d/2)``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import logsumexp

from .grid import GridSpec, GridState, interpolate

TRUNCATION_TOL = 1e-9


class TruncationWarning(UserWarning):
    """Raised when a projection or ladder step discards more mass than allowed."""


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(int(e) != e or e < 0 for e in self.entries):
            raise ValueError(f"multi-index entries must be non-negative integers: {self.entries}")
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @classmethod
    def of(cls, n, d: int | None = None) -> "MultiIndex":
        if isinstance(n, MultiIndex):
            return n
        if np.isscalar(n):
            if d not in (None, 1):
                raise ValueError("scalar mode number given for d > 1")
            return cls((int(n),))
        return cls(tuple(n))

    @property
    def d(self) -> int:
        return len(self.entries)

    def degree(self) -> int:
        return sum(self.entries)

    def shifted(self, axis: int, step: int) -> "MultiIndex":
        e = list(self.entries)
        e[axis] += step
        return MultiIndex(tuple(e))


@dataclass(frozen=True)
class BasisSpec:
    d: int
    kappa: float
    cutoff: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.kappa > 0:
            raise ValueError("scaled Hermite basis needs kappa > 0")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cutoff + 1,) * self.d

    @property
    def scale(self) -> float:
        return self.kappa ** 0.25

    def degrees(self) -> np.ndarray:
        """``|n|`` for every coefficient slot, shaped like the coefficient array."""
        idx = np.indices(self.shape)
        return idx.sum(axis=0)

    def energies(self) -> np.ndarray:
        """Oscillator eigenvalues ``sqrt(kappa)(|n| + d/2)`` per slot."""
        return math.sqrt(self.kappa) * (self.degrees() + self.d / 2)

    def with_kappa(self, kappa: float) -> "BasisSpec":
        return BasisSpec(self.d, kappa, self.cutoff)

    def with_cutoff(self, cutoff: int) -> "BasisSpec":
        return BasisSpec(self.d, self.kappa, cutoff)


@dataclass(frozen=True)
class CoeffState:
    spec: BasisSpec
    coeffs: np.ndarray
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.spec.shape:
            raise ValueError(f"coefficient shape {c.shape} != basis shape {self.spec.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def unit(cls, spec: BasisSpec, n, amplitude: complex = 1.0) -> "CoeffState":
        n = MultiIndex.of(n, spec.d)
        c = np.zeros(spec.shape, dtype=complex)
        c[n.entries] = amplitude
        return cls(spec, c)

    @classmethod
    def zeros(cls, spec: BasisSpec) -> "CoeffState":
        return cls(spec, np.zeros(spec.shape, dtype=complex))

    def mass(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def inner(self, other: "CoeffState") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))

    def with_coeffs(self, coeffs: np.ndarray, **diag: float) -> "CoeffState":
        merged = dict(self.diagnostics)
        merged.update(diag)
        return CoeffState(self.spec, coeffs, merged)

    def padded(self, extra: int = 1) -> "CoeffState":
        """Same state in a basis with ``extra`` more modes per axis."""
        spec = self.spec.with_cutoff(self.spec.cutoff + extra)
        c = np.zeros(spec.shape, dtype=complex)
        c[tuple(slice(0, s) for s in self.spec.shape)] = self.coeffs
        return CoeffState(spec, c)

    def __add__(self, other: "CoeffState") -> "CoeffState":
        if other.spec != self.spec:
            raise ValueError("basis mismatch")
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "CoeffState") -> "CoeffState":
        if other.spec != self.spec:
            raise ValueError("basis mismatch")
        return self.with_coeffs(self.coeffs - other.coeffs)

    def scaled(self, factor: complex) -> "CoeffState":
        return self.with_coeffs(factor * self.coeffs)


# ---------------------------------------------------------------------------
# Hermite functions


def hermite_functions(nmax: int, x) -> np.ndarray:
    """All normalized Hermite functions ``psi_0..psi_nmax`` at ``x``.

    Uses ``psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}``, which
    stays bounded where the factorial form overflows.  Output shape is
    ``(nmax + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def eval_hermite(n: int, x):
    """Normalized Hermite function ``psi_n(x)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    vals = hermite_functions(n, x)[n]
    return float(vals) if np.ndim(vals) == 0 else vals


def eval_basis(spec: BasisSpec, n, x) -> float:
    """``Omega_{n,kappa}(x)`` at a single point ``x`` in R^d."""
    n = MultiIndex.of(n, spec.d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n.d != spec.d or x.shape != (spec.d,):
        raise ValueError("dimension mismatch")
    if max(n.entries) > spec.cutoff:
        raise ValueError("multi-index exceeds basis cutoff")
    val = spec.kappa ** (spec.d / 8)
    for ni, xi in zip(n.entries, x):
        val *= eval_hermite(ni, spec.scale * xi)
    return float(val)


def basis_on_axis(spec: BasisSpec, x) -> np.ndarray:
    """``kappa^{1/8} psi_n(kappa^{1/4} x)`` for n = 0..cutoff; one axis factor."""
    return spec.kappa ** 0.125 * hermite_functions(spec.cutoff, spec.scale * np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for ``int f(x) exp(-x^2) dx``.

    ``scaled_weights`` are ``w_k exp(x_k^2)``, i.e. the weights that integrate
    ``f`` itself against ``dx``; they stay O(1) where ``w_k`` underflows.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return np.sum(self.weights * f(self.nodes))


@lru_cache(maxsize=64)
def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Golub-Welsch nodes from the Jacobi matrix with off-diagonals sqrt(k/2).

    Weights come from ``w_k = exp(-x_k^2) / (m psi_{m-1}(x_k)^2)``, which is the
    same quantity as ``sqrt(pi) v_0^2`` from the eigenvectors but keeps full
    relative accuracy at the outermost nodes.
    """
    if m < 1:
        raise ValueError("node count must be >= 1")
    if m == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, m) / 2.0)
        try:
            nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise RuntimeError(f"Jacobi eigenproblem failed for m={m}") from exc
        nodes = np.sort(nodes)
        # one Newton polish on psi_m using psi_m' = sqrt(2m) psi_{m-1} - x psi_m
        psi = hermite_functions(m, nodes)
        nodes = nodes - psi[m] / (math.sqrt(2 * m) * psi[m - 1] - nodes * psi[m])
        nodes = 0.5 * (nodes - nodes[::-1])
    psi_prev = hermite_functions(m - 1, nodes)[m - 1]
    scaled = 1.0 / (m * psi_prev ** 2)
    weights = scaled * np.exp(-nodes ** 2)
    rule = QuadratureRule(nodes, weights, scaled)
    _check_moments(rule)
    return rule


def _check_moments(rule: QuadratureRule, rtol: float = 1e-9) -> None:
    """Confirm exactness on even monomials up to degree ``2m-2`` (odd ones vanish by symmetry)."""
    if np.any(np.diff(rule.nodes) <= 0) or np.any(rule.scaled_weights <= 0):
        raise RuntimeError("Gauss-Hermite rule lost ordering or positivity")
    nz = rule.nodes != 0
    logw = np.log(rule.scaled_weights[nz]) - rule.nodes[nz] ** 2
    logx = np.log(np.abs(rule.nodes[nz]))
    for j in range(rule.size):
        if j == 0:
            approx = math.log(np.sum(rule.weights))
        else:
            approx = float(logsumexp(logw + 2 * j * logx))
        if abs(approx - math.lgamma(j + 0.5)) > rtol:
            raise RuntimeError(f"Gauss-Hermite rule failed moment check at degree {2 * j}")
    if abs(np.sum(rule.weights * rule.nodes)) > 1e-13:
        raise RuntimeError("Gauss-Hermite rule is not symmetric")


def default_quadrature_size(cutoff: int) -> int:
    return 2 * cutoff + 1


# ---------------------------------------------------------------------------
# Analysis / synthesis


def _node_values(field_, spec: BasisSpec, nodes_1d: np.ndarray) -> np.ndarray:
    if isinstance(field_, GridState):
        if field_.spec.d != spec.d:
            raise ValueError("dimension mismatch between grid and basis")
        return interpolate(field_, [nodes_1d] * spec.d)
    coords = np.meshgrid(*([nodes_1d] * spec.d), indexing="ij")
    return np.asarray(field_(*coords), dtype=complex)


def analyze(field_, spec: BasisSpec, quad_size: int | None = None,
            tol: float = TRUNCATION_TOL) -> CoeffState:
    """Project a field onto ``Omega_{n,kappa}`` with tensorized Gauss-Hermite quadrature.

    ``field_`` is either a :class:`GridState` (evaluated through its
    trigonometric interpolant) or a callable ``f(x_0, ..., x_{d-1})``.
    The relative truncation loss ``1 - sum|a_n|^2 / M[u]`` is stored in
    ``diagnostics['truncation_loss']`` and triggers a warning above ``tol``.
    """
    m = quad_size or default_quadrature_size(spec.cutoff)
    rule = gauss_hermite_rule(m)
    nodes = rule.nodes / spec.scale
    vals = _node_values(field_, spec, nodes)
    # dx-weights at scale kappa, folded with the basis on each axis
    w = rule.scaled_weights / spec.scale
    B = basis_on_axis(spec, nodes) * w[None, :]
    c = vals
    for ax in range(spec.d):
        c = np.moveaxis(np.tensordot(B, c, axes=([1], [ax])), 0, ax)
    coeffs = np.asarray(c, dtype=complex)
    if isinstance(field_, GridState):
        mass = field_.mass()
    else:
        mass = float(np.real(np.sum(np.abs(vals) ** 2 * _tensor_weights(w, spec.d))))
    loss = 0.0 if mass == 0 else 1.0 - float(np.sum(np.abs(coeffs) ** 2)) / mass
    if loss > tol:
        warnings.warn(f"truncation loss {loss:.3e} exceeds {tol:.1e}", TruncationWarning, stacklevel=2)
    return CoeffState(spec, coeffs, {"truncation_loss": loss})


def _tensor_weights(w: np.ndarray, d: int) -> np.ndarray:
    out = w
    for _ in range(d - 1):
        out = np.multiply.outer(out, w)
    return out


def synthesize(c: CoeffState, grid: GridSpec) -> GridState:
    """Pointwise sum ``sum_n a_n Omega_{n,kappa}(x)`` on the grid."""
    if grid.d != c.spec.d:
        raise ValueError("dimension mismatch between grid and basis")
    B = basis_on_axis(c.spec, grid.x)  # (N+1, points)
    v = c.coeffs
    for ax in range(grid.d):
        v = np.moveaxis(np.tensordot(B.T, v, axes=([1], [ax])), 0, ax)
    return GridState(grid, np.asarray(v, dtype=complex))


def evaluate(c: CoeffState, *coords: np.ndarray) -> np.ndarray:
    """Evaluate the series at arbitrary points given coordinate-wise."""
    shape = np.broadcast(*coords).shape
    flat = [np.broadcast_to(x, shape).ravel() for x in coords]
    mats = [basis_on_axis(c.spec, x) for x in flat]  # each (N+1, P)
    letters = "abcdefgh"[: c.spec.d]
    expr = letters + "," + ",".join(f"{l}z" for l in letters) + "->z"
    return np.einsum(expr, c.coeffs, *mats).reshape(shape)


def rebase(c: CoeffState, kappa: float, cutoff: int | None = None) -> CoeffState:
    """Re-expand a coefficient state in the basis of another scale."""
    spec = BasisSpec(c.spec.d, kappa, cutoff or c.spec.cutoff)
    if spec == c.spec:
        return c
    return analyze(lambda *xs: evaluate(c, *xs), spec, tol=np.inf)


# ---------------------------------------------------------------------------
# Ladder algebra


def ladder(c: CoeffState, which: str, axis: int = 0) -> CoeffState:
    """Apply ``A_kappa`` (``'lower'``) or ``A_kappa^dagger`` (``'raise'``) along ``axis``.

    Raising drops the top shell; the dropped mass lands in
    ``diagnostics['dropped_mass']``.
    """
    if not 0 <= axis < c.spec.d:
        raise ValueError(f"axis {axis} out of range for d={c.spec.d}")
    a = np.moveaxis(c.coeffs, axis, 0)
    N = c.spec.cutoff
    out = np.zeros_like(a)
    k = np.arange(N + 1).reshape((-1,) + (1,) * (a.ndim - 1))
    dropped = 0.0
    if which == "lower":
        out[:-1] = np.sqrt(k[1:]) * a[1:]
    elif which == "raise":
        out[1:] = np.sqrt(k[1:]) * a[:-1]
        dropped = float(np.sum(np.abs(math.sqrt(N + 1) * a[-1]) ** 2))
    else:
        raise ValueError("which must be 'lower' or 'raise'")
    return c.with_coeffs(np.moveaxis(out, 0, axis), dropped_mass=dropped)


def ladder_pair(c: CoeffState, axis: int) -> tuple[CoeffState, CoeffState]:
    """``(A c, A^dagger c)`` computed in a padded basis so nothing is lost."""
    p = c.padded(1)
    return ladder(p, "lower", axis), ladder(p, "raise", axis)


def position_moments(c: CoeffState) -> tuple[np.ndarray, float]:
    """``(int x |u|^2, int |x|^2 |u|^2)`` from exact ladder algebra."""
    s = c.spec.scale
    X = np.zeros(c.spec.d)
    m2 = 0.0
    for ax in range(c.spec.d):
        lo, hi = ladder_pair(c, ax)
        xu = (lo.coeffs + hi.coeffs) / (math.sqrt(2) * s)
        p = c.padded(1).coeffs
        X[ax] = float(np.real(np.vdot(p, xu)))
        m2 += float(np.sum(np.abs(xu) ** 2))
    return X, m2


def oscillator_energy(c: CoeffState) -> float:
    """``((-Delta/2 + kappa|x|^2/2) u, u)`` as a weighted coefficient sum."""
    return float(np.sum(c.spec.energies() * np.abs(c.coeffs) ** 2))


def sigma_norm(c: CoeffState, s: float) -> float:
    """Norm of Sigma^s with weight ``(|n| + d/2)^s`` per ``|a_n|^2`` (unit-scale basis)."""
    if c.spec.kappa != 1.0:
        raise ValueError("sigma_norm expects coefficients in the kappa = 1 basis; use rebase()")
    w = (c.spec.degrees() + c.spec.d / 2.0) ** s
    return float(math.sqrt(np.sum(w * np.abs(c.coeffs) ** 2)))


def position_matrix(size: int) -> np.ndarray:
    """Exact matrix of ``x`` in the unit-scale Hermite basis (tridiagonal)."""
    off = np.sqrt(np.arange(1, size) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def position_squared_matrix(size: int) -> np.ndarray:
    """Exact matrix of ``x^2`` (pentadiagonal), not the square of a truncated ``x``."""
    j = np.arange(size)
    off2 = np.sqrt((j[:-2] + 1) * (j[:-2] + 2)) / 2.0
    return np.diag(j + 0.5) + np.diag(off2, 2) + np.diag(off2, -2)


def random_state(spec: BasisSpec, rng: np.random.Generator, modes: int = 6,
                 decay: float = 0.5) -> CoeffState:
    """Random normalized state on the lowest ``modes`` modes per axis."""
    c = np.zeros(spec.shape, dtype=complex)
    idx = tuple(slice(0, min(modes, s)) for s in spec.shape)
    block = c[idx]
    deg = np.indices(block.shape).sum(axis=0)
    block[...] = (rng.standard_normal(block.shape) + 1j * rng.standard_normal(block.shape)) * np.exp(-decay * deg)
    c[idx] = block
    c /= np.linalg.norm(c)
    return CoeffState(spec, c)


def multi_indices(spec: BasisSpec) -> Sequence[MultiIndex]:
    return [MultiIndex(n) for n in itertools.product(*(range(s) for s in spec.shape))]
