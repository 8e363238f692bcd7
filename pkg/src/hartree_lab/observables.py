"""Mass, center, momentum, second moment, energy and the action functional.

The quartic interaction is never integrated as a double integral:
``iint |x-y|^2 |u(x)|^2 |u(y)|^2 = 2 M m2 - 2 |X|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridState, gradient
from .hermite import CoeffState, ladder_pair, oscillator_energy, position_moments


@dataclass(frozen=True)
class Observables:
    mass: float
    position: np.ndarray
    momentum: np.ndarray
    m2: float
    kinetic: float
    energy: float

    @property
    def interaction(self) -> float:
        """``iint |x-y|^2 |u(x)|^2 |u(y)|^2``."""
        return 2.0 * (self.mass * self.m2 - float(self.position @ self.position))


def energy_from_moments(kinetic, M, X, m2, lam, eta) -> float:
    return kinetic + 0.5 * lam * m2 + 0.5 * eta * (M * m2 - float(np.dot(X, X)))


def observables_grid(u: GridState, lam: float, eta: float) -> Observables:
    spec = u.spec
    rho = u.density
    cell = spec.cell
    M = float(rho.sum() * cell)
    X = np.array([float((spec.axis(k) * rho).sum() * cell) for k in range(spec.d)])
    m2 = float((spec.r2 * rho).sum() * cell)
    grads = gradient(u)
    P = np.array([float(np.imag(np.vdot(u.values, g)) * cell) for g in grads])
    kin = 0.5 * float(sum(np.sum(np.abs(g) ** 2) for g in grads) * cell)
    return Observables(M, X, P, m2, kin, energy_from_moments(kin, M, X, m2, lam, eta))


def xp_from_coeffs(c: CoeffState) -> tuple[np.ndarray, np.ndarray]:
    """Center and momentum from neighbouring-coefficient bilinear sums.

    ``X_i = kappa^{-1/4} Re sum sqrt(2(n_i+1)) a_n conj(a_{n+e_i})`` and
    ``P_i = -kappa^{1/4} Im sum sqrt(2(n_i+1)) a_n conj(a_{n+e_i})``, with
    ``a_n`` the expansion coefficients ``u = sum a_n Omega_n``.
    """
    d = c.spec.d
    s = c.spec.scale
    X = np.zeros(d)
    P = np.zeros(d)
    for ax in range(d):
        a = np.moveaxis(c.coeffs, ax, 0)
        n = np.arange(a.shape[0] - 1).reshape((-1,) + (1,) * (a.ndim - 1))
        S = np.sum(np.sqrt(2.0 * (n + 1)) * a[:-1] * np.conj(a[1:]))
        X[ax] = np.real(S) / s
        P[ax] = -np.imag(S) * s
    return X, P


def observables_coeffs(c: CoeffState, lam: float, eta: float) -> Observables:
    M = c.mass()
    X, P = xp_from_coeffs(c)
    _, m2 = position_moments(c)
    kin = oscillator_energy(c) - 0.5 * c.spec.kappa * m2
    return Observables(M, X, P, m2, kin, energy_from_moments(kin, M, X, m2, lam, eta))


def action(u, omega: float, lam: float, eta: float) -> float:
    """``S_omega(u) = E(u) - omega M(u) / 2`` for a grid or coefficient state."""
    obs = observables_grid(u, lam, eta) if isinstance(u, GridState) else observables_coeffs(u, lam, eta)
    return obs.energy - 0.5 * omega * obs.mass


def energy_via_w0(w0: CoeffState, M: float, a, b, lam: float) -> float:
    """Energy from the centered profile and the center-of-mass data.

    ``E = ((-Delta/2 + kappa|x|^2/2) w0, w0) + M(|a|^2 + lam |b|^2)/2``
    with ``w0`` expanded in the ``kappa = lam + eta M`` basis.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return oscillator_energy(w0) + 0.5 * M * (float(a @ a) + lam * float(b @ b))


def ground_energy(M: float, kappa: float, d: int) -> float:
    """``e(M) = M sqrt(kappa) d / 2`` (attained by the centered Gaussian when lam > 0)."""
    return M * math.sqrt(kappa) * d / 2.0


def cross_term(c: CoeffState) -> complex:
    """``sum_i (A_i w, A_i^dagger w)`` - the oscillating part of ``||x U(t) w||^2``."""
    total = 0j
    for ax in range(c.spec.d):
        lo, hi = ladder_pair(c, ax)
        total += np.vdot(hi.coeffs, lo.coeffs)
    return complex(total)


def ladder_norms(c: CoeffState) -> float:
    """``sum_i ||A_i w||^2 + ||A_i^dagger w||^2``."""
    total = 0.0
    for ax in range(c.spec.d):
        lo, hi = ladder_pair(c, ax)
        total += lo.mass() + hi.mass()
    return total
