"""Independent time stepper for the trapped Hartree equations on a periodic grid.

The convolution ``|x|^2 * |u|^2`` equals ``M|x|^2 - 2 x.X + m2``, so the
nonlinear potential is a quadratic polynomial whose coefficients are moments
of ``|u|^2``.  A potential substep leaves ``|u|`` untouched, so those moments
are exactly constant across it and Strang splitting only incurs the usual
operator-splitting error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import GridState, laplacian
from .propagator import Model


class ToleranceError(RuntimeError):
    """Richardson estimate above the requested tolerance."""

    def __init__(self, message: str, estimate: float, required_dt: float):
        super().__init__(message)
        self.estimate = estimate
        self.required_dt = required_dt


def _moments(u: GridState):
    spec = u.spec
    rho = u.density
    cell = spec.cell
    M = rho.sum() * cell
    X = [float((spec.axis(k) * rho).sum() * cell) for k in range(spec.d)]
    m2 = float((spec.r2 * rho).sum() * cell)
    return float(M), X, m2


def effective_potential(u: GridState, lam: float, eta: float, model=Model.H) -> np.ndarray:
    """``lam|x|^2 + eta(M|x|^2 - 2x.X + m2)``; the ``m2`` term is absent for the primed model."""
    model = Model.parse(model)
    spec = u.spec
    M, X, m2 = _moments(u)
    V = (lam + eta * M) * spec.r2
    for k in range(spec.d):
        if X[k] != 0:
            V = V - 2 * eta * X[k] * spec.axis(k)
    if model is Model.H:
        V = V + eta * m2
    return V


def nonlinear_term(u: GridState, eta: float, model=Model.H) -> np.ndarray:
    """``eta (K * |u|^2) u`` for the model's kernel."""
    return effective_potential(u, 0.0, eta, model) * u.values


@dataclass
class StrangStepper:
    """Potential half step, full kinetic step, potential half step.

    Consecutive potential half steps are fused; the state is exact at every
    call boundary.
    """

    lam: float
    eta: float
    model: Model = Model.H

    def __post_init__(self):
        self.model = Model.parse(self.model)

    def _kick(self, values: np.ndarray, u_spec, tau: float) -> np.ndarray:
        u = GridState(u_spec, values)
        V = effective_potential(u, self.lam, self.eta, self.model)
        return np.exp(-0.5j * V * tau) * values

    def run(self, u: GridState, dt: float, steps: int) -> GridState:
        if steps == 0:
            return u
        spec = u.spec
        drift = np.exp(-0.5j * spec.xi2 * dt)
        v = self._kick(u.values, spec, dt / 2)
        for i in range(steps):
            v = np.fft.ifftn(drift * np.fft.fftn(v))
            v = self._kick(v, spec, dt if i < steps - 1 else dt / 2)
        return u.with_values(v)

    def step(self, u: GridState, dt: float) -> GridState:
        vmax = float(np.abs(effective_potential(u, self.lam, self.eta, self.model)).max())
        if dt * vmax > 1.0:
            warnings.warn(f"dt * max|V| = {dt * vmax:.2f} is not small", RuntimeWarning, stacklevel=2)
        return self.run(u, dt, 1)


def step(u: GridState, dt: float, lam: float, eta: float, model=Model.H) -> GridState:
    """One Strang step of ``2 i u_t = -Delta u + V(t, x; u) u``."""
    return StrangStepper(lam, eta, model).step(u, dt)


def _snapshots(stepper: StrangStepper, u0: GridState, t_end: float, samples: int, dt: float):
    interval = t_end / samples
    n = max(1, math.ceil(abs(interval) / dt - 1e-9))
    h = interval / n
    out = [u0]
    u = u0
    for _ in range(samples):
        u = stepper.run(u, h, n)
        out.append(u)
    return out, h


def _l2(a: GridState, b: GridState) -> float:
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.spec.cell))


def integrate(u0: GridState, t_end: float, lam: float, eta: float, model=Model.H,
              samples: int = 1, dt: float | None = None, tol: float | None = None,
              extrapolate: bool = False) -> list[GridState]:
    """Snapshots at ``linspace(0, t_end, samples + 1)``.

    With ``tol`` the run is repeated at ``dt/2`` and the Richardson estimate
    is checked.  ``extrapolate=True`` runs ``dt, dt/2, dt/4``, returns the
    fourth-order combination ``(4 u_{h/2} - u_h)/3`` from the two finest runs
    and estimates its error from the two extrapolants.  Each snapshot carries
    ``diagnostics['richardson_error']`` when an estimate exists.
    """
    if t_end == 0:
        return [u0]
    dt = dt or u0.spec.dt
    stepper = StrangStepper(lam, eta, model)
    if tol is None and not extrapolate:
        return _snapshots(stepper, u0, t_end, samples, dt)[0]
    runs = [_snapshots(stepper, u0, t_end, samples, dt / 2 ** k)[0] for k in range(3 if extrapolate else 2)]
    if not extrapolate:
        est = max(_l2(a, b) / 3 for a, b in zip(runs[0], runs[1]))
        result = [u.with_values(u.values, richardson_error=est) for u in runs[1]]
        order = 2
    else:
        r1 = [(4 * b.values - a.values) / 3 for a, b in zip(runs[0], runs[1])]
        r2 = [(4 * c.values - b.values) / 3 for b, c in zip(runs[1], runs[2])]
        cell = u0.spec.cell
        est = max(float(np.sqrt(np.sum(np.abs(p - q) ** 2) * cell)) for p, q in zip(r1, r2)) / 15
        result = [u0.with_values(v, richardson_error=est) for v in r2]
        order = 4
    if tol is not None and est > tol:
        need = dt * (tol / est) ** (1.0 / order) * 0.9
        raise ToleranceError(f"Richardson estimate {est:.2e} > {tol:.1e}; use dt <= {need:.3e}", est, need)
    return result


def pde_residual(states, times, lam: float, eta: float, model=Model.H) -> float:
    """Max relative residual ``||2i u_t + Delta u - lam|x|^2 u - eta N(u)|| / ||u||``.

    ``u_t`` uses fourth-order central differences, so the first and last two
    samples only serve as stencil points.
    """
    model = Model.parse(model)
    times = np.asarray(times, dtype=float)
    if len(states) != len(times) or len(times) < 5:
        raise ValueError("need at least five equally spaced samples")
    h = np.diff(times)
    if np.max(np.abs(h - h[0])) > 1e-12 * max(1.0, abs(h[0])):
        raise ValueError("samples must be equally spaced in time")
    h = h[0]
    worst = 0.0
    for j in range(2, len(times) - 2):
        u = states[j]
        ut = (states[j - 2].values - 8 * states[j - 1].values + 8 * states[j + 1].values
              - states[j + 2].values) / (12 * h)
        V = effective_potential(u, lam, eta, model)
        r = 2j * ut + laplacian(u) - V * u.values
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(u.values)))
    return worst
