"""Closed-form solution maps for the trapped Hartree equations.

For data ``u0`` with mass ``M``, center ``b = X/M`` and mean velocity ``a = P/M``
the solution is

    u(t) = exp(-i Psi(t)) G_lam(t,a,b) U_kappa(t) G_kappa(0,a,b)^{-1} u0,

with ``kappa = lam + eta M``.  The model with the ``|y|^2`` part of the kernel
removed uses ``Phi(t) = -(eta M / 2) int_0^t |g_lam|^2`` in place of ``Psi``.

Time convention: ``2 i u_t = -Delta u + ...``, so ``U_kappa(t)`` multiplies the
coefficient of ``Omega_{n,kappa}`` by ``exp(-i sqrt(kappa)(|n| + d/2) t)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .galilean import BOUNDARY_TOL, ClassicalPath, GalileanParams, apply_galilean, path_eval
from .grid import GridSpec, GridState
from .hermite import (TRUNCATION_TOL, BasisSpec, CoeffState, analyze, synthesize)
from .observables import cross_term, ladder_norms, observables_coeffs, observables_grid

PSI_AGREEMENT_TOL = 1e-8


class Model(str, enum.Enum):
    H = "H"
    HPRIME = "Hprime"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, Model):
            return value
        key = str(value).replace("'", "prime").replace("′", "prime")
        for m in cls:
            if m.value.lower() == key.lower():
                return m
        raise ValueError(f"unknown model {value!r}; expected 'H' or 'Hprime'")


class KappaError(ValueError):
    """Spectral machinery requested with ``kappa <= 0``."""

    code = "kappa_nonpositive"


@dataclass(frozen=True)
class ModelParams:
    d: int
    lam: float
    eta: float
    M: float
    a: np.ndarray
    b: np.ndarray

    @property
    def kappa(self) -> float:
        return self.lam + self.eta * self.M

    def spectral_ok(self) -> bool:
        return self.kappa > 0


def derive_params(u0, lam: float, eta: float) -> ModelParams:
    """Mass, mean velocity ``P/M`` and center ``X/M`` of the initial state."""
    obs = observables_grid(u0, lam, eta) if isinstance(u0, GridState) else observables_coeffs(u0, lam, eta)
    if not obs.mass > 0:
        raise ValueError("initial state has zero mass; a = P/M and b = X/M are undefined")
    return ModelParams(len(obs.position), lam, eta, obs.mass, obs.momentum / obs.mass, obs.position / obs.mass)


def spectral_rates(spec: BasisSpec) -> np.ndarray:
    return spec.energies()


def spectral_evolve(c: CoeffState, t: float) -> CoeffState:
    """Apply ``U_kappa(t)`` in the eigenbasis."""
    return c.with_coeffs(c.coeffs * np.exp(-1j * spectral_rates(c.spec) * t))


# ---------------------------------------------------------------------------
# phases


@dataclass(frozen=True)
class PhaseLedger:
    psi: float = 0.0
    phi: float = 0.0
    method: str = "closed_form"


def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def x_moment_along_flow(w0: CoeffState, s: np.ndarray) -> np.ndarray:
    """``||x U_kappa(s) w0||^2`` for an array of times, by ladder algebra."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    spec = w0.spec
    pad = w0.padded(1)
    rates = pad.spec.energies()
    c = pad.coeffs[None] * np.exp(-1j * rates[None] * s.reshape((-1,) + (1,) * spec.d))
    total = np.zeros(len(s))
    for ax in range(spec.d):
        a = np.moveaxis(c, ax + 1, 1)
        k = np.arange(a.shape[1]).reshape((1, -1) + (1,) * (a.ndim - 2))
        xu = np.zeros_like(a)
        xu[:, :-1] += np.sqrt(k[:, 1:]) * a[:, 1:]
        xu[:, 1:] += np.sqrt(k[:, 1:]) * a[:, :-1]
        total += np.sum(np.abs(xu) ** 2, axis=tuple(range(1, a.ndim))) / (2 * spec.scale ** 2)
    return total


def psi_quadrature(eta: float, w0: CoeffState, t: float, atol: float = 1e-10) -> float:
    """``(eta/2) int_0^t ||x U(s) w0||^2 ds`` by adaptive composite Gauss-Legendre."""
    if eta == 0 or t == 0:
        return 0.0
    sign = 1.0 if t > 0 else -1.0
    T = abs(t)
    h = 0.1 / math.sqrt(w0.spec.kappa)
    edges = np.linspace(0.0, T, max(1, math.ceil(T / h)) + 1)
    x8, w8 = _gauss_legendre(8)
    x16, w16 = _gauss_legendre(16)

    def panel(lo, hi, xs, ws):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return half * float(np.sum(ws * x_moment_along_flow(w0, sign * (mid + half * xs))))

    total = 0.0
    stack = list(zip(edges[:-1], edges[1:]))
    while stack:
        lo, hi = stack.pop()
        coarse, fine = panel(lo, hi, x8, w8), panel(lo, hi, x16, w16)
        if abs(fine - coarse) > atol * (hi - lo) / T and hi - lo > 1e-6 * h:
            mid = 0.5 * (lo + hi)
            stack += [(lo, mid), (mid, hi)]
        else:
            total += fine
    return sign * 0.5 * eta * total


@dataclass(frozen=True)
class PsiClosedForm:
    """Linear-plus-oscillating form of ``Psi``.

    ``Psi(t) = eta/(4 sqrt k) S t + eta/(2k) sin(sqrt k t) Re(exp(-i sqrt k t) C)``
    with ``S = sum ||A w||^2 + ||A^dagger w||^2`` and ``C = sum (A w, A^dagger w)``.
    """

    eta: float
    kappa: float
    ladder_sum: float
    cross: complex

    @classmethod
    def from_w0(cls, eta: float, w0: CoeffState) -> "PsiClosedForm":
        return cls(eta, w0.spec.kappa, ladder_norms(w0), cross_term(w0))

    @property
    def slope(self) -> float:
        return self.eta * self.ladder_sum / (4 * math.sqrt(self.kappa))

    def __call__(self, t):
        w = math.sqrt(self.kappa)
        t = np.asarray(t, dtype=float)
        osc = np.sin(w * t) * np.real(np.exp(-1j * w * t) * self.cross)
        return self.slope * t + self.eta / (2 * self.kappa) * osc


def psi_phase(params: ModelParams, w0: CoeffState, t: float, method: str = "quadrature") -> float:
    if params.kappa <= 0:
        raise KappaError("Psi closed form needs kappa > 0")
    if method == "quadrature":
        return psi_quadrature(params.eta, w0, t)
    if method == "closed_form":
        return float(PsiClosedForm.from_w0(params.eta, w0)(t))
    raise ValueError(f"unknown method {method!r}")


def path_square_integral(lam: float, a, b, t: float) -> float:
    """``int_0^t |g_lam(s, a, b)|^2 ds`` in closed form."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    aa, bb, ab = float(a @ a), float(b @ b), float(a @ b)
    if lam > 0:
        w = math.sqrt(lam)
        s2 = math.sin(2 * w * t) / (4 * w)
        return aa / lam * (t / 2 - s2) + bb * (t / 2 + s2) + 2 * ab / w * math.sin(w * t) ** 2 / (2 * w)
    if lam == 0:
        return aa * t ** 3 / 3 + ab * t ** 2 + bb * t
    w = math.sqrt(-lam)
    s2 = math.sinh(2 * w * t) / (4 * w)
    return aa / (-lam) * (s2 - t / 2) + bb * (s2 + t / 2) + 2 * ab / w * math.sinh(w * t) ** 2 / (2 * w)


def phi_phase(params: ModelParams, t: float) -> float:
    return -0.5 * params.eta * params.M * path_square_integral(params.lam, params.a, params.b, t)


# ---------------------------------------------------------------------------
# the propagator


@dataclass(frozen=True)
class PropagationResult:
    t: float
    state: GridState
    phases: PhaseLedger
    diagnostics: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return bool(self.diagnostics.get("flagged", False))


class ExactPropagator:
    """Precomputes ``w0 = G_kappa(0,a,b)^{-1} u0`` once; evaluates any time cheaply.

    ``phase_method='closed_form'`` is validated against the defining quadrature
    over one trap period when the propagator is built.
    """

    def __init__(self, model, u0: GridState, lam: float, eta: float, cutoff: int | None = None,
                 phase_method: str = "closed_form", validate: bool = True):
        self.model = Model.parse(model)
        self.u0 = u0
        self.grid = u0.spec
        self.params = derive_params(u0, lam, eta)
        p = self.params
        if p.kappa <= 0:
            raise KappaError(f"kappa = {p.kappa:g} <= 0; use the grid oracle")
        if cutoff is None:
            cutoff = 64 if p.d == 1 else 32
        centered = apply_galilean(GalileanParams(0.0, p.kappa, -p.a, -p.b), u0)
        self.w0 = analyze(centered, BasisSpec(p.d, p.kappa, cutoff))
        self.diagnostics = {
            "truncation_loss": self.w0.diagnostics["truncation_loss"],
            "boundary_loss": centered.diagnostics.get("boundary_loss", 0.0),
        }
        self.phase_method = phase_method
        self._psi = PsiClosedForm.from_w0(eta, self.w0)
        if validate and self.model is Model.H and phase_method == "closed_form":
            T = 2 * math.pi / math.sqrt(p.kappa)
            err = max(abs(psi_quadrature(eta, self.w0, t) - float(self._psi(t))) for t in (0.37 * T, T))
            self.diagnostics["psi_validation"] = err
            if err > PSI_AGREEMENT_TOL * max(1.0, abs(self._psi(T))):
                raise RuntimeError(f"closed-form Psi disagrees with quadrature by {err:.2e}")

    @property
    def kappa(self) -> float:
        return self.params.kappa

    def phases(self, t: float) -> PhaseLedger:
        if self.model is Model.H:
            psi = float(self._psi(t)) if self.phase_method == "closed_form" else psi_quadrature(self.params.eta, self.w0, t)
            return PhaseLedger(psi=psi, phi=0.0, method=self.phase_method)
        return PhaseLedger(psi=0.0, phi=phi_phase(self.params, t), method="closed_form")

    def phase(self, t: float) -> float:
        ph = self.phases(t)
        return ph.psi if self.model is Model.H else ph.phi

    def centered(self, t: float) -> CoeffState:
        """``U_kappa(t) w0`` in coefficient form."""
        return spectral_evolve(self.w0, t)

    def at(self, t: float, grid: GridSpec | None = None) -> PropagationResult:
        grid = grid or self.grid
        p = self.params
        w = synthesize(self.centered(t), grid)
        moved = apply_galilean(GalileanParams(t, p.lam, p.a, p.b), w)
        ph = self.phases(t)
        theta = ph.psi if self.model is Model.H else ph.phi
        state = moved.with_values(np.exp(-1j * theta) * moved.values)
        diag = dict(self.diagnostics)
        diag["boundary_loss"] = diag["boundary_loss"] + moved.diagnostics.get("boundary_loss", 0.0)
        diag["edge_density"] = state.boundary_ratio()
        diag["flagged"] = (diag["boundary_loss"] > BOUNDARY_TOL or diag["truncation_loss"] > TRUNCATION_TOL)
        return PropagationResult(t, state, ph, diag)

    def trajectory(self, times) -> list[PropagationResult]:
        return [self.at(float(t)) for t in times]


def propagate(model, u0: GridState, t: float, lam: float, eta: float, cutoff: int | None = None,
              phase_method: str = "closed_form") -> PropagationResult:
    """One-shot propagation; ``kappa <= 0`` is routed through the grid oracle."""
    params = derive_params(u0, lam, eta)
    if params.kappa <= 0:
        from .oracle import integrate

        snaps = integrate(u0, t, lam, eta, Model.parse(model), samples=1)
        return PropagationResult(t, snaps[-1], PhaseLedger(method="grid_oracle"),
                                 {"route": "grid_oracle", "flagged": False})
    return ExactPropagator(model, u0, lam, eta, cutoff, phase_method).at(t)


def center_path(params: ModelParams) -> ClassicalPath:
    return ClassicalPath(params.lam, params.a, params.b)


def predicted_center(params: ModelParams, t: float) -> np.ndarray:
    """``X[u(t)] = M g_lam(t, a, b)``."""
    return params.M * path_eval(center_path(params), t)[0]
