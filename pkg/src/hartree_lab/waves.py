"""Standing waves, their traveling variants, and orbital-stability experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .galilean import ClassicalPath, GalileanParams, apply_galilean, path_eval
from .grid import GridSpec, GridState, translate
from .hermite import BasisSpec, CoeffState, MultiIndex, basis_on_axis, synthesize
from .observables import observables_grid
from .propagator import ExactPropagator, Model


class AdmissibilityError(ValueError):
    """A stability hypothesis or a closed-form admissibility condition fails."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


def _vec(v, d):
    v = np.atleast_1d(np.asarray(v if v is not None else 0.0, dtype=float))
    return np.full(d, v[0]) if v.size == 1 and d > 1 else v


def mode_state(grid: GridSpec, kappa: float, n, M: float = 1.0) -> GridState:
    """``M^{1/2} Omega_{n,kappa}`` sampled on the grid."""
    n = MultiIndex.of(n, grid.d)
    spec = BasisSpec(grid.d, kappa, max(n.entries) + 1)
    return synthesize(CoeffState.unit(spec, n, math.sqrt(M)), grid)


# ---------------------------------------------------------------------------
# single peak


@dataclass(frozen=True)
class SinglePeak:
    model: Model
    lam: float
    eta: float
    M: float
    n: MultiIndex
    a1: np.ndarray
    b1: np.ndarray
    grid: GridSpec

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def kappa(self) -> float:
        return self.lam + self.eta * self.M

    @property
    def level(self) -> float:
        return self.n.degree() + self.d / 2

    @property
    def omega(self) -> float:
        """Frequency in ``exp(-i omega t / 2)``."""
        k = self.kappa
        if self.model is Model.H:
            return (2 * math.sqrt(k) + self.eta * self.M / math.sqrt(k)) * self.level
        return 2 * math.sqrt(k) * self.level - self.eta * self.M * float(self.b1 @ self.b1)

    @property
    def profile(self) -> GridState:
        return mode_state(self.grid, self.kappa, self.n, self.M)

    def initial(self) -> GridState:
        return apply_galilean(GalileanParams(0.0, self.kappa, self.a1, self.b1), self.profile)

    def at(self, t: float) -> GridState:
        moved = apply_galilean(GalileanParams(t, self.lam, self.a1, self.b1), self.profile)
        return moved.with_values(np.exp(-0.5j * self.omega * t) * moved.values)

    def center(self, t: float) -> np.ndarray:
        return path_eval(ClassicalPath(self.lam, self.a1, self.b1), t)[0]

    def __call__(self, t: float) -> GridState:
        return self.at(t)


def single_peak(lam: float, eta: float, M: float, n, a1=0.0, b1=0.0, model=Model.H,
                grid: GridSpec | None = None, atol: float = 1e-12) -> SinglePeak:
    """Traveling single-peak solution ``exp(-i w t/2) M^{1/2} G_lam(t,a1,b1) Omega_{n,kappa}``."""
    model = Model.parse(model)
    grid = grid or GridSpec(np.size(n) if not np.isscalar(n) else 1, 16.0, 1024)
    d = grid.d
    n = MultiIndex.of(n, d)
    a1, b1 = _vec(a1, d), _vec(b1, d)
    kappa = lam + eta * M
    if kappa <= 0:
        raise AdmissibilityError("kappa_nonpositive", f"kappa = lam + eta M = {kappa:g} must be positive")
    if model is Model.HPRIME:
        if abs(float(a1 @ a1) - lam * float(b1 @ b1)) > atol:
            raise AdmissibilityError("speed_radius_mismatch", "the primed model needs |a1|^2 = lam |b1|^2")
        if abs(float(a1 @ b1)) > atol:
            raise AdmissibilityError("velocity_not_orthogonal", "the primed model needs a1 . b1 = 0")
    return SinglePeak(model, lam, eta, M, n, a1, b1, grid)


# ---------------------------------------------------------------------------
# multi peak


@dataclass(frozen=True)
class PeakSpec:
    alpha: complex
    a: np.ndarray
    b: np.ndarray
    n: MultiIndex


@dataclass
class MultiPeak:
    model: Model
    lam: float
    eta: float
    M: float
    peaks: list
    grid: GridSpec
    mu: float
    a: np.ndarray
    b: np.ndarray
    tilde_alpha: np.ndarray
    propagator: ExactPropagator = field(repr=False)

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def kappa(self) -> float:
        return self.lam + self.eta * self.M

    @property
    def relative_period(self) -> float:
        return 2 * math.pi / math.sqrt(self.kappa)

    def initial(self) -> GridState:
        return self.propagator.u0

    def rates(self) -> np.ndarray:
        return np.array([math.sqrt(self.kappa) * (p.n.degree() + self.d / 2) for p in self.peaks])

    def at(self, t: float) -> GridState:
        total = np.zeros(self.grid.shape, dtype=complex)
        base = self.propagator.phase(t)
        for p, at, rate in zip(self.peaks, self.tilde_alpha, self.rates()):
            prof = mode_state(self.grid, self.kappa, p.n)
            rel = apply_galilean(GalileanParams(t, self.kappa, p.a - self.a, p.b - self.b), prof)
            total += at * np.exp(-1j * (base + rate * t)) * rel.values
        u = GridState(self.grid, self.mu * total)
        return apply_galilean(GalileanParams(t, self.lam, self.a, self.b), u)

    def peak_centers(self, t: float) -> list[np.ndarray]:
        g = path_eval(ClassicalPath(self.lam, self.a, self.b), t)[0]
        return [g + path_eval(ClassicalPath(self.kappa, p.a - self.a, p.b - self.b), t)[0] for p in self.peaks]

    def __call__(self, t: float) -> GridState:
        return self.at(t)


def multi_peak(lam: float, eta: float, M: float, peaks: Sequence[PeakSpec], model=Model.H,
               grid: GridSpec | None = None, cutoff: int | None = None) -> MultiPeak:
    """Superposition of Galilean-boosted modes normalized to mass ``M``."""
    model = Model.parse(model)
    if not peaks:
        raise ValueError("need at least one peak")
    grid = grid or GridSpec(peaks[0].n.d, 16.0, 1024)
    d = grid.d
    peaks = [PeakSpec(complex(p.alpha), _vec(p.a, d), _vec(p.b, d), MultiIndex.of(p.n, d)) for p in peaks]
    kappa = lam + eta * M
    if kappa <= 0:
        raise AdmissibilityError("kappa_nonpositive", f"kappa = lam + eta M = {kappa:g} must be positive")
    raw = np.zeros(grid.shape, dtype=complex)
    for p in peaks:
        raw += p.alpha * apply_galilean(GalileanParams(0.0, kappa, p.a, p.b), mode_state(grid, kappa, p.n)).values
    raw_state = GridState(grid, raw)
    m_raw = raw_state.mass()
    if m_raw < 1e-14:
        raise AdmissibilityError("zero_mass_superposition", "the peaks cancel to a zero state")
    mu = math.sqrt(M / m_raw)
    u0 = raw_state.scaled(mu)
    obs = observables_grid(u0, lam, eta)
    a, b = obs.momentum / obs.mass, obs.position / obs.mass
    tilde = np.array([p.alpha * np.exp(0.5j * (p.a @ b - p.b @ a)) for p in peaks])
    prop = ExactPropagator(model, u0, lam, eta, cutoff)
    return MultiPeak(model, lam, eta, M, peaks, grid, mu, a, b, tilde, prop)


# ---------------------------------------------------------------------------
# modulated distance


class ModulatedDistance:
    """``inf_{theta, y} ||phi - e^{i theta} u(. - y)||_{Sigma^s}`` against a fixed reference.

    Coefficients in the unit-scale Hermite basis are taken by grid quadrature.
    All grid-multiple shifts inside ``|y| <= y_max`` are scanned at once with
    FFT correlations, then the best one is refined continuously.
    """

    def __init__(self, phi: GridState, s: float, cutoff: int = 64, y_max: float = 5.0,
                 ytol: float = 1e-8):
        self.grid = phi.spec
        self.s = s
        self.y_max = y_max
        self.ytol = ytol
        self.spec = BasisSpec(self.grid.d, 1.0, cutoff)
        self.B = basis_on_axis(self.spec, self.grid.x)  # (N+1, points)
        self.weights = (self.spec.degrees() + self.grid.d / 2.0) ** s
        self.c_phi = self.project(phi.values)
        self.phi_norm2 = float(np.sum(self.weights * np.abs(self.c_phi) ** 2))
        shifts = self.grid.dx * np.fft.fftfreq(self.grid.points, d=1.0 / self.grid.points)
        self._shifts = shifts
        self._window = np.abs(shifts) <= y_max
        if self.grid.d == 1:
            self._Bhat = np.fft.fft(self.B, axis=1)
            self._Bhat_c = np.conj(self._Bhat) * (self.grid.dx / self.grid.points)

    def project(self, values: np.ndarray) -> np.ndarray:
        c = values
        for ax in range(self.grid.d):
            c = np.moveaxis(np.tensordot(self.B, c, axes=([1], [ax])), 0, ax)
        return c * self.grid.cell

    def norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.project(values)) ** 2)))

    def _shifted_coeffs(self, u: GridState, y, uh=None) -> np.ndarray:
        if uh is None:
            return self.project(translate(u, y))
        # Parseval: one matvec against the transformed basis, no inverse FFT
        return self._Bhat_c @ (uh * np.exp(-1j * self.grid.xi * float(y[0])))

    def _objective(self, u: GridState, y, uh=None) -> tuple[float, np.ndarray]:
        c = self._shifted_coeffs(u, y, uh)
        ip = np.sum(self.weights * np.conj(self.c_phi) * c)
        val = self.phi_norm2 + float(np.sum(self.weights * np.abs(c) ** 2)) - 2 * abs(ip)
        return val, c

    def _coarse_1d(self, u: GridState) -> float:
        uh = np.fft.fft(u.values)
        rev = np.roll(uh[::-1], 1)  # transform of k -> u_{-k}
        C = np.fft.ifft(self._Bhat * rev[None, :], axis=1) * self.grid.dx  # (N+1, shifts)
        C = C[:, self._window]
        w = self.weights[:, None]
        vals = (self.phi_norm2 + np.sum(w * np.abs(C) ** 2, axis=0)
                - 2 * np.abs(np.sum(w * np.conj(self.c_phi)[:, None] * C, axis=0)))
        return float(self._shifts[self._window][int(np.argmin(vals))])

    def _coarse_nd(self, u: GridState) -> np.ndarray:
        d = self.grid.d
        base = np.arange(-int(self.y_max / self.grid.dx), int(self.y_max / self.grid.dx) + 1) * self.grid.dx
        step = max(1, len(base) // 24)
        cand = base[::step]
        best, arg = np.inf, np.zeros(d)
        for y in np.array(np.meshgrid(*([cand] * d), indexing="ij")).reshape(d, -1).T:
            if np.linalg.norm(y) > self.y_max:
                continue
            v = self._objective(u, y)[0]
            if v < best:
                best, arg = v, y
        return arg

    def __call__(self, u: GridState) -> tuple[float, np.ndarray, float]:
        """Return ``(distance, y, theta)``."""
        if self.grid.d == 1:
            uh = np.fft.fft(u.values)
            y0 = self._coarse_1d(u)
            h = self.grid.dx
            f = lambda y: self._objective(u, [y], uh)[0]
            res = minimize_scalar(f, bracket=(y0 - h, y0, y0 + h), method="golden", tol=self.ytol)
            y = np.array([res.x if f(res.x) <= f(y0) else y0])
        else:
            y0 = self._coarse_nd(u)
            res = minimize(lambda y: self._objective(u, y)[0], y0, method="Nelder-Mead",
                           options={"xatol": self.ytol, "fatol": 1e-16})
            y = res.x
        c = self._objective(u, y)[1]
        ip = np.sum(self.weights * np.conj(c) * self.c_phi)
        theta = float(np.angle(ip)) if abs(ip) > 0 else 0.0
        diff = self.c_phi - np.exp(1j * theta) * c
        dist = float(np.sqrt(np.sum(self.weights * np.abs(diff) ** 2)))
        return dist, y, theta


def modulated_distance(phi: GridState, u: GridState, s: float, cutoff: int = 64, y_max: float = 5.0) -> float:
    return ModulatedDistance(phi, s, cutoff, y_max)(u)[0]


# ---------------------------------------------------------------------------
# stability trials


@dataclass(frozen=True)
class Perturbation:
    """One component of a perturbation; amplitudes are multiplied by ``delta``.

    kind: ``mode`` (add ``delta * amplitude * M^{1/2} Omega_{m,kappa}``),
    ``boost`` (``G(0, delta*direction, 0)``), ``shift`` (``G(0, 0, delta*direction)``)
    ``mass`` (multiply by ``sqrt(1 + delta)``) or ``random`` (a seeded unit
    direction spread over the lowest ``modes`` levels per axis).
    """

    kind: str
    mode: tuple = (0,)
    amplitude: complex = 1.0
    direction: tuple = (1.0,)
    seed: int = 0
    modes: int = 8

    def __post_init__(self):
        if self.kind not in ("mode", "boost", "shift", "mass", "random"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")


@dataclass(frozen=True)
class StabilityConfig:
    model: str = "H"
    n: tuple = (0,)
    M: float = 1.0
    lam: float = 0.0
    eta: float = 1.0
    s: float = 1.0
    perturbations: tuple = (Perturbation("mode", (2,)),)
    delta: float = 1e-3
    periods: float = 20.0
    samples_per_period: int = 16
    half_width: float = 16.0
    points: int = 1024
    cutoff: int = 64
    y_max: float = 5.0

    @property
    def kappa(self) -> float:
        return self.lam + self.eta * self.M

    @property
    def horizon(self) -> float:
        return self.periods * 2 * math.pi / math.sqrt(self.kappa)


@dataclass(frozen=True)
class StabilityReport:
    s: float
    delta: float
    T: float
    sup_dist: float
    times: np.ndarray
    trajectory: np.ndarray
    initial_dist: float


def check_stability_hypotheses(cfg: StabilityConfig) -> None:
    model = Model.parse(cfg.model)
    if cfg.lam < 0:
        raise AdmissibilityError("lambda_negative", "stability needs lam >= 0")
    if cfg.kappa <= 0:
        raise AdmissibilityError("kappa_nonpositive", "stability needs kappa = lam + eta M > 0")
    if cfg.M <= 0:
        raise AdmissibilityError("mass_nonpositive", "stability needs M > 0")
    s_min = 1.0 if model is Model.H else 0.5
    if cfg.s < s_min:
        raise AdmissibilityError("sigma_exponent_too_small", f"the {model.value} model needs s >= {s_min}")


def perturbed_initial(cfg: StabilityConfig, grid: GridSpec) -> tuple[GridState, GridState]:
    """Return ``(phi, u0)``."""
    phi = mode_state(grid, cfg.kappa, cfg.n, cfg.M)
    u = phi
    for p in cfg.perturbations:
        if p.kind == "mode":
            u = u + mode_state(grid, cfg.kappa, p.mode, cfg.M).scaled(cfg.delta * p.amplitude)
        elif p.kind == "boost":
            u = apply_galilean(GalileanParams(0.0, cfg.kappa, cfg.delta * _vec(p.direction, grid.d), np.zeros(grid.d)), u)
        elif p.kind == "shift":
            u = apply_galilean(GalileanParams(0.0, cfg.kappa, np.zeros(grid.d), cfg.delta * _vec(p.direction, grid.d)), u)
        elif p.kind == "mass":
            u = u.scaled(math.sqrt(1.0 + cfg.delta))
        else:
            spec = BasisSpec(grid.d, cfg.kappa, p.modes - 1)
            rng = np.random.default_rng(p.seed)
            c = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
            c *= math.sqrt(cfg.M) / np.linalg.norm(c)
            u = u + synthesize(CoeffState(spec, c), grid).scaled(cfg.delta * p.amplitude)
    return phi, u


def stability_trial(cfg: StabilityConfig) -> StabilityReport:
    check_stability_hypotheses(cfg)
    d = len(cfg.n)
    grid = GridSpec(d, cfg.half_width, cfg.points)
    phi, u0 = perturbed_initial(cfg, grid)
    dist = ModulatedDistance(phi, cfg.s, cfg.cutoff, cfg.y_max)
    prop = ExactPropagator(cfg.model, u0, cfg.lam, cfg.eta, cutoff=cfg.cutoff)
    n_samples = int(round(cfg.periods * cfg.samples_per_period))
    times = np.linspace(0.0, cfg.horizon, n_samples + 1)
    traj = np.array([dist(prop.at(t).state)[0] for t in times])
    return StabilityReport(cfg.s, cfg.delta, cfg.horizon, float(traj.max()), times, traj, float(traj[0]))


def slope_fit(deltas, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(deltas)``."""
    return float(np.polyfit(np.log(deltas), np.log(values), 1)[0])
