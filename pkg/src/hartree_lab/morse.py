"""Second variation of the action at excited standing waves (d = 1, M = 1).

Two parameter cases are studied:

* case I:  lam = 0, eta = 1,  omega = 3 (n + 1/2)
* case II: lam = 2, eta = -1, omega = (n + 1/2)

In both, kappa = 1 at M = 1 and the profile is ``Omega_n``.  Writing a
perturbation as ``h = h_r + i h_i``,

    S''[h, h] = <L_plus h_r, h_r> + <L_minus h_i, h_i>,

with ``L_minus = -Delta + |x|^2 - (2n + 1)`` (diagonal, entries ``2(m - n)``)
and ``L_plus = L_minus + K`` where the Hartree correction has matrix

    K_jk = 2 eta [x2_nj d_nk + d_nj x2_nk - 2 x_nj x_nk].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hermite import BasisSpec, CoeffState, position_matrix, position_squared_matrix
from .observables import action

CASES = {"I": (0.0, 1.0), "II": (2.0, -1.0)}
ZERO_REL_TOL = 1e-8


def _case(case: str) -> tuple[float, float]:
    key = str(case).upper()
    if key not in CASES:
        raise ValueError(f"unknown case {case!r}; expected 'I' or 'II'")
    return CASES[key]


def omega_of_mass(case: str, n: int, M):
    """Standing-wave frequency as a function of mass along the mode-``n`` family."""
    M = np.asarray(M, dtype=float)
    if str(case).upper() == "I":
        return 3.0 * np.sqrt(M) * (n + 0.5)
    k = 2.0 - M
    return 2.0 * (n + 0.5) * (np.sqrt(k) - 0.5 * M / np.sqrt(k))


def omega_at_unit_mass(case: str, n: int) -> float:
    return float(omega_of_mass(case, n, 1.0))


@dataclass(frozen=True)
class HessianReport:
    case: str
    n: int
    cutoff: int
    subspace: str
    n_minus: int
    n_zero: int
    n_plus: int
    blocks: dict
    frame_matrix: np.ndarray
    charpoly: np.ndarray
    printed_frame: np.ndarray
    printed_charpoly: np.ndarray
    dpp_sign: int
    dM_domega: float
    spectra: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.n_minus + self.n_zero + self.n_plus

    def summary(self) -> dict:
        return {
            "case": self.case,
            "n": self.n,
            "cutoff": self.cutoff,
            "subspace": self.subspace,
            "n_minus_total": self.n_minus,
            "n_zero_total": self.n_zero,
            "n_plus_total": self.n_plus,
            "blocks": self.blocks,
            "frame_matrix": self.frame_matrix.tolist(),
            "frame_inertia": inertia(self.frame_matrix),
            "charpoly": self.charpoly.tolist(),
            "printed_frame": self.printed_frame.tolist(),
            "printed_frame_inertia": inertia(self.printed_frame),
            "printed_charpoly": self.printed_charpoly.tolist(),
            "dpp_sign": self.dpp_sign,
            "dM_domega": self.dM_domega,
        }


def inertia(A: np.ndarray, rel_tol: float = ZERO_REL_TOL) -> tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts of a symmetric matrix."""
    ev = np.linalg.eigvalsh(A)
    thr = rel_tol * max(1.0, float(np.max(np.abs(ev))))
    return int(np.sum(ev < -thr)), int(np.sum(np.abs(ev) <= thr)), int(np.sum(ev > thr))


def hartree_correction(n: int, size: int, eta: float) -> np.ndarray:
    x = position_matrix(size + 2)[:size, :size]
    x2 = position_squared_matrix(size)
    K = np.zeros((size, size))
    K[n, :] += x2[n]
    K[:, n] += x2[n]
    K -= 2.0 * np.outer(x[n], x[n])
    return 2.0 * eta * K


def hessian_blocks(case: str, n: int, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Full ``(L_plus, L_minus)`` on modes ``0..cutoff``."""
    _, eta = _case(case)
    size = cutoff + 1
    Lm = np.diag(2.0 * (np.arange(size) - n))
    return Lm + hartree_correction(n, size, eta), Lm


def printed_frame(case: str, n: int) -> np.ndarray:
    """Frame matrices exactly as displayed in the source derivation (kept for regression)."""
    p = math.sqrt(n * (n - 1)) / 4 if n >= 1 else 0.0
    q = math.sqrt((n + 1) * (n + 2)) / 4
    c = n + 0.5
    A = np.array([[-2.0, p, 0.0], [p, c, q], [0.0, q, 2.0]])
    if str(case).upper() == "II":
        A[0, 1] = A[1, 0] = -p
        A[1, 1] = -c
        A[1, 2] = A[2, 1] = -q
    return A


def printed_charpoly(case: str, n: int) -> np.ndarray:
    """Displayed cubic ``F(lam)`` as highest-first coefficients."""
    c = n + 0.5
    lin = -(n * n + n + 33) / 8.0
    if str(case).upper() == "I":
        return np.array([1.0, -c, lin, 3.5 * c])
    return np.array([1.0, c, lin, -3.5 * c])


def dpp_sign(case: str, n: int, h: float = 1e-5) -> tuple[int, float]:
    """Sign of ``d''(omega) = -(1/2) dM/domega`` at unit mass, plus ``dM/domega``."""
    _case(case)
    grid = np.linspace(0.9, 1.1, 41)
    w = omega_of_mass(case, n, grid)
    dw = np.diff(w)
    if not (np.all(dw > 0) or np.all(dw < 0)):
        raise ValueError("omega(M) is not monotone near M = 1")
    slope = float((omega_of_mass(case, n, 1 + h) - omega_of_mass(case, n, 1 - h)) / (2 * h))
    dM = 1.0 / slope
    return (1 if -0.5 * dM > 0 else -1), dM


def assemble_hessian(case: str, n: int, cutoff: int = 200, subspace: str = "even") -> HessianReport:
    if n < 0 or n % 2:
        raise ValueError(f"n must be a non-negative even integer, got {n}")
    if n + 2 >= cutoff:
        raise ValueError("cutoff must exceed n + 2")
    if subspace not in ("even", "full"):
        raise ValueError("subspace must be 'even' or 'full'")
    Lp, Lm = hessian_blocks(case, n, cutoff)
    idx = np.arange(0, cutoff + 1, 2) if subspace == "even" else np.arange(cutoff + 1)
    Lp_s, Lm_s = Lp[np.ix_(idx, idx)], Lm[np.ix_(idx, idx)]
    ip, im = inertia(Lp_s), inertia(Lm_s)
    frame_idx = [m for m in (n - 2, n, n + 2) if m >= 0]
    frame = Lp[np.ix_(frame_idx, frame_idx)]
    sign, dM = dpp_sign(case, n)
    return HessianReport(
        case=str(case).upper(), n=n, cutoff=cutoff, subspace=subspace,
        n_minus=ip[0] + im[0], n_zero=ip[1] + im[1], n_plus=ip[2] + im[2],
        blocks={"L_plus": ip, "L_minus": im},
        frame_matrix=frame, charpoly=np.poly(frame),
        printed_frame=printed_frame(case, n), printed_charpoly=printed_charpoly(case, n),
        dpp_sign=sign, dM_domega=dM,
        spectra={"L_plus": np.linalg.eigvalsh(Lp_s), "L_minus": np.linalg.eigvalsh(Lm_s)},
    )


def action_second_difference(case: str, n: int, direction: np.ndarray, imaginary: bool = False,
                             eps: float = 1e-2) -> float:
    """``d^2/de^2 S_omega(Omega_n + e h)`` at ``e = 0`` from action values alone.

    The action is a quartic polynomial in ``e``; the five-point stencil is exact
    for quartics, so only rounding error remains.
    """
    lam, eta = _case(case)
    omega = omega_at_unit_mass(case, n)
    h = np.asarray(direction, dtype=float)
    spec = BasisSpec(1, 1.0, len(h) - 1)
    phi = CoeffState.unit(spec, n)
    dirc = CoeffState(spec, (1j if imaginary else 1.0) * h)

    def S(e):
        return action(phi + dirc.scaled(e), omega, lam, eta)

    return (-S(2 * eps) + 16 * S(eps) - 30 * S(0.0) + 16 * S(-eps) - S(-2 * eps)) / (12 * eps ** 2)
