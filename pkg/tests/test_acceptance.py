"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantity next to its threshold.  Run with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time

import numpy as np
import pytest

from hartree_lab.galilean import ClassicalPath, GalileanParams, apply_galilean, compose_phase, wronskian
from hartree_lab.grid import GridSpec
from hartree_lab.hermite import BasisSpec, CoeffState, analyze, random_state, synthesize
from hartree_lab.morse import action_second_difference, assemble_hessian, hessian_blocks, printed_charpoly
from hartree_lab.observables import observables_grid
from hartree_lab.oracle import integrate, pde_residual
from hartree_lab.propagator import ExactPropagator, PsiClosedForm, predicted_center, psi_quadrature, spectral_evolve
from hartree_lab.waves import (PeakSpec, Perturbation, StabilityConfig, multi_peak, single_peak, slope_fit,
                               stability_trial)

GRID = GridSpec(1, 16.0, 1024)
TWO_PI = 2 * math.pi


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}")
        assert ok, detail
    return emit


def random_sigma_state(rng, cutoff=32, max_boost=1.0):
    c = random_state(BasisSpec(1, 1.0, cutoff), rng, modes=8, decay=0.3)
    a, b = rng.uniform(-max_boost, max_boost, 2)
    return apply_galilean(GalileanParams(0.0, 1.0, [a], [b]), synthesize(c, GRID))


# 1 ------------------------------------------------------------------------


def test_c01_oracle_equivalence(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst, worst_rich = 0.0, 0.0
    for k in range(10):
        u0 = random_sigma_state(rng)
        model = "H" if k % 2 == 0 else "Hprime"
        prop = ExactPropagator(model, u0, 0.0, 1.0)
        snaps = integrate(u0, TWO_PI, 0.0, 1.0, model, samples=8, dt=TWO_PI / 1024, tol=1e-8, extrapolate=True)
        worst_rich = max(worst_rich, snaps[-1].diagnostics["richardson_error"])
        for t, ref in zip(np.linspace(0, TWO_PI, 9), snaps):
            err = np.linalg.norm(prop.at(t).state.values - ref.values) / np.linalg.norm(ref.values)
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    report(1, "exact propagator vs grid oracle", worst <= 1e-6 and elapsed <= 60,
           f"max rel L2 {worst:.2e} (<= 1e-6), richardson {worst_rich:.1e}, {elapsed:.1f} s (<= 60 s)")


# 2 ------------------------------------------------------------------------


def _phase_rate(u0, lam, eta, t=0.3):
    u = ExactPropagator("H", u0, lam, eta).at(t).state
    return -np.angle(u0.inner(u)) / t


def test_c02_frequency_anchors(report):
    worst = 0.0
    for n in (0, 1, 2, 4):
        for M in (0.5, 1.0, 2.0):
            u0 = synthesize(CoeffState.unit(BasisSpec(1, M, n + 1), n, math.sqrt(M)), GRID)
            worst = max(worst, abs(_phase_rate(u0, 0.0, 1.0) - 1.5 * math.sqrt(M) * (n + 0.5)))
        u0 = synthesize(CoeffState.unit(BasisSpec(1, 1.0, n + 1), n), GRID)
        worst = max(worst, abs(_phase_rate(u0, 2.0, -1.0) - 0.5 * (n + 0.5)))
    report(2, "standing-wave phase rates", worst <= 1e-6, f"max |rate - anchor| {worst:.2e} (<= 1e-6)")


# 3 ------------------------------------------------------------------------


def _residual(closure, lam, eta, model="H", centers=(0.4, 1.7, 3.9)):
    worst = 0.0
    for tc in centers:
        ts = tc + 1e-3 * np.arange(-2, 3)
        worst = max(worst, pde_residual([closure(float(t)) for t in ts], ts, lam, eta, model))
    return worst


def test_c03_standing_wave_residual(report):
    sp = single_peak(0.5, 1.0, 1.0, 2, 0.3, -0.5, "H", GRID)
    sp_prime = single_peak(0.0, 1.0, 1.0, 1, 0.0, 0.6, "Hprime", GRID)
    mp = multi_peak(0.5, 1.0, 1.0, [PeakSpec(1.0, 0.4, -2.0, 0), PeakSpec(0.8j, -0.2, 2.0, 1)], grid=GRID)
    good = max(_residual(sp.at, 0.5, 1.0), _residual(sp_prime.at, 0.0, 1.0, "Hprime"), _residual(mp.at, 0.5, 1.0))

    def corrupt_single(t):
        v = sp.at(t)
        return v.with_values(np.exp(-0.05j * sp.omega * t) * v.values)

    base_rates = mp.rates()
    corrupted = multi_peak(0.5, 1.0, 1.0, mp.peaks, grid=GRID)
    corrupted.rates = lambda: 1.1 * base_rates
    bad = min(_residual(corrupt_single, 0.5, 1.0), _residual(corrupted.at, 0.5, 1.0))
    report(3, "closed-form standing waves solve the equation", good <= 1e-5 and bad > 1e-2,
           f"residual {good:.2e} (<= 1e-5), corrupted {bad:.2e} (> 1e-2)")


# 4 ------------------------------------------------------------------------


def test_c04_morse_table(report):
    t0 = time.perf_counter()
    rows, ok = [], True
    for m in (1, 2, 3):
        n = 2 * m
        for case, want, sign in (("I", 2 * m, -1), ("II", 2 * m + 1, 1)):
            a, b = assemble_hessian(case, n, 200), assemble_hessian(case, n, 400)
            ok &= a.n_minus == want and a.dpp_sign == sign and (a.n_minus, a.n_zero) == (b.n_minus, b.n_zero)
            rows.append(f"{case}{n}:{a.n_minus}/{b.n_minus}")
    elapsed = time.perf_counter() - t0
    report(4, "Morse index table", ok and elapsed <= 30, f"{' '.join(rows)} in {elapsed:.1f} s")


# 5 ------------------------------------------------------------------------


def test_c05_polynomial_identities(report):
    ok = True
    for n in range(2, 41, 2):
        FI, FII = printed_charpoly("I", n), printed_charpoly("II", n)
        ok &= bool(np.array_equal(FII, -FI * np.array([-1.0, 1.0, -1.0, 1.0])))
        ok &= abs(np.polyval(FI, 0.0) - 3.5 * (n + 0.5)) < 1e-12
        ok &= np.polyval(FI, n) < 0
    top = max(np.polyval(printed_charpoly("I", n), n) for n in range(2, 41, 2))
    report(5, "F_II(l) = -F_I(-l), F_I(0) = 7/2 (n+1/2), F_I(n) < 0", ok, f"max F_I(n) over even n in [2, 40]: {top:.3g}")


# 6 ------------------------------------------------------------------------


def test_c06_hessian_first_principles(report):
    rng = np.random.default_rng(6)
    cutoff, worst = 40, 0.0
    for case in ("I", "II"):
        Lp, _ = hessian_blocks(case, 2, cutoff)
        for _ in range(100):
            h = np.zeros(cutoff + 1)
            k = len(h[::2])
            h[::2] = rng.standard_normal(k) * np.exp(-0.15 * np.arange(k))
            q = h @ Lp @ h
            worst = max(worst, abs(action_second_difference(case, 2, h) - q) / abs(q))
    report(6, "assembled Hessian vs action second differences", worst <= 1e-6, f"max rel err {worst:.2e} (<= 1e-6)")


# 7 ------------------------------------------------------------------------

STABILITY_CASES = [("H", 1.0), ("Hprime", 1.0), ("Hprime", 0.5)]
DELTAS = [1e-2, 1e-3, 1e-4]
KINDS = ["mode", "boost", "shift", "mass"]


@pytest.mark.slow
@pytest.mark.parametrize("model,s", STABILITY_CASES)
def test_c07_stability_scaling(report, model, s):
    lines, ok = [], True
    for kind in KINDS:
        sups = []
        for d in DELTAS:
            cfg = StabilityConfig(model=model, n=(2,), M=1.0, lam=1.0, eta=1.0, s=s, delta=d,
                                  perturbations=(Perturbation(kind, (4,)),))
            sups.append(stability_trial(cfg).sup_dist)
        slope = slope_fit(DELTAS, sups)
        ratio = max(v / d for v, d in zip(sups, DELTAS))
        ok &= slope >= 0.9 and ratio <= 10
        lines.append(f"{kind}: slope {slope:.3f}, max sup/delta {ratio:.2f}")
    report(7, f"stability scaling ({model}, s={s})", ok, "; ".join(lines))


# 8 ------------------------------------------------------------------------


def test_c08_conservation(report):
    rng = np.random.default_rng(8)
    lam, eta = 0.3, 0.7
    u0 = random_sigma_state(rng, max_boost=0.6)
    o0 = observables_grid(u0, lam, eta)
    T = TWO_PI / math.sqrt(lam + eta * o0.mass)
    times = np.linspace(0, T, 9)
    dm = de = dx = dl4 = 0.0
    for model in ("H", "Hprime"):
        prop = ExactPropagator(model, u0, lam, eta)
        snaps = integrate(u0, T, lam, eta, model, samples=8, dt=T / 1024, extrapolate=True)
        for t, ref in zip(times, snaps):
            u = prop.at(t).state
            for v in (u, ref):
                o = observables_grid(v, lam, eta)
                dm = max(dm, abs(o.mass - o0.mass) / o0.mass)
                if model == "H":
                    de = max(de, abs(o.energy - o0.energy) / abs(o0.energy))
                X = observables_grid(v, lam, eta).position
                dx = max(dx, float(np.max(np.abs(X - predicted_center(prop.params, t)))))
            dl4 = max(dl4, abs(u.norm(4) - synthesize(prop.centered(t), GRID).norm(4)))
    ok = dm <= 1e-9 and de <= 1e-7 and dx <= 1e-8 and dl4 <= 1e-6
    report(8, "conservation and center law", ok,
           f"mass {dm:.1e} (<= 1e-9), energy {de:.1e} (<= 1e-7), X {dx:.1e} (<= 1e-8), L4 {dl4:.1e} (<= 1e-6)")


# 9 ------------------------------------------------------------------------


def test_c09_phase_conventions(report):
    w0 = CoeffState.unit(BasisSpec(1, 1.0, 2), 0)
    # single mode: no oscillating part, so Psi(1) is the slope
    slope = psi_quadrature(1.0, w0, 1.0)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        kappa = float(rng.uniform(0.3, 3.0))
        eta = float(rng.uniform(-2, 2))
        w = random_state(BasisSpec(1, kappa, 24), rng, modes=8, decay=0.3).scaled(rng.uniform(0.5, 2))
        for t in rng.uniform(0, 15, 3):
            worst = max(worst, abs(float(PsiClosedForm.from_w0(eta, w)(t)) - psi_quadrature(eta, w, t)))
    report(9, "Psi slope 1/4 and closed form vs quadrature", abs(slope - 0.25) <= 1e-9 and worst <= 1e-8,
           f"slope {slope:.12f} (1/4 within 1e-9), closed-form err {worst:.2e} (<= 1e-8)")


# 10 -----------------------------------------------------------------------


def _l2(v):
    return float(np.linalg.norm(v) * math.sqrt(GRID.cell))


def test_c10_galilean_algebra(report):
    rng = np.random.default_rng(10)
    comp = inv = inter = wr = 0.0
    for _ in range(10):
        kappa = float(rng.uniform(0.3, 2.0))
        t = float(rng.uniform(0, 4))
        a1, b1, a2, b2 = rng.uniform(-0.8, 0.8, 4)
        c = random_state(BasisSpec(1, kappa, 64), rng, modes=6)
        u = synthesize(c, GRID)
        lhs = apply_galilean(GalileanParams(t, kappa, [a1], [b1]), apply_galilean(GalileanParams(t, kappa, [a2], [b2]), u))
        rhs = apply_galilean(GalileanParams(t, kappa, [a1 + a2], [b1 + b2]), u)
        comp = max(comp, _l2(lhs.values - compose_phase(kappa, [a1], [b1], [a2], [b2]) * rhs.values))
        p = GalileanParams(t, kappa, [a1], [b1])
        inv = max(inv, _l2(apply_galilean(p.inverse(), apply_galilean(p, u)).values - u.values))
        left = synthesize(spectral_evolve(analyze(apply_galilean(GalileanParams(0.0, kappa, [a1], [b1]), u), c.spec), t), GRID)
        right = apply_galilean(p, synthesize(spectral_evolve(c, t), GRID))
        inter = max(inter, _l2(left.values - right.values))
        p1, p2 = ClassicalPath(kappa, [a1], [b1]), ClassicalPath(kappa, [a2], [b2])
        w0 = wronskian(p1, p2, 0.0)
        wr = max(wr, max(abs(wronskian(p1, p2, s) - w0) for s in np.linspace(0, 50, 26)))
    ok = max(comp, inv, inter) <= 1e-8 and wr <= 1e-12
    report(10, "Galilean algebra and Wronskian", ok,
           f"composition {comp:.1e}, inverse {inv:.1e}, intertwining {inter:.1e} (<= 1e-8), Wronskian {wr:.1e} (<= 1e-12)")
