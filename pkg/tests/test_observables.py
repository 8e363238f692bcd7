import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hartree_lab.galilean import GalileanParams, apply_galilean
from hartree_lab.grid import GridSpec
from hartree_lab.hermite import BasisSpec, CoeffState, random_state, synthesize
from hartree_lab.observables import (action, energy_via_w0, ground_energy, observables_coeffs,
                                     observables_grid, xp_from_coeffs)


def ground(grid, kappa=1.0, M=1.0):
    return synthesize(CoeffState.unit(BasisSpec(grid.d, kappa, 4), 0, math.sqrt(M)), grid)


def test_ground_state_observables(grid1):
    for M in (0.5, 1.0, 2.0):
        o = observables_grid(ground(grid1, 1.0, M), 0.0, 1.0)
        assert abs(o.position[0]) < 1e-14 and abs(o.momentum[0]) < 1e-14
        assert o.energy == pytest.approx(M / 4 + M * M / 4, abs=1e-12)


def test_double_integral_identity():
    grid = GridSpec(1, 10.0, 128)
    u = grid.sample(lambda x: np.exp(-(x - 2) ** 2) + 0.6j * np.exp(-(x + 1.5) ** 2 / 0.5) * np.exp(0.4j * x))
    rho = u.density
    x = grid.x
    direct = float(np.sum((x[:, None] - x[None, :]) ** 2 * rho[:, None] * rho[None, :]) * grid.dx ** 2)
    assert observables_grid(u, 0, 1).interaction == pytest.approx(direct, rel=1e-10)


def test_double_integral_identity_2d():
    grid = GridSpec(2, 6.0, 64)
    u = grid.sample(lambda x, y: np.exp(-((x - 1) ** 2 + y ** 2)) + 0.5 * np.exp(-(x ** 2 + (y + 1.5) ** 2)))
    rho = u.density.ravel()
    X, Y = (a.ravel() for a in np.meshgrid(grid.x, grid.x, indexing="ij"))
    d2 = (X[:, None] - X[None, :]) ** 2 + (Y[:, None] - Y[None, :]) ** 2
    direct = float(rho @ d2 @ rho) * grid.cell ** 2
    assert observables_grid(u, 0, 1).interaction == pytest.approx(direct, rel=1e-10)


def test_xp_examples(grid1):
    spec = BasisSpec(1, 1.0, 4)
    for n in range(5):
        X, P = xp_from_coeffs(CoeffState.unit(spec, n))
        assert X[0] == 0 and P[0] == 0
    X, _ = xp_from_coeffs((CoeffState.unit(spec, 0) + CoeffState.unit(spec, 1)).scaled(2 ** -0.5))
    assert X[0] == pytest.approx(2 ** -0.5)
    c = (CoeffState.unit(spec, 0) + CoeffState.unit(spec, 1, 1j)).scaled(2 ** -0.5)
    _, P = xp_from_coeffs(c)
    grid_P = observables_grid(synthesize(c, grid1), 0, 0).momentum[0]
    assert P[0] == pytest.approx(grid_P, abs=1e-12)
    assert P[0] == pytest.approx(2 ** -0.5, abs=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(0.3, 3.0), st.sampled_from([1, 2]))
def test_coefficient_and_grid_agree(seed, kappa, d):
    grid = GridSpec(1, 16.0, 512) if d == 1 else GridSpec(2, 10.0, 128)
    spec = BasisSpec(d, kappa, 24 if d == 1 else 10)
    c = random_state(spec, np.random.default_rng(seed), modes=6 if d == 1 else 4)
    og = observables_grid(synthesize(c, grid), 0.3, 0.7)
    oc = observables_coeffs(c, 0.3, 0.7)
    assert og.mass == pytest.approx(oc.mass, abs=1e-8)
    assert np.allclose(og.position, oc.position, atol=1e-8)
    assert np.allclose(og.momentum, oc.momentum, atol=1e-8)
    assert og.m2 == pytest.approx(oc.m2, abs=1e-8)
    assert og.energy == pytest.approx(oc.energy, abs=1e-8)


@given(st.integers(0, 2 ** 31))
def test_cauchy_schwarz(seed):
    c = random_state(BasisSpec(1, 1.0, 20), np.random.default_rng(seed))
    o = observables_coeffs(c, 0, 1)
    assert o.mass >= 0 and o.m2 >= 0 and o.kinetic >= 0
    assert float(o.position @ o.position) <= o.mass * o.m2 + 1e-12


def test_action_examples(grid1):
    u = ground(grid1)
    assert action(u, 0.0, 0.0, 1.0) == pytest.approx(observables_grid(u, 0, 1).energy)
    assert action(grid1.sample(lambda x: 0 * x), 1.7, 0.0, 1.0) == 0.0


@pytest.mark.parametrize("n", [0, 2, 4])
def test_action_derivative_along_family(n):
    """d(omega) = S_omega(phi_omega) along the case-I family has d' = -M/2."""
    def d_of(M):
        phi = CoeffState.unit(BasisSpec(1, M, n + 4), n, math.sqrt(M))
        return action(phi, 3 * math.sqrt(M) * (n + 0.5), 0.0, 1.0), 3 * math.sqrt(M) * (n + 0.5)

    for M in (0.7, 1.0, 1.6):
        h = 1e-4
        (dp, wp), (dm, wm) = d_of(M + h), d_of(M - h)
        assert (dp - dm) / (wp - wm) == pytest.approx(-M / 2, rel=1e-7)


def test_energy_via_w0(grid1):
    for M, lam, eta in [(1.0, 0.0, 1.0), (2.0, 0.5, 0.4), (1.0, 2.0, -1.0)]:
        kappa = lam + eta * M
        w0 = CoeffState.unit(BasisSpec(1, kappa, 4), 0, math.sqrt(M))
        assert energy_via_w0(w0, M, 0, 0, lam) == pytest.approx(ground_energy(M, kappa, 1))
        for a, b in [(0.4, -0.3), (-1.0, 0.8)]:
            u = apply_galilean(GalileanParams(0.0, kappa, [a], [b]), synthesize(w0, grid1))
            assert energy_via_w0(w0, M, a, b, lam) == pytest.approx(observables_grid(u, lam, eta).energy, abs=1e-7)


def test_ground_state_minimality_sampled():
    rng = np.random.default_rng(2024)
    lam, eta, M = 0.6, 0.8, 1.0
    kappa = lam + eta * M
    spec = BasisSpec(1, kappa, 16)
    e_min = ground_energy(M, kappa, 1)
    worst = np.inf
    for _ in range(1000):
        c = random_state(spec, rng, modes=int(rng.integers(1, 12)), decay=float(rng.uniform(0, 1)))
        worst = min(worst, observables_coeffs(c, lam, eta).energy - e_min)
    assert worst >= -1e-12
    assert observables_coeffs(CoeffState.unit(spec, 0), lam, eta).energy == pytest.approx(e_min)


def test_negative_lambda_energy_unbounded():
    grid = GridSpec(1, 40.0, 2048)
    energies = [observables_grid(apply_galilean(GalileanParams(0.0, 1.0, [0.0], [R]), ground(grid)), -0.5, 1.0).energy
                for R in np.arange(0, 25, 3.0)]
    assert np.all(np.diff(energies) < 0)
    assert energies[-1] < -100
