import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hartree_lab.galilean import ClassicalPath, GalileanParams, apply_galilean, path_eval
from hartree_lab.grid import GridSpec, GridState
from hartree_lab.hermite import BasisSpec, CoeffState, random_state, synthesize
from hartree_lab.observables import observables_grid
from hartree_lab.oracle import (StrangStepper, ToleranceError, effective_potential, integrate,
                                pde_residual, step)
from hartree_lab.propagator import ExactPropagator


def rand_state(grid, seed, kappa=1.0, modes=5):
    return synthesize(random_state(BasisSpec(grid.d, kappa, 20), np.random.default_rng(seed), modes=modes), grid)


def test_potential_examples(grid1):
    u = rand_state(grid1, 0)
    assert np.allclose(effective_potential(u, 0.7, 0.0), 0.7 * grid1.r2)
    even = synthesize(CoeffState.unit(BasisSpec(1, 1.0, 4), 2), grid1)
    V = effective_potential(even, 0.0, 1.0)
    assert np.allclose(V, V[::-1][np.r_[-1, :len(V) - 1]], atol=1e-10)  # symmetric about x = 0


@pytest.mark.parametrize("model", ["H", "Hprime"])
def test_potential_against_direct_convolution(model):
    grid = GridSpec(1, 8.0, 128)
    u = grid.sample(lambda x: np.exp(-(x - 1) ** 2) * (1 + 0.3j * x) + 0.4 * np.exp(-(x + 2) ** 2))
    x = grid.x
    kern = (x[:, None] - x[None, :]) ** 2
    if model == "Hprime":
        kern = kern - x[None, :] ** 2
    direct = 0.4 * x ** 2 + 1.3 * kern @ u.density * grid.dx
    assert np.allclose(effective_potential(u, 0.4, 1.3, model), direct, atol=1e-8)


def test_free_gaussian_spreading():
    grid = GridSpec(1, 60.0, 2048)
    sigma = 1.2
    u0 = grid.sample(lambda x: np.exp(-x ** 2 / (2 * sigma ** 2)))
    t = 3.0
    u = integrate(u0, t, 0.0, 0.0, dt=1e-2)[-1]
    o = observables_grid(u, 0, 0)
    var = o.m2 / o.mass
    assert var == pytest.approx(sigma ** 2 / 2 * (1 + t ** 2 / sigma ** 4), abs=1e-6)


def test_coherent_state_center():
    grid = GridSpec(1, 16.0, 512)
    a, b = 0.6, -0.9
    u0 = apply_galilean(GalileanParams(0.0, 1.0, [a], [b]), synthesize(CoeffState.unit(BasisSpec(1, 1.0, 2), 0), grid))
    times = np.linspace(0, 3, 7)
    snaps = integrate(u0, 3.0, 1.0, 0.0, samples=6, dt=5e-4)
    for t, u in zip(times, snaps):
        X = observables_grid(u, 1, 0).position[0]
        assert X == pytest.approx(path_eval(ClassicalPath(1.0, [a], [b]), t)[0][0], abs=1e-6)


def test_unitarity(grid1):
    u = rand_state(grid1, 1)
    M0 = u.mass()
    st_ = StrangStepper(0.5, 1.0)
    v = st_.step(u, 1e-3)
    assert abs(v.mass() - M0) < 1e-12
    v = st_.run(u, 1e-3, 10_000)
    assert abs(v.mass() - M0) < 1e-9


def test_integrate_shapes(grid1):
    u = rand_state(grid1, 2)
    assert integrate(u, 0.0, 0.0, 1.0) == [u]
    assert len(integrate(u, 1.0, 0.0, 1.0, samples=4, dt=1e-2)) == 5


def test_second_order_convergence(grid1):
    u0 = apply_galilean(GalileanParams(0.0, 1.0, [0.4], [0.2]), rand_state(grid1, 3))
    T = 1.0
    exact = ExactPropagator("H", u0, 0.0, 1.0).at(T).state
    dts = np.array([0.04, 0.02, 0.01, 0.004])
    errs = [np.linalg.norm(integrate(u0, T, 0.0, 1.0, dt=h)[-1].values - exact.values) for h in dts]
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_tolerance_refusal_reports_dt(grid1):
    u0 = apply_galilean(GalileanParams(0.0, 1.0, [0.5], [0.0]), rand_state(grid1, 4))
    with pytest.raises(ToleranceError) as exc:
        integrate(u0, 1.0, 0.0, 1.0, dt=0.1, tol=1e-10)
    assert 0 < exc.value.required_dt < 0.1 and exc.value.estimate > 1e-10
    ok = integrate(u0, 1.0, 0.0, 1.0, dt=exc.value.required_dt, tol=1e-10)
    assert ok[-1].diagnostics["richardson_error"] <= 1e-10


@pytest.mark.parametrize("lam", [0.0, 0.6])
def test_center_of_mass_obeys_linear_ode(grid1, lam):
    """X'' = -lam X, so X(t) = M g_lam(t, P0/M, X0/M) with the eta terms dropping out."""
    u0 = apply_galilean(GalileanParams(0.0, 1.0, [0.3], [-0.5]), rand_state(grid1, 5))
    o0 = observables_grid(u0, lam, 0.9)
    path = ClassicalPath(lam, o0.momentum / o0.mass, o0.position / o0.mass)
    snaps = integrate(u0, 2.0, lam, 0.9, samples=8, dt=2.5e-3)
    for t, u in zip(np.linspace(0, 2.0, 9), snaps):
        X = observables_grid(u, lam, 0.9).position
        assert np.allclose(X, o0.mass * path_eval(path, t)[0], atol=1e-5)


def test_energy_drift_one_period(grid1):
    u0 = apply_galilean(GalileanParams(0.0, 1.0, [0.2], [0.3]), rand_state(grid1, 6))
    E0 = observables_grid(u0, 0.0, 1.0).energy
    uT = integrate(u0, 2 * math.pi, 0.0, 1.0, dt=2 * math.pi / 1024, extrapolate=True)[-1]
    assert abs(observables_grid(uT, 0.0, 1.0).energy - E0) <= 1e-7 * abs(E0)


def test_step_warns_on_large_dt(grid1):
    u = rand_state(grid1, 7)
    with pytest.warns(RuntimeWarning):
        step(u, 1.0, 10.0, 1.0)


def test_pde_residual_linear_eigenmode(grid1):
    kappa = 1.5
    u0 = synthesize(CoeffState.unit(BasisSpec(1, kappa, 3), 2), grid1)
    rate = math.sqrt(kappa) * 2.5
    ts = 0.3 + 1e-3 * np.arange(5)
    states = [u0.with_values(np.exp(-1j * rate * t) * u0.values) for t in ts]
    assert pde_residual(states, ts, kappa, 0.0) <= 1e-6
    bad = [u0.with_values(np.exp(-1.1j * rate * t) * u0.values) for t in ts]
    assert pde_residual(bad, ts, kappa, 0.0) > 1e-2


def test_pde_residual_validates_sampling(grid1):
    u = rand_state(grid1, 8)
    with pytest.raises(ValueError):
        pde_residual([u] * 4, np.arange(4.0), 0, 1)
    with pytest.raises(ValueError):
        pde_residual([u] * 5, np.array([0, 1, 2, 3, 5.0]), 0, 1)


@given(st.integers(0, 2 ** 31), st.sampled_from(["H", "Hprime"]))
def test_moments_frozen_during_kick(seed, model):
    grid = GridSpec(1, 12.0, 256)
    u = rand_state(grid, seed)
    stp = StrangStepper(0.3, 1.0, model)
    kicked = GridState(grid, stp._kick(u.values, grid, 0.37))
    assert np.allclose(kicked.density, u.density, atol=1e-15)
    assert np.allclose(effective_potential(kicked, 0.3, 1.0, model), effective_potential(u, 0.3, 1.0, model))
