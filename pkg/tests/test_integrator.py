"""Lattice stepping: noise contract, determinism, moments, convergence."""

import numpy as np
import pytest

from kpplab.field import Bump, Custom, Field, render, right_marker
from kpplab.fronts import fit_front_speed
from kpplab.integrator import (GridSpec, NoiseStream, SpdeParams,
                               extinction_probability, simulate,
                               simulate_batch, step, white_noise_increment)


def test_white_noise_mean_and_variance():
    grid = GridSpec(dx=0.1, dt=0.002)
    gen = NoiseStream(123, 0).generator()
    draws = white_noise_increment(grid, gen, 1_000_000)
    target_var = grid.dt / grid.dx
    se_mean = np.sqrt(target_var / draws.size)
    assert abs(draws.mean()) < 4 * se_mean
    assert draws.var() == pytest.approx(target_var, rel=0.01)


def test_white_noise_determinism():
    grid = GridSpec()
    a = white_noise_increment(grid, NoiseStream(7, 3).generator(), 1000)
    b = white_noise_increment(grid, NoiseStream(7, 3).generator(), 1000)
    c = white_noise_increment(grid, NoiseStream(7, 4).generator(), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_step_absorbing_zero():
    grid = GridSpec(dx=0.1, dt=0.002, window=(0, 1))
    u = Field(0.0, 0.1, np.zeros(11))
    out = step(u, SpdeParams(theta=3.0), grid, np.zeros(11))
    assert np.all(out.values == 0.0)


def test_step_constant_logistic():
    grid = GridSpec(dx=0.1, dt=0.01, window=(0, 1))
    u = Field(0.0, 0.1, np.full(11, 2.0))
    p = SpdeParams(theta=3.0, gamma=1.0, noise_amp=0.0)
    out = step(u, p, grid, np.zeros(11))
    # interior cells: 2 + 0.01*2*(3-2) = 2.02 (edges feel the Dirichlet ghost)
    assert out.values[5] == pytest.approx(2.02)
    fixed = step(Field(0.0, 0.1, np.full(11, 3.0)), p, grid, np.zeros(11))
    assert fixed.values[5] == pytest.approx(3.0)


def test_simulate_zero_ic_trivial():
    grid = GridSpec(window=(-2, 2))
    ic = Custom(Field(-2.0, 0.1, np.zeros(41)))
    traj = simulate(ic, SpdeParams(theta=2.0), grid, 0.5)
    assert traj.extinction_time == 0.0
    assert np.all(traj.mass == 0.0)
    assert np.all(np.isneginf(traj.r0))


def test_simulate_determinism_bit_identical():
    grid = GridSpec(window=(-4, 4))
    p = SpdeParams(theta=2.0)
    a = simulate(Bump(), p, grid, 0.4, snapshot_times=[0.4],
                 noise=NoiseStream(99))
    b = simulate(Bump(), p, grid, 0.4, snapshot_times=[0.4],
                 noise=NoiseStream(99))
    assert np.array_equal(a.r0, b.r0)
    assert np.array_equal(a.mass, b.mass)
    assert np.array_equal(a.snapshots[0.4].values, b.snapshots[0.4].values)
    assert a.extinction_time == b.extinction_time


def test_translation_equivariance():
    # shifting the initial bump by whole cells with a support-tracking window
    # shifts the whole trajectory exactly
    p = SpdeParams(theta=2.0)
    h = 12 * 0.1
    g0 = GridSpec(window=(-3, 3))
    g1 = GridSpec(window=(-3 + h, 3 + h))
    a = simulate(Bump(), p, g0, 0.3, noise=NoiseStream(5))
    ic_shift = Custom(Field(-1.0 + h, 0.1, render(Bump(), (-1, 1), 0.1).values))
    b = simulate(ic_shift, p, g1, 0.3, noise=NoiseStream(5))
    finite = np.isfinite(a.r0)
    assert np.array_equal(finite, np.isfinite(b.r0))
    assert np.allclose(a.r0[finite] + h, b.r0[finite], atol=1e-9)
    assert np.array_equal(a.mass, b.mass)


def test_nonnegativity_and_absorbing_state():
    grid = GridSpec(window=(-3, 3))
    batch = simulate_batch(Bump(), SpdeParams(theta=0.5), grid, 2.0, 30,
                           seed=17, snapshot_times=[1.0, 2.0])
    for t in (1.0, 2.0):
        _, U = batch.snapshot_matrix(t)
        assert np.all(U >= 0.0)
    # once extinct, mass stays zero
    for r in range(30):
        te = batch.extinction[r]
        if np.isfinite(te):
            after = batch.times >= te - 1e-12
            assert np.all(batch.mass[r, after] == 0.0)


def test_superprocess_first_moment():
    # gamma = beta = alpha = 0: d/dt E<mass> = theta E<mass> exactly
    theta, t = 2.0, 0.5
    grid = GridSpec(window=(-4, 4))
    p = SpdeParams(theta=theta, gamma=0.0)
    batch = simulate_batch(Bump(), p, grid, t, 2000, seed=31)
    m = batch.mass[:, -1]
    target = np.exp(theta * t) * 1.0
    se = m.std(ddof=1) / np.sqrt(m.size)
    assert abs(m.mean() - target) < 3 * se


def test_deterministic_mass_semigroup():
    # noise off, pure heat + growth: mass tracks e^{theta t} to O(dt)
    theta, t = 2.0, 1.0
    grid = GridSpec(window=(-6, 6))
    p = SpdeParams(theta=theta, gamma=0.0, noise_amp=0.0)
    traj = simulate(Bump(), p, grid, t)
    assert traj.mass[-1] == pytest.approx(np.exp(theta * t), rel=5e-3)


def test_deterministic_order_of_accuracy():
    # halving dx (with dt ~ dx^2) shrinks snapshot differences ~4x
    theta, T = 3.0, 0.25
    sols = {}
    for dx in (0.2, 0.1, 0.05):
        grid = GridSpec(dx=dx, dt=0.2 * dx * dx, window=(-4, 4),
                        move_left=False, move_right=False)
        p = SpdeParams(theta=theta, gamma=1.0, noise_amp=0.0)
        traj = simulate(Bump(), p, grid, T, snapshot_times=[T])
        sols[dx] = traj.snapshots[T]
    xs = sols[0.2].x()
    e1 = np.max(np.abs(sols[0.2].values - sols[0.1].interp(xs)))
    e2 = np.max(np.abs(sols[0.1].values[::1] - sols[0.05].interp(sols[0.1].x())))
    ratio = e1 / e2
    assert 2.5 < ratio < 6.5


def test_deterministic_front_speed():
    # classical spreading speed 2*sqrt(theta) measured at the half-height
    # front marker (the raw support marker tracks floating-point underflow)
    theta = 4.0
    grid = GridSpec(dx=0.1, dt=0.002, window=(-4, 10), record_every=25)
    p = SpdeParams(theta=theta, gamma=1.0, noise_amp=0.0)
    traj = simulate(Bump(), p, grid, 12.0, front_level=theta / 2)
    slope = fit_front_speed(traj.times, traj.front_level, 6.0, 12.0)
    assert slope == pytest.approx(2 * np.sqrt(theta), rel=0.05)


def test_extinction_probability_subcritical():
    grid = GridSpec(window=(-4, 4))
    frac, se = extinction_probability(Bump(), SpdeParams(theta=0.1), grid,
                                      10.0, 100, seed=3)
    assert frac >= 0.9


def test_extinction_probability_ramp_never_dies():
    from kpplab.field import ZetaRamp
    grid = GridSpec(window=(-10, 4), move_left=False)
    frac, se = extinction_probability(ZetaRamp(50.0),
                                      SpdeParams(theta=10.0), grid, 10.0,
                                      10, seed=4)
    assert frac == 0.0


def test_extinction_probability_precondition():
    grid = GridSpec(window=(-4, 4))
    with pytest.raises(ValueError):
        extinction_probability(Bump(), SpdeParams(theta=1.0), grid, 1.0, 0, 0)


def test_grid_stability_validation():
    with pytest.raises(ValueError):
        GridSpec(dx=0.1, dt=0.02).check_stability()


def test_moving_window_growth():
    grid = GridSpec(window=(-1.5, 1.5), pad=32)
    p = SpdeParams(theta=4.0, noise_amp=0.0, gamma=1.0)
    traj = simulate(Bump(), p, grid, 1.0, snapshot_times=[1.0])
    assert traj.snapshots[1.0].window[1] > 1.5


def test_gaussian_noise_model_available():
    grid = GridSpec(window=(-3, 3))
    p = SpdeParams(theta=2.0, noise_model="gaussian")
    traj = simulate(Bump(), p, grid, 0.1, noise=NoiseStream(1))
    assert np.all(traj.mass >= 0.0)
