"""Duality identities: exact degenerate cases and Monte Carlo agreement."""

import numpy as np
import pytest

from kpplab.duality import (DUALITY_EXPONENT_SCALE, DualityReport,
                            competition_duality_check, marker_cdf_via_dual,
                            self_duality_check, upper_measure_laplace_check)
from kpplab.field import (Bump, Custom, Field, batch_pairing, pairing, render,
                          shift)
from kpplab.integrator import GridSpec

GRID = GridSpec(dx=0.05, dt=0.00125, window=(-5, 5))


def test_exponent_convention_constant():
    assert DUALITY_EXPONENT_SCALE == 2.0


def test_report_validates_range():
    with pytest.raises(ValueError):
        DualityReport("x", 1.5, 0.0, 0.5, 0.0, 1)


def test_self_duality_t_zero_exact():
    reps = self_duality_check(Bump(), Bump(), 2.0, 0.0, 0.0, 10, GRID, seed=1)
    for r in reps:
        assert r.lhs == r.rhs
        assert abs(r.lhs - np.exp(-4.0 / 3.0)) < 1e-3
        assert r.z == 0.0


def test_self_duality_zero_probe_gives_one():
    zero = Custom(Field(-5.0, 0.05, np.zeros(201)))
    reps = self_duality_check(Bump(), zero, 2.0, 0.4, 0.2, 50, GRID, seed=2)
    for r in reps:
        assert r.lhs == pytest.approx(1.0)
        assert r.rhs == pytest.approx(1.0)


def test_self_duality_smoke_agreement():
    reps = self_duality_check(Bump(), Bump(), 2.0, 0.4, 0.2, 400, GRID, seed=3)
    for r in reps:
        assert r.z < 4.5  # loose smoke gate; the acceptance run pins 3


def test_self_duality_precondition():
    with pytest.raises(ValueError):
        self_duality_check(Bump(), Bump(), 2.0, 0.5, 0.7, 10, GRID)


def test_competition_duality_T_zero_exact():
    rep = competition_duality_check(Bump(), Bump(), 0.0, 2.0, 0.0, 10, GRID)
    f2 = render(Bump(), GRID.window, GRID.dx)
    assert rep.lhs == pytest.approx(np.exp(-2 * pairing(f2, f2)))
    assert rep.z == 0.0


def test_competition_duality_zero_beta_reduces_to_self():
    rep = competition_duality_check(Bump(), Bump(), 0.0, 2.0, 0.4, 400, GRID,
                                    seed=4)
    assert rep.z < 4.5


def test_competition_duality_with_switching_path():
    f2 = render(Bump(), GRID.window, GRID.dx)
    T = 0.4

    def beta(t):
        return f2 if t <= T / 2 else 0.0

    rep = competition_duality_check(Bump(), Bump(), beta, 2.0, T, 400, GRID,
                                    seed=5)
    assert rep.z < 4.5
    assert 0.0 < rep.lhs < 1.0 and 0.0 < rep.rhs < 1.0


def test_marker_cdf_far_right_is_one():
    rep = marker_cdf_via_dual(Bump(), 30.0, 0.3, 2.0, 60, N_cap=50.0,
                              grid=GRID, seed=6)
    assert rep.lhs == pytest.approx(1.0)
    assert rep.rhs > 0.99


def test_marker_cdf_rejects_zero_phi():
    zero = Custom(Field(-5.0, 0.05, np.zeros(201)))
    with pytest.raises(ValueError):
        marker_cdf_via_dual(zero, 1.0, 0.3, 2.0, 10, grid=GRID)


def test_marker_cdf_smoke_agreement():
    rep = marker_cdf_via_dual(Bump(), 1.0, 0.5, 3.0, 500, N_cap=50.0,
                              grid=GridSpec(dx=0.1, dt=0.002, window=(-6, 6)),
                              seed=7)
    assert rep.z < 4.5


def test_laplace_requires_right_supported_probe():
    with pytest.raises(ValueError):
        upper_measure_laplace_check(Bump(), 2.0, 0.5, 10, grid=GRID)


def test_laplace_small_T_both_sides_near_one():
    g = shift(render(Bump(), (-1, 1), 0.1), -2.0)   # support [1, 3]
    rep = upper_measure_laplace_check(g, 2.0, 0.05, 80,
                                      grid=GridSpec(dx=0.1, dt=0.002,
                                                    window=(-6, 6)), seed=8)
    assert rep.lhs > 0.9 and rep.rhs > 0.9


def test_laplace_monotone_in_probe():
    # increasing g pointwise decreases exp(-2 <u, g>) replica by replica
    from kpplab.fronts import upper_left_batch, ustar_grid

    grid = ustar_grid(3.0, 0.5, dx=0.1, dt=0.002)
    batch = upper_left_batch(3.0, 50.0, grid, 0.5, 40, seed=9,
                             snapshot_times=[0.5])
    g1 = shift(render(Bump(), (-1, 1), 0.1), -1.0)
    g2 = Field(g1.origin, g1.dx, 2.0 * g1.values)
    x0, U = batch.snapshot_matrix(0.5)
    a = np.exp(-2 * batch_pairing(x0, 0.1, U, g1))
    b = np.exp(-2 * batch_pairing(x0, 0.1, U, g2))
    assert np.all(b <= a + 1e-15)


def test_laplace_smoke_agreement():
    g = shift(render(Bump(), (-1, 1), 0.1), -2.0)
    rep = upper_measure_laplace_check(g, 5.0, 0.5, 400,
                                      grid=GridSpec(dx=0.1, dt=0.002,
                                                    window=(-6, 8)), seed=10)
    assert rep.z < 4.5
    assert 0 <= rep.lhs <= 1 and 0 <= rep.rhs <= 1


def test_reports_deterministic_in_seed():
    a = marker_cdf_via_dual(Bump(), 1.0, 0.3, 2.0, 50, grid=GRID, seed=11)
    b = marker_cdf_via_dual(Bump(), 1.0, 0.3, 2.0, 50, grid=GRID, seed=11)
    assert (a.lhs, a.lhs_se, a.rhs, a.rhs_se) == (b.lhs, b.lhs_se, b.rhs,
                                                  b.rhs_se)
