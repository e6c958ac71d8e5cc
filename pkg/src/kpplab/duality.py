"""Monte Carlo checks of the model's duality identities.

Every identity equates expectations of exp(-2 <.,.>) functionals computed
from runs with different initial data (and possibly reversed coefficient
paths).  Both sides are always estimated from independent seeds so their
errors cannot be spuriously coupled; reports carry a z-score in units of
the combined standard error.
"""

from dataclasses import dataclass, field as _dc_field

import numpy as np

from .field import (Custom, Field, batch_pairing, left_marker, pairing,
                    render)
from .fronts import ustar_grid, upper_left_batch
from .integrator import GridSpec, SpdeParams, simulate_batch
from .stats import binomial_se_ac, mean_se, z_score


def _prob_se(vals):
    "Mean and small-count-calibrated standard error for 0/1 samples."
    p = float(np.mean(vals))
    return p, binomial_se_ac(p, len(vals))

__all__ = [
    "DUALITY_EXPONENT_SCALE",
    "DualityReport",
    "self_duality_check",
    "competition_duality_check",
    "marker_cdf_via_dual",
    "upper_measure_laplace_check",
    "duality_csv_header",
    "duality_csv_row",
]

# the pairing convention carries a factor 2 in every exponent
DUALITY_EXPONENT_SCALE = 2.0


@dataclass(frozen=True)
class DualityReport:
    identity: str
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    replicas: int
    params: dict = _dc_field(default_factory=dict)

    def __post_init__(self):
        for v in (self.lhs, self.rhs):
            if not (-1e-9 <= v <= 1.0 + 1e-9):
                raise ValueError(f"Laplace estimate {v} outside [0, 1]")

    @property
    def z(self):
        return z_score(self.lhs, self.lhs_se, self.rhs, self.rhs_se)


def _laplace_stat(batch, t, probe):
    """exp(-2 <u_t, probe>) per replica of a batch run."""
    x0, U = batch.snapshot_matrix(float(t))
    return np.exp(-DUALITY_EXPONENT_SCALE * batch_pairing(x0, batch.dx, U, probe))


def _cross_laplace(batch_a, batch_b, t_a, t_b, dx):
    """exp(-2 <u_a(t_a), u_b(t_b)>) pairing replicas of two batches."""
    xa, A = batch_a.snapshot_matrix(float(t_a))
    xb, B = batch_b.snapshot_matrix(float(t_b))
    # common overlap of the two windows
    off = round((xb - xa) / dx)
    lo_a = max(0, off)
    hi_a = min(A.shape[1], off + B.shape[1])
    if hi_a - lo_a < 2:
        return np.ones(A.shape[0])
    w = np.full(hi_a - lo_a, dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    inner = np.einsum("ij,ij->i", A[:, lo_a:hi_a],
                      B[:, lo_a - off:hi_a - off] * w)
    return np.exp(-DUALITY_EXPONENT_SCALE * inner)


def _default_grid():
    return GridSpec(dx=0.05, dt=0.00125, window=(-6.0, 6.0))


def self_duality_check(u0, v0, theta, t, s, replicas, grid=None, seed=0):
    """Split-time invariance of E[exp(-2 <u(s'), v(t-s')>)].

    Estimates the functional at s' in {0, s, t} with independent runs and
    returns the three pairwise comparison reports.  At t=0 all variants are
    the exact quadrature value with zero variance.
    """
    if not (0 <= s <= t):
        raise ValueError("need 0 <= s <= t")
    grid = grid or _default_grid()
    fu = render(u0, grid.window, grid.dx) if not isinstance(u0, Field) else u0
    fv = render(v0, grid.window, grid.dx) if not isinstance(v0, Field) else v0
    params = SpdeParams(theta=theta)
    meta = {"theta": theta, "t": t}

    if t == 0:
        val = float(np.exp(-DUALITY_EXPONENT_SCALE * pairing(fu, fv)))
        rep = DualityReport("self-duality[t=0]", val, 0.0, val, 0.0, 0, meta)
        return [rep, rep, rep]

    def estimate(s_prime, seed_off):
        if s_prime <= 0:
            bv = simulate_batch(Custom(fv), params, grid, t, replicas,
                                seed + seed_off, snapshot_times=[t])
            return mean_se(_laplace_stat(bv, t, fu))
        if s_prime >= t:
            bu = simulate_batch(Custom(fu), params, grid, t, replicas,
                                seed + seed_off, snapshot_times=[t])
            return mean_se(_laplace_stat(bu, t, fv))
        bu = simulate_batch(Custom(fu), params, grid, s_prime, replicas,
                            seed + seed_off, snapshot_times=[s_prime])
        bv = simulate_batch(Custom(fv), params, grid, t - s_prime, replicas,
                            seed + seed_off + 500000,
                            snapshot_times=[t - s_prime])
        return mean_se(_cross_laplace(bu, bv, s_prime, t - s_prime, grid.dx))

    tagged = [("s'=0", estimate(0.0, 0)),
              (f"s'={s:g}", estimate(s, 1000000)),
              (f"s'={t:g}", estimate(t, 3000000))]
    reports = []
    for i in range(3):
        for j in range(i + 1, 3):
            (ta, a), (tb, b) = tagged[i], tagged[j]
            reports.append(DualityReport(
                f"self-duality[{ta} vs {tb}]",
                a[0], a[1], b[0], b[1], replicas, meta))
    return reports


class _ReversedPath:
    """Coefficient path of the dual run: step [t, t+dt) reads beta on the
    reversed interval [T-t-dt, T-t), i.e. at its left endpoint."""

    def __init__(self, beta, T, dt):
        from .integrator import _as_coef
        self._c = _as_coef(beta)
        self.T = float(T)
        self.dt = float(dt)

    def resolve(self, t, x):
        return self._c(max(self.T - t - self.dt, 0.0), x)


def competition_duality_check(v0, z0, beta_path, theta, T, replicas,
                              grid=None, seed=0):
    """Duality with a deterministic annihilation path and its time reversal.

    v feels annihilation beta(t); z feels beta(T-t).  Compares
    E[exp(-2 <v(T), z0>)] against E[exp(-2 <v0, z(T)>)].
    """
    grid = grid or _default_grid()
    fv = render(v0, grid.window, grid.dx) if not isinstance(v0, Field) else v0
    fz = render(z0, grid.window, grid.dx) if not isinstance(z0, Field) else z0
    meta = {"theta": theta, "T": T}
    if T == 0:
        val = float(np.exp(-DUALITY_EXPONENT_SCALE * pairing(fv, fz)))
        return DualityReport("competition-duality", val, 0.0, val, 0.0, 0, meta)
    pv = SpdeParams(theta=theta, beta=beta_path)
    pz = SpdeParams(theta=theta, beta=_ReversedPath(beta_path, T, grid.dt))
    bv = simulate_batch(Custom(fv), pv, grid, T, replicas, seed,
                        snapshot_times=[T])
    lhs = mean_se(_laplace_stat(bv, T, fz))
    bz = simulate_batch(Custom(fz), pz, grid, T, replicas, seed + 5000000,
                        snapshot_times=[T])
    rhs = mean_se(_laplace_stat(bz, T, fv))
    return DualityReport("competition-duality", lhs[0], lhs[1], rhs[0],
                         rhs[1], replicas, meta)


def marker_cdf_via_dual(phi, x, t, theta, replicas, N_cap=50.0, grid=None,
                        seed=0, behind=15.0):
    """Marker CDF against the mirrored-ramp dual functional.

    LHS: fraction of plain runs from phi with right marker <= x at time t.
    RHS: mean of exp(-2 <phi, w(. - x)>) where w is the time-t field of a
    run started from the mirrored ramp (reflected in law).
    """
    grid = grid or _default_grid()
    fphi = render(phi, grid.window, grid.dx) if not isinstance(phi, Field) else phi
    if not np.any(fphi.values > 0):
        raise ValueError("phi must be nonzero")
    params = SpdeParams(theta=theta)
    b_lhs = simulate_batch(Custom(fphi), params, grid, t, replicas, seed)
    lhs = _prob_se((b_lhs.r0[:, -1] <= x + 1e-9).astype(float))

    rgrid = ustar_grid(theta, t, dx=grid.dx, dt=grid.dt, behind=behind)
    b_dual = upper_left_batch(theta, N_cap, rgrid, t, replicas,
                              seed + 7000000, snapshot_times=[t])
    x_snap = round(x / grid.dx) * grid.dx
    x0, U = b_dual.snapshot_matrix(float(t))
    # reflect each row, then shift right by x: w(y) = u(-(y - x))
    Urev = U[:, ::-1]
    x0_rev = -(x0 + (U.shape[1] - 1) * grid.dx) + x_snap
    rhs_vals = np.exp(-DUALITY_EXPONENT_SCALE
                      * batch_pairing(x0_rev, grid.dx, Urev, fphi))
    rhs = mean_se(rhs_vals)
    return DualityReport("marker-cdf", lhs[0], lhs[1], rhs[0], rhs[1],
                         replicas, {"theta": theta, "t": t, "x": x_snap,
                                    "N_cap": N_cap})


def upper_measure_laplace_check(g, theta, T, replicas, N_cap=50.0, grid=None,
                                seed=0, behind=15.0):
    """Ramp-law Laplace transform against the no-mass-left probability.

    LHS: mean of exp(-2 <u_T, g>) over ramp-started runs.  RHS: empirical
    probability that a plain run from g has every cell at x < 0 equal to
    zero at time T.  Requires g supported in the open right half-line.
    """
    grid = grid or _default_grid()
    fg = render(g, grid.window, grid.dx) if not isinstance(g, Field) else g
    if not np.any(fg.values > 0) or left_marker(fg) <= 0:
        raise ValueError("g must be nonzero with support in (0, inf)")
    lgrid = ustar_grid(theta, T, dx=grid.dx, dt=grid.dt, behind=behind)
    b_l = upper_left_batch(theta, N_cap, lgrid, T, replicas, seed,
                           snapshot_times=[T])
    lhs = mean_se(_laplace_stat(b_l, T, fg))

    b_r = simulate_batch(Custom(fg), SpdeParams(theta=theta), grid, T,
                         replicas, seed + 9000000, snapshot_times=[T])
    x0, U = b_r.snapshot_matrix(float(T))
    xs = x0 + grid.dx * np.arange(U.shape[1])
    neg = xs < -1e-12
    rhs = _prob_se((~np.any(U[:, neg] > 0, axis=1)).astype(float))
    return DualityReport("ramp-laplace", lhs[0], lhs[1], rhs[0], rhs[1],
                         replicas, {"theta": theta, "T": T, "N_cap": N_cap})


def duality_csv_header():
    return "identity,params,lhs,lhs_se,rhs,rhs_se,z\n"


def duality_csv_row(rep):
    par = ";".join(f"{k}={v!r}" for k, v in sorted(rep.params.items()))
    return (f"{rep.identity},{par},{rep.lhs!r},{rep.lhs_se!r},"
            f"{rep.rhs!r},{rep.rhs_se!r},{rep.z!r}\n")
