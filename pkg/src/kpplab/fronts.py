"""Front-speed estimators built on the dominating left-ramp solution.

The "upper left" solution starts from the capped ramp (ZetaRamp) and never
dies; the asymptotic linear speed of its right marker is the deterministic
front speed of the model.  Everything here is a replica-parallel reduction
with plain Monte Carlo error bars.
"""

from dataclasses import dataclass

import numpy as np

from .field import Bump, Field, ZetaRamp, pairing, render, right_marker
from .integrator import GridSpec, SpdeParams, simulate_batch
from .stats import mean_se

__all__ = [
    "SpeedEstimate",
    "WaveSample",
    "ustar_grid",
    "upper_left_solution",
    "upper_left_batch",
    "estimate_B",
    "estimate_alpha_T",
    "sample_wave",
    "check_subadditivity",
    "speed_gap",
    "front_mass",
    "saturation_check",
    "fit_front_speed",
    "speed_table_csv",
]

DEFAULT_N_CAP = 50.0
DEFAULT_BEHIND = 15.0


@dataclass(frozen=True)
class SpeedEstimate:
    theta: float
    T: float
    replicas: int
    mean_R0_over_T: float
    std_error: float
    N_cap: float
    dead_replicas: int = 0

    @property
    def bound(self):
        """Deterministic spreading-speed ceiling 2*sqrt(theta)."""
        return 2.0 * np.sqrt(self.theta)


@dataclass(frozen=True)
class WaveSample:
    """Recentered profile with right marker exactly 0."""

    profile: Field
    s: float
    T: float


def ustar_grid(theta, T, dx=0.1, dt=0.002, behind=DEFAULT_BEHIND,
               record_every=1):
    """Window for ramp-started runs: fixed truncated left edge, moving right.

    The left truncation sits `behind` units behind the origin; the bulk
    there is stable, so the truncation does not reach the right front.
    """
    ahead = 2.0 + 2.0 * np.sqrt(theta)
    return GridSpec(dx=dx, dt=dt, window=(-float(behind), ahead),
                    move_left=False, move_right=True,
                    record_every=record_every)


def upper_left_batch(theta, N_cap, grid, T, replicas, seed, snapshot_times=(),
                     row_snapshot_steps=None, noise_amp=1.0):
    params = SpdeParams(theta=theta, noise_amp=noise_amp)
    return simulate_batch(ZetaRamp(N_cap), params, grid, T, replicas, seed,
                          snapshot_times=snapshot_times,
                          row_snapshot_steps=row_snapshot_steps)


def upper_left_solution(theta, N_cap, grid, T, seed, snapshot_times=()):
    """Single trajectory from the capped ramp; approximates the dominating
    solution from below, monotonically in N_cap."""
    if N_cap <= 0:
        raise ValueError("N_cap must be positive")
    batch = upper_left_batch(theta, N_cap, grid, T, 1, seed, snapshot_times)
    return batch.replica(0)


def estimate_B(theta, T, replicas, N_cap=DEFAULT_N_CAP, grid=None, seed=0):
    """Monte Carlo mean of R0(u_T)/T over ramp-started replicas."""
    if T < 1:
        raise ValueError("need T >= 1")
    grid = grid or ustar_grid(theta, T)
    batch = upper_left_batch(theta, N_cap, grid, T, replicas, seed)
    r0_T = batch.r0[:, -1]
    dead = int(np.sum(~np.isfinite(r0_T)))
    vals = r0_T[np.isfinite(r0_T)] / T
    mean, se = mean_se(vals)
    return SpeedEstimate(theta, float(T), replicas, mean, se, N_cap, dead)


def estimate_alpha_T(theta, T, replicas, N_cap=DEFAULT_N_CAP, grid=None,
                     seed=0):
    """Time-averaged expected marker position.

    Per replica the trapezoidal integral of R0 over the second half of the
    run, scaled by 2/T; averaged across replicas.
    """
    if T < 1:
        raise ValueError("need T >= 1")
    grid = grid or ustar_grid(theta, T, record_every=5)
    batch = upper_left_batch(theta, N_cap, grid, T, replicas, seed)
    sel = batch.times >= T / 2 - 1e-9
    ts = batch.times[sel]
    vals = np.trapezoid(batch.r0[:, sel], ts, axis=1) * (2.0 / T)
    return mean_se(vals)


def sample_wave(theta, T, N_cap=DEFAULT_N_CAP, grid=None, count=100, seed=0,
                depth=25.0, ahead=2.0):
    """Draws from the time-averaged recentered-profile distribution.

    Each sample runs an independent replica to an independent uniform time
    s in [0, T] (snapped to the step grid) and recenters the field at its
    right marker; the returned profiles have right marker exactly 0 and are
    cropped to [-depth, ahead].
    """
    if T < 1 or count < 1:
        raise ValueError("need T >= 1 and count >= 1")
    grid = grid or ustar_grid(theta, T, record_every=5)
    pick = np.random.default_rng(np.random.SeedSequence(seed % 2 ** 64,
                                                        spawn_key=(991,)))
    s_times = pick.uniform(0.0, T, size=count)
    steps = np.maximum(1, np.round(s_times / grid.dt).astype(int))
    nsteps_total = int(np.max(steps))
    rows = {}
    for r, k in enumerate(steps):
        rows.setdefault(int(k), []).append(r)
    batch = upper_left_batch(theta, N_cap, grid, nsteps_total * grid.dt,
                             count, seed, row_snapshot_steps=rows)
    samples = []
    for r, k in enumerate(steps):
        f = batch.row_snapshots[(int(k), r)]
        idx = np.flatnonzero(f.values > 0)
        if idx.size == 0:
            raise RuntimeError(f"replica {r} extinct at s={k * grid.dt:.4g}; "
                               "ramp-started runs should survive")
        i_mark = int(idx[-1])
        i_lo = max(0, i_mark - int(round(depth / grid.dx)))
        i_hi = min(f.n, i_mark + int(round(ahead / grid.dx)) + 1)
        vals = f.values[i_lo:i_hi]
        origin = -grid.dx * float(i_mark - i_lo)
        samples.append(WaveSample(Field(origin, grid.dx, vals),
                                  float(k * grid.dt), float(T)))
    return samples


@dataclass(frozen=True)
class SubadditivityReport:
    theta: float
    s: float
    t: float
    lhs: float          # E[R0 at s+t]
    lhs_se: float
    rhs: float          # E[R0 at s] + E[R0 at t]
    rhs_se: float

    @property
    def excess(self):
        return self.lhs - self.rhs

    @property
    def joint_se(self):
        return float(np.hypot(self.lhs_se, self.rhs_se))

    @property
    def passed(self):
        return self.excess <= 3.0 * self.joint_se


def check_subadditivity(theta, s, t, replicas, N_cap=DEFAULT_N_CAP, grid=None,
                        seed=0):
    """Is E[R0 at s+t] <= E[R0 at s] + E[R0 at t] within 3 joint errors?

    All three expectations use independent replica sets.
    """
    if s < 1 or t < 1:
        raise ValueError("need s, t >= 1")
    grid_st = grid or ustar_grid(theta, s + t, record_every=50)
    b_lhs = upper_left_batch(theta, N_cap, grid_st, s + t, replicas, seed)
    b_s = upper_left_batch(theta, N_cap, grid_st, s, replicas,
                           seed + replicas)
    b_t = upper_left_batch(theta, N_cap, grid_st, t, replicas,
                           seed + 2 * replicas)
    m_lhs, se_lhs = mean_se(b_lhs.r0[:, -1])
    m_s, se_s = mean_se(b_s.r0[:, -1])
    m_t, se_t = mean_se(b_t.r0[:, -1])
    return SubadditivityReport(theta, float(s), float(t), m_lhs, se_lhs,
                               m_s + m_t, float(np.hypot(se_s, se_t)))


@dataclass(frozen=True)
class GapEstimate:
    theta1: float
    theta2: float
    T: float
    replicas: int
    gap: float              # mean (R0(theta2) - R0(theta1)) / T
    std_error: float
    min_replica_gap: float  # exact coupling order makes this >= 0

    @property
    def significant(self):
        return self.gap > 3.0 * self.std_error


def speed_gap(theta1, theta2, T, replicas, N_cap=DEFAULT_N_CAP, grid=None,
              seed=0, behind=DEFAULT_BEHIND):
    """Coupled estimate of the speed increase from theta1 to theta2.

    Uses the shared-noise two-rate coupling from the same ramp start, so
    every replica's marker gap is nonnegative exactly.
    """
    from .coupling import couple_theta

    if not theta1 < theta2:
        raise ValueError("need theta1 < theta2")
    if grid is None:
        right = 2.0 * np.sqrt(theta2) * T + 6.0
        grid = GridSpec(dx=0.1, dt=0.002, window=(-float(behind), right),
                        move_left=False, move_right=False, record_every=50)
    ct = couple_theta(ZetaRamp(N_cap), theta1, theta2, grid, T, seed,
                      replicas=replicas, check_every=50)
    g1 = ct.r0("u1")[:, -1]
    g2 = ct.r0("u2")[:, -1]
    gaps = (g2 - g1) / T
    mean, se = mean_se(gaps)
    return GapEstimate(theta1, theta2, float(T), replicas, mean, se,
                       float(np.min(gaps)))


def front_mass(f, a):
    """Mass of the recentered field within 2a of its right marker.

    Pairing of f(. + R0(f)) with the indicator of (-2a, inf).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    r0 = right_marker(f)
    if not np.isfinite(r0):
        raise ValueError("zero field has no front")
    idx = int(round((r0 - f.origin) / f.dx))
    recentered = Field(-f.dx * float(idx), f.dx, f.values)
    xs = recentered.x()
    ind = Field(recentered.origin, f.dx, (xs > -2.0 * a).astype(float))
    return pairing(recentered, ind)


def saturation_check(theta, T, replicas, caps=(50.0, 100.0), grid=None,
                     seed=0):
    """Does the ramp cap still move the speed estimate?  Two caps compared."""
    lo_cap, hi_cap = caps
    grid = grid or ustar_grid(theta, T)
    e1 = estimate_B(theta, T, replicas, lo_cap, grid, seed)
    e2 = estimate_B(theta, T, replicas, hi_cap, grid, seed + replicas)
    diff = abs(e1.mean_R0_over_T - e2.mean_R0_over_T)
    joint = float(np.hypot(e1.std_error, e2.std_error))
    return {"caps": caps, "estimates": (e1, e2), "diff": diff,
            "joint_se": joint, "saturated": diff < 2.0 * joint}


def fit_front_speed(times, positions, t_lo, t_hi):
    """Least-squares slope of a front-position series on [t_lo, t_hi]."""
    times = np.asarray(times)
    positions = np.asarray(positions)
    sel = (times >= t_lo) & (times <= t_hi) & np.isfinite(positions)
    if sel.sum() < 2:
        raise ValueError("not enough points in the fit window")
    slope, _ = np.polyfit(times[sel], positions[sel], 1)
    return float(slope)


def speed_table_csv(fh, estimates):
    """Columns theta, T, replicas, N_cap, B_hat, stderr, bound_2sqrt_theta."""
    fh.write("theta,T,replicas,N_cap,B_hat,stderr,bound_2sqrt_theta\n")
    for e in estimates:
        fh.write(f"{e.theta!r},{e.T!r},{e.replicas},{e.N_cap!r},"
                 f"{e.mean_R0_over_T!r},{e.std_error!r},{e.bound!r}\n")
