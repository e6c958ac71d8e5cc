"""Explicit stochastic stepping of the generalized noisy KPP equation.

One cell per grid point.  A time step splits into

  1. deterministic part, explicit Euler with zero-Dirichlet ghosts:
         v_i = u_i + dt*[D*(u_{i-1} - 2u_i + u_{i+1})/dx^2
                         + alpha_i + (theta - beta_i)*u_i - gamma_i*u_i^2]
  2. noise part, the exact critical-branching transition applied to each
     cell mass m_i = v_i*dx independently:
         m'_i ~ Gamma(N_i, noise_amp^2*dt/2),  N_i ~ Poisson(2 m_i/(noise_amp^2*dt)).

The branching transition is the exact law of dm = noise_amp*sqrt(m) dB over
dt, so it has the same per-cell mean and variance as the naive Gaussian
increment sqrt(u_i)*dW_i with dW_i ~ N(0, dt/dx), but it is nonnegative by
construction, makes zero exactly absorbing, and preserves first moments.
(The naive Gaussian scheme with a post-step clamp is kept as an option; the
clamp turns the noise into a substantial mass source wherever u is of order
dt/dx, which at desk resolutions inflates E[<u,1>] by large factors.)

Replicas are stepped as rows of one (R, n) array; every replica owns its own
Generator so results do not depend on how replicas are scheduled or batched
together within a fixed configuration.
"""

from dataclasses import dataclass, field as _dc_field

import numpy as np

from .errors import InvariantViolation
from .field import Field, render

__all__ = [
    "SpdeParams",
    "GridSpec",
    "NoiseStream",
    "Trajectory",
    "white_noise_increment",
    "step",
    "simulate",
    "simulate_batch",
    "extinction_probability",
    "trajectory_to_csv",
]


def _as_coef(spec):
    """Normalize a coefficient (scalar | Field | callable t->...) to a resolver.

    The resolver maps (t, x) -> scalar or array on the grid x.
    """
    if hasattr(spec, "resolve"):
        return spec.resolve
    if callable(spec) and not isinstance(spec, Field):
        def resolve(t, x):
            return _as_coef(spec(t))(t, x)
        return resolve
    if isinstance(spec, Field):
        def resolve(t, x, _f=spec):
            return _f.interp(x)
        return resolve
    val = float(spec)
    def resolve(t, x, _v=val):
        return _v
    return resolve


@dataclass(frozen=True)
class SpdeParams:
    """Coefficients of the generalized equation.

    alpha (immigration), beta (extra annihilation) and gamma (overcrowding)
    may be constants, Fields, or callables t -> constant/Field.  noise_amp=0
    gives the deterministic PDE; diffusivity rescales the Laplacian (needed
    when matching the particle-system limit).
    """

    theta: float
    alpha: object = 0.0
    beta: object = 0.0
    gamma: object = 1.0
    noise_amp: float = 1.0
    diffusivity: float = 1.0
    noise_model: str = "branching"

    def __post_init__(self):
        if not (self.theta > 0):
            raise ValueError("theta must be positive")
        if self.noise_amp < 0:
            raise ValueError("noise_amp must be nonnegative")
        if not (self.diffusivity > 0):
            raise ValueError("diffusivity must be positive")
        if self.noise_model not in ("branching", "gaussian"):
            raise ValueError("noise_model must be 'branching' or 'gaussian'")


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution and window policy.

    window is the initial window; each side can be fixed or moving.  A moving
    side grows by `pad` cells whenever a strictly positive cell comes within
    pad/2 cells of it.  Newly added cells start at zero.
    """

    dx: float = 0.1
    dt: float = 0.002
    window: tuple = (-6.0, 6.0)
    move_left: bool = True
    move_right: bool = True
    pad: int = 64
    record_every: int = 1

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be positive")
        if self.pad <= 1:
            raise ValueError("pad must be > 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    def check_stability(self, diffusivity=1.0):
        if self.dt * max(diffusivity, 1.0) > self.dx ** 2 / 2 + 1e-12:
            raise ValueError(
                f"dt={self.dt} violates dt <= dx^2/2 (dx={self.dx})")


@dataclass(frozen=True)
class NoiseStream:
    """(seed, stream id) fully determine all increments of one noise source."""

    seed: int
    stream: int = 0

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed % 2 ** 64,
                                    spawn_key=(self.stream,))
        return np.random.default_rng(ss)


def white_noise_increment(grid, gen, n, out=None):
    """One step of cell-wise white-noise increments: i.i.d. N(0, dt/dx)."""
    if out is None:
        out = gen.standard_normal(n)
    else:
        gen.standard_normal(out=out)
    out *= np.sqrt(grid.dt / grid.dx)
    return out


def _laplacian(u, out):
    """Second difference with zero-Dirichlet ghosts, rows = replicas."""
    out[:, 1:-1] = u[:, :-2]
    out[:, 1:-1] += u[:, 2:]
    out[:, 1:-1] -= 2.0 * u[:, 1:-1]
    out[:, 0] = u[:, 1] - 2.0 * u[:, 0]
    out[:, -1] = u[:, -2] - 2.0 * u[:, -1]
    return out


def branch_cells(gen, u_row, dx, dt, amp, out=None):
    """Exact critical-branching noise transition for one replica row.

    Each cell mass u_i*dx jumps to Gamma(N_i, amp^2*dt/2) with
    N_i ~ Poisson(2*u_i*dx/(amp^2*dt)); returned in density units.
    Mean u_i, variance amp^2*u_i*dt/dx, exactly zero when N_i = 0.
    """
    lam = u_row * (2.0 * dx / (amp * amp * dt))
    counts = gen.poisson(lam)
    vals = gen.standard_gamma(counts)
    vals *= amp * amp * dt / (2.0 * dx)
    if out is not None:
        out[...] = vals
        return out
    return vals


def step(u, p, grid, dW):
    """Single explicit step of one field (pure convenience wrapper).

    dW are the raw white-noise increments (variance dt/dx per cell).
    """
    vals = u.values[None, :].copy()
    lap = np.empty_like(vals)
    _laplacian(vals, lap)
    x = u.x()
    t = 0.0
    alpha = _as_coef(p.alpha)(t, x)
    beta = _as_coef(p.beta)(t, x)
    gamma = _as_coef(p.gamma)(t, x)
    drift = p.diffusivity * lap[0] / grid.dx ** 2 + alpha \
        + (p.theta - beta) * vals[0] - gamma * vals[0] ** 2
    new = vals[0] + grid.dt * drift + p.noise_amp * np.sqrt(vals[0]) * np.asarray(dW)
    new = np.maximum(new, 0.0)
    if not np.all(np.isfinite(new)):
        raise InvariantViolation("NaN/inf produced in step; dt too large?")
    return Field(u.origin, u.dx, new)


@dataclass
class Trajectory:
    """Recorded series and snapshots of one replica."""

    times: np.ndarray
    r0: np.ndarray
    l0: np.ndarray
    mass: np.ndarray
    extinction_time: float
    snapshots: dict = _dc_field(default_factory=dict)  # t -> Field
    front_level: np.ndarray | None = None
    boundary_contact: bool = False


class BatchTrajectory:
    """Column-per-replica series; replica(r) extracts a Trajectory."""

    def __init__(self, times, r0, l0, mass, extinction, snapshots, dx,
                 front_level=None, boundary_contact=None):
        self.times = times              # (K,)
        self.r0 = r0                    # (R, K)
        self.l0 = l0
        self.mass = mass
        self.extinction = extinction    # (R,)
        self.snapshots = snapshots      # t -> (x0, (R, n) matrix)
        self.dx = dx
        self.front_level = front_level  # (R, K) or None
        self.boundary_contact = boundary_contact

    @property
    def replicas(self):
        return self.r0.shape[0]

    def snapshot_matrix(self, t):
        x0, mat = self.snapshots[t]
        return x0, mat

    def snapshot_field(self, t, r):
        x0, mat = self.snapshots[t]
        return Field(x0, self.dx, mat[r])

    def replica(self, r):
        snaps = {t: self.snapshot_field(t, r) for t in self.snapshots}
        fl = None if self.front_level is None else self.front_level[r]
        bc = bool(self.boundary_contact[r]) if self.boundary_contact is not None else False
        return Trajectory(self.times, self.r0[r], self.l0[r], self.mass[r],
                          float(self.extinction[r]), snaps, fl, bc)


def _markers(u, x0, dx):
    """Vectorized right/left markers and trapezoid mass for the batch."""
    mask = u > 0
    alive = mask.any(axis=1)
    n = u.shape[1]
    ridx = n - 1 - np.argmax(mask[:, ::-1], axis=1)
    lidx = np.argmax(mask, axis=1)
    r0 = np.where(alive, x0 + dx * ridx, -np.inf)
    l0 = np.where(alive, x0 + dx * lidx, np.inf)
    mass = dx * (u.sum(axis=1) - 0.5 * (u[:, 0] + u[:, -1]))
    return r0, l0, mass


def _level_front(u, x0, dx, level):
    """Rightmost downward crossing of `level`, linearly interpolated."""
    R, n = u.shape
    out = np.full(R, -np.inf)
    above = u >= level
    for r in range(R):
        idx = np.flatnonzero(above[r])
        if idx.size == 0:
            continue
        i = idx[-1]
        if i == n - 1:
            out[r] = x0 + dx * i
        else:
            a, b = u[r, i], u[r, i + 1]
            frac = (a - level) / (a - b) if a > b else 0.0
            out[r] = x0 + dx * (i + frac)
    return out


class LatticeRun:
    """Batched single-field run.  Shared window across the batch."""

    def __init__(self, ic, p, grid, T, seeds, snapshot_times=(),
                 front_level=None, row_snapshot_steps=None):
        grid.check_stability(p.diffusivity)
        self.p = p
        self.grid = grid
        self.T = float(T)
        self.nsteps = max(1, int(round(self.T / grid.dt)))
        f0 = render(ic, grid.window, grid.dx) if not isinstance(ic, Field) else ic
        self.x0 = f0.origin
        self.dx = grid.dx
        R = len(seeds)
        self.u = np.tile(f0.values, (R, 1))
        self.gens = [NoiseStream(s, 0).generator() for s in seeds]
        self.snapshot_steps = {
            min(self.nsteps, max(0, int(round(t / grid.dt)))): float(t)
            for t in snapshot_times
        }
        self.row_snapshot_steps = row_snapshot_steps or {}
        self.front_level = front_level
        self._alpha = _as_coef(p.alpha)
        self._beta = _as_coef(p.beta)
        self._gamma = _as_coef(p.gamma)
        self._left_fixed_clear = (not grid.move_left) and f0.values[0] == 0.0

    def _xgrid(self):
        return self.x0 + self.dx * np.arange(self.u.shape[1])

    def _grow(self):
        g, u = self.grid, self.u
        pad, half = g.pad, max(1, g.pad // 2)
        R = u.shape[0]
        grew = False
        if g.move_left and (u[:, :half] > 0).any():
            u = np.concatenate([np.zeros((R, pad)), u], axis=1)
            self.x0 -= pad * self.dx
            grew = True
        if g.move_right and (u[:, -half:] > 0).any():
            u = np.concatenate([u, np.zeros((R, pad))], axis=1)
            grew = True
        if grew:
            self.u = u
        return grew

    def _record_steps(self):
        steps = list(range(0, self.nsteps + 1, self.grid.record_every))
        if steps[-1] != self.nsteps:
            steps.append(self.nsteps)
        return steps

    def run(self):
        g, p = self.grid, self.p
        dt, dx = g.dt, self.dx
        R = self.u.shape[0]
        rec_steps = self._record_steps()
        rec_index = {k: i for i, k in enumerate(rec_steps)}
        nrec = len(rec_steps)
        times = np.empty(nrec)
        r0s = np.empty((R, nrec))
        l0s = np.empty((R, nrec))
        masses = np.empty((R, nrec))
        fls = np.empty((R, nrec)) if self.front_level is not None else None
        extinct = np.full(R, np.inf)
        contact = np.zeros(R, dtype=bool)
        snaps = {}
        row_snaps = {}
        noise_fac = p.noise_amp * np.sqrt(dt / dx)
        lap = np.empty_like(self.u)
        gauss_noise = p.noise_amp > 0 and p.noise_model == "gaussian"
        sqrtu = np.empty_like(self.u) if gauss_noise else None
        dW = np.empty_like(self.u) if gauss_noise else None

        def record(k, t):
            i = rec_index[k]
            r0, l0, m = _markers(self.u, self.x0, dx)
            times[i] = t
            r0s[:, i] = r0
            l0s[:, i] = l0
            masses[:, i] = m
            if fls is not None:
                fls[:, i] = _level_front(self.u, self.x0, dx, self.front_level)
            if not np.all(np.isfinite(m)):
                raise InvariantViolation(
                    f"NaN in field at t={t:.6g}; dt too large?")

        def grab_snapshots(k):
            if k in self.snapshot_steps:
                ts = self.snapshot_steps[k]
                snaps[ts] = (self.x0, self.u.copy())
            if k in self.row_snapshot_steps:
                for r in self.row_snapshot_steps[k]:
                    row_snaps[(k, r)] = Field(self.x0, dx, self.u[r])

        record(0, 0.0)
        grab_snapshots(0)
        alpha_is_zero = (not callable(p.alpha)) and not isinstance(p.alpha, Field) \
            and float(p.alpha) == 0.0
        extinct[np.all(self.u == 0, axis=1)] = 0.0

        for k in range(1, self.nsteps + 1):
            t_prev = (k - 1) * dt
            if self._grow():
                lap = np.empty_like(self.u)
                if gauss_noise:
                    sqrtu = np.empty_like(self.u)
                    dW = np.empty_like(self.u)
            u = self.u
            x = self._xgrid()
            alpha = self._alpha(t_prev, x)
            beta = self._beta(t_prev, x)
            gamma = self._gamma(t_prev, x)
            gaussian = p.noise_amp > 0 and p.noise_model == "gaussian"
            if gaussian:
                for r in range(u.shape[0]):
                    self.gens[r].standard_normal(out=dW[r])
                np.sqrt(u, out=sqrtu)
                sqrtu *= dW
                sqrtu *= noise_fac
            _laplacian(u, lap)
            lap *= p.diffusivity * dt / dx ** 2
            lap += dt * alpha
            lap += (dt * (p.theta - beta)) * u
            lap -= (dt * gamma) * (u * u)
            u += lap
            if gaussian:
                u += sqrtu
            np.maximum(u, 0.0, out=u)
            if p.noise_amp > 0 and not gaussian:
                for r in range(u.shape[0]):
                    branch_cells(self.gens[r], u[r], dx, dt, p.noise_amp,
                                 out=u[r])
            t = k * dt

            fresh = (extinct == np.inf) & np.all(u == 0, axis=1)
            if fresh.any():
                extinct[fresh] = t
            # boundary contact on fixed edges that started clear
            if not g.move_right and u[:, -1].any():
                contact |= u[:, -1] > 0
            if self._left_fixed_clear and u[:, 0].any():
                contact |= u[:, 0] > 0

            if k in rec_index:
                record(k, t)
            grab_snapshots(k)

            if alpha_is_zero and not self.row_snapshot_steps \
                    and np.all(extinct < np.inf):
                # zero is absorbing for every replica: fill and stop early
                for kk in rec_steps:
                    if kk > k:
                        i = rec_index[kk]
                        times[i] = kk * dt
                        r0s[:, i] = -np.inf
                        l0s[:, i] = np.inf
                        masses[:, i] = 0.0
                        if fls is not None:
                            fls[:, i] = -np.inf
                for kk, ts in self.snapshot_steps.items():
                    if kk > k:
                        snaps[ts] = (self.x0, np.zeros_like(u))
                break

        out = BatchTrajectory(times, r0s, l0s, masses, extinct, snaps, dx,
                              fls, contact)
        out.row_snapshots = row_snaps
        out.final = Field(self.x0, dx, self.u[0]) if R == 1 else None
        return out


def simulate_batch(ic, p, grid, T, replicas, seed, snapshot_times=(),
                   front_level=None, row_snapshot_steps=None):
    """Run `replicas` independent trajectories batched in one array.

    Replica r draws its noise from NoiseStream(seed + r, 0).
    """
    seeds = [seed + r for r in range(replicas)]
    run = LatticeRun(ic, p, grid, T, seeds, snapshot_times, front_level,
                     row_snapshot_steps)
    return run.run()


def simulate(ic, p, grid, T, snapshot_times=(), noise=None, front_level=None):
    """Single trajectory; noise defaults to NoiseStream(0, 0).

    Returns a Trajectory with series sampled every grid.record_every steps,
    snapshots at the requested times (snapped to steps) and the exact
    extinction time (first step at which every cell is zero).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    noise = noise or NoiseStream(0, 0)
    run = LatticeRun(ic, p, grid, T, [noise.seed], snapshot_times, front_level)
    run.gens = [noise.generator()]
    batch = run.run()
    return batch.replica(0)


def extinction_probability(ic, p, grid, T, replicas, seed):
    """Fraction of replicas extinct by time T, with binomial standard error."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    from .stats import binomial_se_ac
    batch = simulate_batch(ic, p, grid, T, replicas, seed)
    frac = float(np.mean(batch.extinction <= T))
    return frac, binomial_se_ac(frac, replicas)


def trajectory_to_csv(fh, traj):
    """Columns t, R0, L0, mass, extinct(0/1)."""
    fh.write("t,R0,L0,mass,extinct\n")
    for i, t in enumerate(traj.times):
        ext = 1 if traj.extinction_time <= t else 0
        fh.write(f"{float(t)!r},{float(traj.r0[i])!r},{float(traj.l0[i])!r},"
                 f"{float(traj.mass[i])!r},{ext}\n")
