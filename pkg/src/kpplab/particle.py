"""Rescaled long-range contact process with exact event-driven dynamics.

Sites live on the lattice with spacing 1/n^2; each site has
neighbor_count = round(2*c1*n^(3/2)) neighbors (including itself).  Every
ordered pair (source occupied, target) carries a birth clock of rate
(2*c1*n^(3/2))^(-1)*(n+theta); a jump occupies the target if vacant.  Each
occupied site dies at rate n.  Instead of materializing per-pair Poisson
processes we use aggregate-rate next-event sampling with uniform selection
among eligible pairs, which is distributionally identical.

A family of systems at increasing theta shares the death clocks and the
base birth clocks; each consecutive theta gap adds an independent clock
family of rate (2*c1*n^(3/2))^(-1)*(theta_{i+1}-theta_i) that only the
higher-theta systems obey.  Occupancies then stay nested at every event.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .field import Field, render, Custom
from .stats import mean_se

__all__ = [
    "ParticleState",
    "ClockConfig",
    "init_particles",
    "total_jump_rate",
    "approx_density",
    "simulate_particles",
    "couple_theta_star_particles",
    "particle_vs_spde",
    "write_occupancy",
    "read_occupancy",
]


def neighbor_count(n, c1=1.0):
    return int(round(2.0 * c1 * n ** 1.5))


def total_jump_rate(state, theta):
    """K*death_rate + K*neighbor_count*birth_rate_P for the current state."""
    cfg = ClockConfig(state.n, state.c1, theta)
    return state.count * (cfg.death_rate
                          + state.neighbor_count * cfg.birth_rate_P)


@dataclass
class ParticleState:
    """0/1 occupancy over a window of the lattice with spacing 1/n^2.

    lo is the lattice index of occ[0]; site i of the array sits at
    macroscopic coordinate (lo + i)/n^2.
    """

    n: int
    c1: float
    lo: int
    occ: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occ, dtype=np.uint8)
        if occ.ndim != 1:
            raise ValueError("occupancy must be 1-d")
        if np.any(occ > 1):
            raise ValueError("occupancy entries must be 0/1")
        self.occ = occ

    @property
    def spacing(self):
        return self.n ** -2

    @property
    def neighbor_count(self):
        return neighbor_count(self.n, self.c1)

    @property
    def count(self):
        return int(self.occ.sum())

    def occupied_coords(self):
        return (self.lo + np.flatnonzero(self.occ)) * self.spacing

    def right_marker(self):
        idx = np.flatnonzero(self.occ)
        if idx.size == 0:
            return float("-inf")
        return (self.lo + float(idx[-1])) * self.spacing


@dataclass(frozen=True)
class ClockConfig:
    """Event rates of the coupled family at (theta1, theta2)."""

    n: int
    c1: float
    theta1: float
    theta2: float = None

    @property
    def birth_rate_P(self):
        return (self.n + self.theta1) / (2.0 * self.c1 * self.n ** 1.5)

    @property
    def birth_rate_Q(self):
        if self.theta2 is None:
            return 0.0
        return (self.theta2 - self.theta1) / (2.0 * self.c1 * self.n ** 1.5)

    @property
    def death_rate(self):
        # the shared death clocks; rate n is the rescaling that balances
        # the n-term of the birth rate, kept behind this single knob
        return float(self.n)


def init_particles(f0, n, c1=1.0):
    """Block-occupancy approximation of a density profile.

    The lattice splits into blocks of neighbor_count sites.  Block k starts
    at lattice index k*neighbor_count; it gets its first
    floor(2*c1*sqrt(n)*f0(x_k)) + 1 sites occupied, where x_k is the block's
    left-edge coordinate (the occupied sites pack against that edge), and
    stays empty when the floor term is 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    K = neighbor_count(n, c1)
    spacing = n ** -2
    block_width = K * spacing
    a, b = f0.window
    k_min = int(np.floor(a / block_width)) - 1
    k_max = int(np.ceil(b / block_width)) + 1
    occ_blocks = {}
    for k in range(k_min, k_max + 1):
        xk = k * block_width
        m = int(np.floor(2.0 * c1 * np.sqrt(n) * float(f0.interp(xk))))
        if m >= 1:
            occ_blocks[k] = min(m + 1, K)
    if not occ_blocks:
        lo = -K
        return ParticleState(n, c1, lo, np.zeros(2 * K, dtype=np.uint8))
    lo_block = min(occ_blocks)
    hi_block = max(occ_blocks)
    margin = 2 * K
    lo = lo_block * K - margin
    hi = (hi_block + 1) * K + margin
    occ = np.zeros(hi - lo, dtype=np.uint8)
    for k, cnt in occ_blocks.items():
        start = k * K - lo
        occ[start:start + cnt] = 1
    return ParticleState(n, c1, lo, occ)


def approx_density(state, dx_out=None):
    """Scaled neighbor-count density as a Field.

    Value at site z is (2*c1*sqrt(n))^(-1) times the occupied count among
    z's neighbor_count neighbors (including z); a fully occupied stretch
    reads n.  Optionally resampled onto a coarser grid of spacing dx_out.
    """
    m = state.neighbor_count
    r_lo = m // 2
    r_hi = m - r_lo - 1
    occ = state.occ.astype(np.float64)
    c = np.concatenate([[0.0], np.cumsum(occ)])
    n_sites = occ.size
    j = np.arange(n_sites)
    lo_idx = np.clip(j - r_lo, 0, n_sites)
    hi_idx = np.clip(j + r_hi + 1, 0, n_sites)
    counts = c[hi_idx] - c[lo_idx]
    vals = counts / (2.0 * state.c1 * np.sqrt(state.n))
    f = Field(state.lo * state.spacing, state.spacing, vals)
    if dx_out is None:
        return f
    # snap the resampled window onto the dx_out lattice so pairings with
    # grid fields stay commensurate
    a = dx_out * np.floor(f.window[0] / dx_out)
    b = dx_out * np.ceil(max(f.window[1], f.window[0] + 2 * dx_out) / dx_out)
    return render(Custom(f), (a, b), dx_out)


@dataclass
class ParticleTrajectory:
    times: np.ndarray
    r0: np.ndarray            # (J, K) rightmost occupied coordinate per system
    counts: np.ndarray        # (J, K) occupied-site counts
    states: dict              # t -> list[ParticleState] per system
    thetas: tuple
    events: int
    extinction: np.ndarray    # (J,)

    def density(self, t, system=0, dx_out=None):
        return approx_density(self.states[t][system], dx_out)

    def state(self, t, system=0):
        return self.states[t][system]


def _run_family(state0, thetas, T, seed, record_times, snapshot_times,
                max_events, check_nested):
    """Shared-clock event loop for an ascending theta family."""
    n, c1 = state0.n, state0.c1
    J = len(thetas)
    m = state0.neighbor_count
    r_lo = m // 2
    offsets_lo, offsets_hi = -r_lo, m - r_lo - 1
    d_rate = ClockConfig(n, c1, thetas[0]).death_rate
    p_rate = ClockConfig(n, c1, thetas[0]).birth_rate_P
    q_rates = [ClockConfig(n, c1, thetas[i], thetas[i + 1]).birth_rate_Q
               for i in range(J - 1)]
    # per occupied-top-site rate: death + m*(P + sum Q_i)
    cat_rates = np.array([d_rate, m * p_rate] + [m * q for q in q_rates])
    per_site = float(cat_rates.sum())
    cat_cum = np.cumsum(cat_rates)

    lo = state0.lo
    occ = [state0.occ.copy() for _ in range(J)]
    # occupied-site bookkeeping for the top (largest) system
    top = occ[-1]
    top_sites = list((np.flatnonzero(top) + lo))
    pos_of = {s: i for i, s in enumerate(top_sites)}
    counts = [int(o.sum()) for o in occ]

    rng = np.random.default_rng(np.random.SeedSequence(seed % 2 ** 64))
    record_times = sorted(set(float(t) for t in record_times))
    snapshot_times = sorted(set(float(t) for t in snapshot_times))
    rec_out = {t: None for t in record_times}
    snap_out = {}
    extinction = np.full(J, np.inf)

    def grow_if_needed(site_idx):
        nonlocal lo, occ, top
        arr_idx = site_idx - lo
        n_arr = occ[0].size
        pad = 4 * m
        if arr_idx < m:
            occ = [np.concatenate([np.zeros(pad, dtype=np.uint8), o])
                   for o in occ]
            lo -= pad
        elif arr_idx >= n_arr - m:
            occ = [np.concatenate([o, np.zeros(pad, dtype=np.uint8)])
                   for o in occ]
        top = occ[-1]

    def take_records(upto, t_now):
        for t_rec in record_times:
            if rec_out[t_rec] is None and t_rec <= upto:
                r0 = []
                for jj in range(J):
                    idx = np.flatnonzero(occ[jj])
                    r0.append(((lo + float(idx[-1])) * n ** -2)
                              if idx.size else float("-inf"))
                rec_out[t_rec] = (r0, list(counts))
        for t_snap in snapshot_times:
            if t_snap not in snap_out and t_snap <= upto:
                snap_out[t_snap] = [
                    ParticleState(n, c1, lo, occ[jj].copy()) for jj in range(J)]

    t = 0.0
    events = 0
    take_records(0.0, 0.0)
    while t < T:
        K = len(top_sites)
        if K == 0:
            break
        lam = K * per_site
        dt_next = rng.exponential(1.0 / lam)
        t_next = t + dt_next
        take_records(min(t_next, T), t)
        if t_next >= T:
            t = T
            break
        t = t_next
        events += 1
        if events > max_events:
            raise RuntimeError(
                f"event budget {max_events} exceeded at t={t:.4g} "
                f"(K={K}); reduce T or n")
        u = rng.random() * per_site
        cat = int(np.searchsorted(cat_cum, u, side="right"))
        src = top_sites[rng.integers(K)]
        if cat == 0:
            # shared death clock at src: removes it wherever occupied
            ai = src - lo
            for jj in range(J):
                if occ[jj][ai]:
                    occ[jj][ai] = 0
                    counts[jj] -= 1
                    if counts[jj] == 0 and extinction[jj] == np.inf:
                        extinction[jj] = t
            i = pos_of.pop(src)
            last = top_sites.pop()
            if last != src:
                top_sites[i] = last
                pos_of[last] = i
        else:
            off = int(rng.integers(offsets_lo, offsets_hi + 1))
            tgt = src + off
            grow_if_needed(tgt)
            ai_src = src - lo
            ai_tgt = tgt - lo
            first_sys = 0 if cat == 1 else cat - 1
            for jj in range(first_sys, J):
                if occ[jj][ai_src] and not occ[jj][ai_tgt]:
                    occ[jj][ai_tgt] = 1
                    counts[jj] += 1
                    if jj == J - 1:
                        pos_of[tgt] = len(top_sites)
                        top_sites.append(tgt)
        if check_nested and J > 1:
            for jj in range(J - 1):
                if not np.all(occ[jj] <= occ[jj + 1]):
                    raise InvariantViolation(
                        f"nestedness violated between systems {jj} and {jj+1} "
                        f"after event {events}")
    take_records(T, T)

    times = np.array(record_times)
    r0 = np.full((J, times.size), -np.inf)
    cnt = np.zeros((J, times.size))
    for i, t_rec in enumerate(record_times):
        rs, cs = rec_out[t_rec]
        r0[:, i] = rs
        cnt[:, i] = cs
    return ParticleTrajectory(times, r0, cnt, snap_out, tuple(thetas),
                              events, extinction)


def simulate_particles(state0, theta, n, T, seed, record_times=(),
                       snapshot_times=(), max_events=20_000_000):
    """Exact event-driven run of a single system; see module docstring."""
    if T <= 0:
        raise ValueError("T must be positive")
    if state0.n != n:
        raise ValueError("state scale does not match n")
    rec = record_times if len(record_times) else (T,)
    snap = tuple(snapshot_times) + ((T,) if T not in snapshot_times else ())
    return _run_family(state0, [theta], T, seed, rec, snap, max_events, False)


def couple_theta_star_particles(f0, theta_list, n, T, seed, c1=1.0,
                                record_times=(), snapshot_times=(),
                                max_events=20_000_000, check_nested=True):
    """Shared-clock family of systems at strictly increasing thetas.

    All systems start from the same configuration init_particles(f0, n);
    occupancies are nested at every event (checked when check_nested).
    """
    thetas = list(theta_list)
    if any(b <= a for a, b in zip(thetas, thetas[1:])) or len(thetas) < 1:
        raise ValueError("theta_list must be strictly increasing and nonempty")
    f0 = f0 if isinstance(f0, Field) else render(f0, (-4, 4), 1.0 / n ** 2)
    state0 = init_particles(f0, n, c1)
    rec = record_times if len(record_times) else (T,)
    snap = tuple(snapshot_times) + ((T,) if T not in snapshot_times else ())
    return _run_family(state0, thetas, T, seed, rec, snap, max_events,
                       check_nested)


def particle_vs_spde(f0, theta, n_list, T, replicas_particle, replicas_spde,
                     seed, c1=1.0, dx=0.05, probe=None):
    """Law-level agreement report between particle densities and the SPDE.

    Compares E[exp(-2*<u_T, probe>)], mean mass and mean right marker at
    time T.  The SPDE reference solves the scaling limit of this particle
    family: diffusivity c1^2/6 and branching variance 2*u per unit time.
    """
    from .field import Bump, batch_pairing, pairing
    from .integrator import GridSpec, SpdeParams, simulate_batch

    probe = probe if probe is not None else render(Bump(), (-1.5, 1.5), dx)
    f0 = f0 if isinstance(f0, Field) else render(f0, (-3, 3), dx)
    # snap the window to the probe's grid so pairings stay commensurate
    lo_w = dx * np.floor((f0.window[0] - 2 * np.sqrt(theta) * T - 3) / dx)
    hi_w = dx * np.ceil((f0.window[1] + 2 * np.sqrt(theta) * T + 3) / dx)
    grid = GridSpec(dx=dx, dt=dx * dx / 2, window=(lo_w, hi_w),
                    move_left=True, move_right=True)
    params = SpdeParams(theta=theta, gamma=1.0, noise_amp=np.sqrt(2.0),
                        diffusivity=c1 * c1 / 6.0)
    batch = simulate_batch(Custom(f0), params, grid, T, replicas_spde, seed,
                           snapshot_times=[T])
    x0, U = batch.snapshot_matrix(float(T))
    spde_stat = np.exp(-2.0 * batch_pairing(x0, grid.dx, U, probe))
    spde_mean, spde_se = mean_se(spde_stat)
    spde_mass = mean_se(batch.mass[:, -1])
    report = {
        "theta": theta, "T": T, "probe": "bump",
        "spde": {"laplace": (spde_mean, spde_se), "mass": spde_mass,
                 "replicas": replicas_spde},
        "particle": {},
    }
    for idx_n, n in enumerate(n_list):
        stats, masses, markers = [], [], []
        for r in range(replicas_particle):
            st0 = init_particles(f0, n, c1)
            traj = simulate_particles(st0, theta, n, T,
                                      seed + 1000003 * (idx_n + 1) + r)
            st = traj.state(float(T))
            dens = approx_density(st, dx_out=dx)
            stats.append(np.exp(-2.0 * pairing(dens, probe)))
            masses.append(st.count / n)
            markers.append(st.right_marker())
        live = [m for m in markers if np.isfinite(m)]
        marker_stats = mean_se(live) if len(live) > 1 else (float("nan"), 0.0)
        pm, ps = mean_se(stats)
        disc = abs(pm - spde_mean)
        joint = float(np.hypot(ps, spde_se))
        report["particle"][n] = {
            "laplace": (pm, ps),
            "mass": mean_se(masses),
            "marker": marker_stats,
            "dead": len(markers) - len(live),
            "discrepancy": disc,
            "joint_se": joint,
            "replicas": replicas_particle,
        }
    return report


def write_occupancy(fh, t, state):
    """Header 't n c1 window_lo window_hi' plus run-length-encoded bits."""
    hi = state.lo + state.occ.size
    fh.write(f"{float(t)!r} {state.n} {state.c1!r} {state.lo} {hi}\n")
    occ = state.occ
    if occ.size == 0:
        fh.write("0\n")
        return
    flips = np.flatnonzero(np.diff(occ)) + 1
    runs = np.diff(np.concatenate([[0], flips, [occ.size]]))
    fh.write(str(int(occ[0])) + " " + " ".join(str(int(r)) for r in runs))
    fh.write("\n")


def read_occupancy(fh):
    header = fh.readline().split()
    t, n, c1 = float(header[0]), int(header[1]), float(header[2])
    lo, hi = int(header[3]), int(header[4])
    parts = fh.readline().split()
    first = int(parts[0])
    runs = [int(p) for p in parts[1:]]
    occ = np.zeros(hi - lo, dtype=np.uint8)
    pos, bit = 0, first
    for r in runs:
        occ[pos:pos + r] = bit
        pos += r
        bit ^= 1
    return t, ParticleState(n, c1, lo, occ)
