"""Jointly stepped multi-component systems preserving pointwise order exactly.

Each coupling is a triangular construction: components are stepped in
construction order within one time step, wiring terms (immigration fed by
other components, annihilation proportional to other components) are
evaluated at beginning-of-step values, and each component owns a noise
stream.  Declared order relations hold cell-by-cell at every step because

  * difference processes start nonnegative and stay nonnegative (the
    branching noise transition cannot produce negative cells, and the
    deterministic part is positivity-preserving under the stability guard);
  * where the construction declares one component dominated by another with
    a shared noise source (the subadditivity coupling), the pair branches
    additively: sample b1 = branch(low), b2 = branch(high - low) and set
    low' = b1, high' = b1 + b2.  Marginals are exact and low' <= high'
    holds surely.

Coupled runs use a fixed window so the lower component's path is
bit-identical whatever the other components do; the run fails loudly if a
support reaches a window edge that started empty.
"""

import numpy as np

from dataclasses import dataclass, field as _dc_field

from .errors import InvariantViolation
from .field import Field, Custom, render, right_marker
from .integrator import (NoiseStream, _as_coef, _laplacian, _markers,
                         branch_cells)

__all__ = [
    "ComponentSpec",
    "CoupledSystem",
    "CoupledTrajectory",
    "run_coupled",
    "couple_monotone",
    "couple_theta",
    "couple_two_independent",
    "couple_immigration",
    "claim2_chain",
    "delta_field",
    "delta_from_fields",
    "coupled_to_csv",
]


@dataclass(frozen=True)
class ComponentSpec:
    """One component of a coupled system.

    alpha_wiring entries are (coef, (name, ...)): immigration coef times the
    product of the named components.  beta_wiring entries are (coef, name):
    annihilation coef times the named component.  Wiring may only reference
    components declared earlier.  sub_branch_of names an earlier component
    this one branches additively inside (shared stream, exact domination).
    """

    name: str
    theta: float
    ic: object = 0.0                    # Field | InitialCondition | scalar
    alpha_ext: object = 0.0
    alpha_wiring: tuple = ()
    beta_wiring: tuple = ()
    gamma: object = 1.0
    noise_amp: float = 1.0
    stream: int = 0
    sub_branch_of: str = None


@dataclass
class CoupledSystem:
    """Component list plus declared order checks and derived sums."""

    components: list
    order_checks: tuple = ()    # ((low names), (high names)): sum <= sum
    derived: dict = _dc_field(default_factory=dict)  # name -> (comp names)

    def __post_init__(self):
        seen = set()
        by_name = {}
        for c in self.components:
            for _, srcs in c.alpha_wiring:
                for s in srcs:
                    if s not in seen:
                        raise ValueError(
                            f"{c.name}: wiring references non-earlier component {s}")
            for _, s in c.beta_wiring:
                if s not in seen:
                    raise ValueError(
                        f"{c.name}: wiring references non-earlier component {s}")
            if c.sub_branch_of is not None:
                if c.sub_branch_of not in seen:
                    raise ValueError(
                        f"{c.name}: sub_branch_of must name an earlier component")
                host = by_name[c.sub_branch_of]
                if host.stream != c.stream or host.noise_amp != c.noise_amp:
                    raise ValueError(
                        f"{c.name}: sub-branched pair must share stream and amp")
            seen.add(c.name)
            by_name[c.name] = c

    def wiring_dict(self):
        out = []
        for c in self.components:
            out.append({
                "name": c.name,
                "theta": c.theta,
                "alpha_wiring": [[co, list(s)] for co, s in c.alpha_wiring],
                "beta_wiring": [[co, s] for co, s in c.beta_wiring],
                "noise_amp": c.noise_amp,
                "stream": c.stream,
                "sub_branch_of": c.sub_branch_of,
            })
        return {"components": out,
                "order_checks": [[list(a), list(b)] for a, b in self.order_checks],
                "derived": {k: list(v) for k, v in self.derived.items()}}


class CoupledTrajectory:
    """Per-component series/snapshots of a batched coupled run."""

    def __init__(self, times, dx, series, extinction, snapshots, system,
                 lo_name=None, hi_name=None):
        self.times = times
        self.dx = dx
        self.series = series            # name -> dict(r0, l0, mass), (R, K)
        self.extinction = extinction    # name -> (R,)
        self.snapshots = snapshots      # name -> {t: (x0, (R, n) matrix)}
        self.system = system
        self.lo_name = lo_name
        self.hi_name = hi_name

    @property
    def replicas(self):
        first = next(iter(self.series.values()))
        return first["r0"].shape[0]

    def snapshot_field(self, name, t, r=0):
        x0, mat = self.snapshots[name][t]
        return Field(x0, self.dx, mat[r])

    def r0(self, name):
        return self.series[name]["r0"]


def _resolve_ic(ic, grid):
    if isinstance(ic, Field):
        return render(Custom(ic), grid.window, grid.dx)
    if np.isscalar(ic):
        a, b = grid.window
        n = int(np.ceil((b - a) / grid.dx - 1e-9)) + 1
        return Field(a, grid.dx, np.full(n, float(ic)))
    return render(ic, grid.window, grid.dx)


def run_coupled(system, grid, T, seed, replicas=1, snapshot_times=(),
                check_every=1):
    """Step a CoupledSystem on the fixed window grid.window.

    Raises InvariantViolation on any declared order violation, NaN, or
    support contact with an initially empty window edge.
    """
    grid.check_stability()
    comps = system.components
    names = [c.name for c in comps]
    nsteps = max(1, int(round(T / grid.dt)))
    dt, dx = grid.dt, grid.dx
    fields0 = {c.name: _resolve_ic(c.ic, grid) for c in comps}
    x0 = fields0[names[0]].origin
    n = fields0[names[0]].n
    x = x0 + dx * np.arange(n)
    u = {c.name: np.tile(fields0[c.name].values, (replicas, 1)) for c in comps}

    host_of = {c.name: c.sub_branch_of for c in comps if c.sub_branch_of}
    sub_of = {host: sub for sub, host in host_of.items()}
    gens = {c.name: [NoiseStream(seed + r, c.stream).generator()
                     for r in range(replicas)]
            for c in comps if c.name not in host_of}

    alpha_ext = {c.name: _as_coef(c.alpha_ext) for c in comps}
    gamma_of = {c.name: _as_coef(c.gamma) for c in comps}
    # an edge where some component starts positive is a deliberate truncation
    left_clear = all(fields0[nm].values[0] == 0.0 for nm in names)
    right_clear = all(fields0[nm].values[-1] == 0.0 for nm in names)

    rec_steps = list(range(0, nsteps + 1, grid.record_every))
    if rec_steps[-1] != nsteps:
        rec_steps.append(nsteps)
    rec_index = {k: i for i, k in enumerate(rec_steps)}
    nrec = len(rec_steps)
    times = np.empty(nrec)
    all_names = list(names) + list(system.derived)
    series = {nm: {"r0": np.empty((replicas, nrec)),
                   "l0": np.empty((replicas, nrec)),
                   "mass": np.empty((replicas, nrec))}
              for nm in all_names}
    extinction = {nm: np.full(replicas, np.inf) for nm in names}
    snapshot_steps = {min(nsteps, max(0, int(round(t / dt)))): float(t)
                      for t in snapshot_times}
    snapshots = {nm: {} for nm in all_names}

    def sum_of(namelist):
        out = u[namelist[0]].copy()
        for nm in namelist[1:]:
            out += u[nm]
        return out

    def record(k, t):
        i = rec_index[k]
        times[i] = t
        for nm in names:
            r0, l0, m = _markers(u[nm], x0, dx)
            series[nm]["r0"][:, i] = r0
            series[nm]["l0"][:, i] = l0
            series[nm]["mass"][:, i] = m
            if not np.all(np.isfinite(m)):
                raise InvariantViolation(f"NaN in component {nm} at t={t:.6g}")
        for dn, parts in system.derived.items():
            s = series[dn]
            s["r0"][:, i] = np.max([series[p]["r0"][:, i] for p in parts], axis=0)
            s["l0"][:, i] = np.min([series[p]["l0"][:, i] for p in parts], axis=0)
            s["mass"][:, i] = np.sum([series[p]["mass"][:, i] for p in parts], axis=0)

    def grab_snapshots(k):
        if k not in snapshot_steps:
            return
        ts = snapshot_steps[k]
        for nm in names:
            snapshots[nm][ts] = (x0, u[nm].copy())
        for dn, parts in system.derived.items():
            snapshots[dn][ts] = (x0, sum_of(parts))

    def check_order(k):
        for low, high in system.order_checks:
            lo = sum_of(low)
            hi = sum_of(high)
            if not np.all(lo <= hi):
                r, i = np.argwhere(lo > hi)[0]
                raise InvariantViolation(
                    f"order violation {'+'.join(low)} <= {'+'.join(high)} at "
                    f"step {k}, replica {r}, cell {i}")

    record(0, 0.0)
    grab_snapshots(0)
    check_order(0)
    for nm in names:
        extinction[nm][np.all(u[nm] == 0, axis=1)] = 0.0

    lap = np.empty((replicas, n))
    for k in range(1, nsteps + 1):
        t_prev = (k - 1) * dt
        new = {}
        for c in comps:
            nm = c.name
            alpha = alpha_ext[nm](t_prev, x)
            for coef, srcs in c.alpha_wiring:
                term = u[srcs[0]].copy()
                for s in srcs[1:]:
                    term *= u[s]
                term *= coef
                alpha = alpha + term
            beta = 0.0
            for coef, s in c.beta_wiring:
                beta = beta + coef * u[s]
            gamma = gamma_of[nm](t_prev, x)
            uu = u[nm]
            _laplacian(uu, lap)
            upd = lap * (dt / dx ** 2)
            upd += dt * alpha
            upd += (dt * c.theta) * uu
            if isinstance(beta, np.ndarray):
                upd -= (dt * beta) * uu
            upd -= (dt * gamma) * (uu * uu)
            upd += uu
            np.maximum(upd, 0.0, out=upd)
            if k % 50 == 1:
                eff = dt * float(np.max(beta + gamma * uu))
                if eff > 0.5:
                    raise InvariantViolation(
                        f"stability guard: dt*max(beta+gamma*u)={eff:.3f} > 0.5 "
                        f"for component {nm}")
            new[nm] = upd

        for c in comps:
            nm = c.name
            if c.noise_amp == 0 or nm in host_of:
                continue
            g = gens[nm]
            if nm in sub_of:
                lowd, highd = new[sub_of[nm]], new[nm]
                np.minimum(lowd, highd, out=lowd)  # ulp-level tie repair
                diff = highd - lowd
                for r in range(replicas):
                    b1 = branch_cells(g[r], lowd[r], dx, dt, c.noise_amp)
                    b2 = branch_cells(g[r], diff[r], dx, dt, c.noise_amp)
                    lowd[r] = b1
                    highd[r] = b1
                    highd[r] += b2
            else:
                arr = new[nm]
                for r in range(replicas):
                    branch_cells(g[r], arr[r], dx, dt, c.noise_amp, out=arr[r])

        for nm in names:
            u[nm] = new[nm]
        t = k * dt
        for nm in names:
            fresh = (extinction[nm] == np.inf) & np.all(u[nm] == 0, axis=1)
            if fresh.any():
                extinction[nm][fresh] = t
            if (left_clear and u[nm][:, 0].any()) \
                    or (right_clear and u[nm][:, -1].any()):
                raise InvariantViolation(
                    f"support of {nm} reached the fixed window edge at "
                    f"t={t:.6g}; enlarge the window")
        if k % check_every == 0 or k == nsteps:
            check_order(k)
        if k in rec_index:
            record(k, t)
        grab_snapshots(k)

    return CoupledTrajectory(times, dx, series, extinction, snapshots, system)

def _render_on(grid, f):
    return _resolve_ic(f, grid)


def couple_monotone(u1_0, u2_0, theta, grid, T, seed, replicas=1,
                    snapshot_times=(), check_every=1):
    """Coupled pair from ordered initial data u1_0 <= u2_0.

    The difference process v starts at u2_0 - u1_0 and feels annihilation
    2*u1; the reported upper path is u2 := u1 + v, which has the plain
    marginal law started from u2_0 and dominates u1 surely.
    """
    f1 = _render_on(grid, u1_0)
    f2 = _render_on(grid, u2_0)
    if np.any(f1.values > f2.values + 1e-12):
        raise ValueError("initial domination u1_0 <= u2_0 violated")
    v0 = Field(f2.origin, f2.dx, np.maximum(f2.values - f1.values, 0.0))
    sys = CoupledSystem(
        components=[
            ComponentSpec("u1", theta, f1, stream=0),
            ComponentSpec("v", theta, v0, beta_wiring=((2.0, "u1"),), stream=1),
        ],
        order_checks=((("u1",), ("u1", "v")),),
        derived={"u2": ("u1", "v")},
    )
    ct = run_coupled(sys, grid, T, seed, replicas, snapshot_times, check_every)
    ct.lo_name, ct.hi_name = "u1", "u2"
    return ct


def couple_theta(u0, theta1, theta2, grid, T, seed, replicas=1,
                 snapshot_times=(), check_every=1):
    """Coupled pair at two branching rates from one initial condition.

    The lower path solves the plain equation at theta1 on stream 0 and is
    bit-identical whatever theta2 is; the difference v receives immigration
    (theta2-theta1)*u1 and annihilation 2*u1.  Reported upper path
    u2 := u1 + v has the plain theta2 marginal.
    """
    if not theta1 < theta2:
        raise ValueError("need theta1 < theta2")
    f0 = _render_on(grid, u0)
    sys = CoupledSystem(
        components=[
            ComponentSpec("u1", theta1, f0, stream=0),
            ComponentSpec("v", theta2, 0.0,
                          alpha_wiring=((theta2 - theta1, ("u1",)),),
                          beta_wiring=((2.0, "u1"),), stream=1),
        ],
        order_checks=((("u1",), ("u1", "v")),),
        derived={"u2": ("u1", "v")},
    )
    ct = run_coupled(sys, grid, T, seed, replicas, snapshot_times, check_every)
    ct.lo_name, ct.hi_name = "u1", "u2"
    return ct


def couple_two_independent(u1_0, u2_0, theta, grid, T, seed, replicas=1,
                           snapshot_times=(), check_every=1):
    """Two independent plain solutions dominating one started from the sum.

    v starts at u2_0 with annihilation 2*u1 and branches additively inside
    u2 (shared stream), so v <= u2 surely while u2 keeps the plain law
    independent of u1.  The subadditive path is u0 := u1 + v <= u1 + u2.
    """
    f1 = _render_on(grid, u1_0)
    f2 = _render_on(grid, u2_0)
    sys = CoupledSystem(
        components=[
            ComponentSpec("u1", theta, f1, stream=0),
            ComponentSpec("u2", theta, f2, stream=1),
            ComponentSpec("v", theta, f2, beta_wiring=((2.0, "u1"),),
                          stream=1, sub_branch_of="u2"),
        ],
        order_checks=((("v",), ("u2",)), (("u1", "v"), ("u1", "u2"))),
        derived={"u0": ("u1", "v")},
    )
    ct = run_coupled(sys, grid, T, seed, replicas, snapshot_times, check_every)
    ct.lo_name, ct.hi_name = "u0", None
    return ct


class _CoefGap:
    """alpha2 - alpha1 as a coefficient; raises if domination fails."""

    def __init__(self, a1, a2):
        self.a1 = _as_coef(a1)
        self.a2 = _as_coef(a2)

    def resolve(self, t, x):
        d = np.asarray(self.a2(t, x) - self.a1(t, x))
        if np.any(d < -1e-12):
            raise InvariantViolation(
                f"immigration domination alpha1 <= alpha2 violated at t={t:.6g}")
        return np.maximum(d, 0.0) if d.ndim else max(float(d), 0.0)


def couple_immigration(u0, alpha1, alpha2, theta, grid, T, seed, replicas=1,
                       snapshot_times=(), check_every=1):
    """Coupled pair under ordered immigration paths alpha1 <= alpha2.

    Both start from u0; the difference v receives immigration alpha2-alpha1
    and annihilation 2*u1, so u^(alpha1) = u1 <= u1 + v = u^(alpha2) surely.
    """
    f0 = _render_on(grid, u0)
    gap = _CoefGap(alpha1, alpha2)
    sys = CoupledSystem(
        components=[
            ComponentSpec("u1", theta, f0, alpha_ext=alpha1, stream=0),
            ComponentSpec("v", theta, 0.0, alpha_ext=gap,
                          beta_wiring=((2.0, "u1"),), stream=1),
        ],
        order_checks=((("u1",), ("u1", "v")),),
        derived={"u2": ("u1", "v")},
    )
    ct = run_coupled(sys, grid, T, seed, replicas, snapshot_times, check_every)
    ct.lo_name, ct.hi_name = "u1", "u2"
    return ct


def claim2_chain(base, extra, ramp_cap, theta, grid, T, seed, replicas=1,
                 snapshot_times=(), check_every=1):
    """Four-component chain comparing front gains over a ramp vs. over base.

    Components: u1 from `base`; v2 from ramp-minus-base (annihilated by
    2*u1); v3 from `extra` (annihilated by 2*(u1+v2)); d4 from zero with
    immigration 2*v2*v3 and annihilation 2*(u1+v3).  Derived sums give the
    paths started from the ramp, ramp+extra, and base+extra.
    """
    from .field import ZetaRamp
    fb = _render_on(grid, base)
    fe = _render_on(grid, extra)
    framp = render(ZetaRamp(ramp_cap), grid.window, grid.dx)
    if right_marker(fb) > 1e-12:
        raise ValueError("base must vanish on the positive half-line")
    if np.any(fb.values > framp.values + 1e-12):
        raise ValueError(f"ramp cap {ramp_cap} does not dominate base")
    v2_0 = Field(framp.origin, framp.dx,
                 np.maximum(framp.values - fb.values, 0.0))
    sys = CoupledSystem(
        components=[
            ComponentSpec("u1", theta, fb, stream=0),
            ComponentSpec("v2", theta, v2_0, beta_wiring=((2.0, "u1"),),
                          stream=1),
            ComponentSpec("v3", theta, fe,
                          beta_wiring=((2.0, "u1"), (2.0, "v2")), stream=2),
            ComponentSpec("d4", theta, 0.0,
                          alpha_wiring=((2.0, ("v2", "v3")),),
                          beta_wiring=((2.0, "u1"), (2.0, "v3")), stream=3),
        ],
        order_checks=((("u1",), ("u1", "v2")), (("v3",), ("v3", "d4"))),
        derived={
            "from_ramp": ("u1", "v2"),
            "from_ramp_plus_extra": ("u1", "v2", "v3"),
            "from_base_plus_extra": ("u1", "v3", "d4"),
        },
    )
    return run_coupled(sys, grid, T, seed, replicas, snapshot_times, check_every)


def delta_from_fields(lo, hi):
    """Ordered-pair gain recentered at the lower path's right marker."""
    if abs(lo.origin - hi.origin) > 1e-9 or abs(lo.dx - hi.dx) > 1e-12 \
            or lo.n != hi.n:
        raise ValueError("pair must share a grid")
    r0 = right_marker(lo)
    if r0 == float("-inf"):
        raise ValueError("lower component is extinct; gain field undefined")
    vals = hi.values - lo.values
    if np.any(vals < 0):
        raise InvariantViolation("pair is not ordered; gain would be negative")
    return Field(lo.origin - r0, lo.dx, vals)


def delta_field(pair, s, replica=0):
    """Gain field of an ordered coupled pair at snapshot time s.

    Both components are recentered at the lower one's right marker and
    subtracted; the result is a nonnegative Field.
    """
    if pair.lo_name is None or pair.hi_name is None:
        raise ValueError("trajectory does not carry an ordered pair")
    lo = pair.snapshot_field(pair.lo_name, float(s), replica)
    hi = pair.snapshot_field(pair.hi_name, float(s), replica)
    return delta_from_fields(lo, hi)


def coupled_to_csv(fh, ct, replica=0):
    """One R0/L0/mass column group per component (and derived sum)."""
    names = list(ct.series)
    cols = []
    for nm in names:
        cols += [f"R0_{nm}", f"L0_{nm}", f"mass_{nm}"]
    fh.write("t," + ",".join(cols) + "\n")
    for i, t in enumerate(ct.times):
        row = [repr(float(t))]
        for nm in names:
            s = ct.series[nm]
            row += [repr(float(s["r0"][replica, i])),
                    repr(float(s["l0"][replica, i])),
                    repr(float(s["mass"][replica, i]))]
        fh.write(",".join(row) + "\n")
