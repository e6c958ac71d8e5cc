"""Experiment orchestration: config files, dispatch, artifacts, manifests.

Config files are flat `key = value` text with an explicit schema_version;
unknown keys are errors.  Environment variables KPPLAB_<KEY> override file
values; command-line flags override both.  Exit status: 0 ok, 1 usage
error, 2 invariant-assertion failure, 3 runtime failure.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import InvariantViolation, KpplabError, UsageError
from .field import (Bump, Custom, Field, Heavyside, SplitHeavyside, ZetaRamp,
                    read_snapshot, render, write_snapshot)
from .integrator import (GridSpec, NoiseStream, SpdeParams, simulate,
                         trajectory_to_csv)
from .parallel import default_jobs

__all__ = ["ExperimentConfig", "run_experiment", "emit_plot_data", "main"]

SCHEMA_VERSION = 1
KINDS = ("simulate", "couple", "particle", "speed", "wave", "duality", "sweep")

# key -> (type, default); type one of int float str bool floats
_COMMON = {
    "schema_version": ("int", None),
    "kind": ("str", None),
    "seed": ("int", 0),
    "out": ("str", None),
    "jobs": ("int", None),
    "dx": ("float", 0.1),
    "dt": ("float", 0.002),
    "window_lo": ("float", -6.0),
    "window_hi": ("float", 6.0),
    "record_every": ("int", 1),
}

_SCHEMAS = {
    "simulate": {
        "theta": ("float", 2.0), "T": ("float", 1.0), "ic": ("str", "bump"),
        "noise_amp": ("float", 1.0), "alpha": ("float", 0.0),
        "beta": ("float", 0.0), "gamma": ("float", 1.0),
        "snapshot_times": ("floats", ()), "move_left": ("bool", True),
        "move_right": ("bool", True), "front_level": ("float", None),
        "noise_model": ("str", "branching"),
    },
    "couple": {
        "coupling": ("str", "monotone"), "theta": ("float", 2.0),
        "theta2": ("float", None), "T": ("float", 1.0),
        "replicas": ("int", 1), "ic": ("str", "bump"),
        "ic2": ("str", None), "alpha1": ("float", 0.0),
        "alpha2_ic": ("str", None), "N_cap": ("float", 50.0),
        "snapshot_times": ("floats", ()), "check_every": ("int", 1),
    },
    "particle": {
        "n": ("int", 16), "theta": ("float", 2.0),
        "theta_list": ("floats", ()), "n_list": ("floats", ()),
        "T": ("float", 0.5), "replicas": ("int", 1), "ic": ("str", "bump"),
        "c1": ("float", 1.0), "vs_spde": ("bool", False),
        "spde_replicas": ("int", 400),
    },
    "speed": {
        "theta": ("float", 5.0), "T": ("float", 10.0),
        "replicas": ("int", 100), "N_cap": ("float", 50.0),
        "behind": ("float", 15.0), "with_alpha": ("bool", True),
    },
    "wave": {
        "theta": ("float", 5.0), "T": ("float", 10.0), "count": ("int", 100),
        "N_cap": ("float", 50.0), "depth": ("float", 25.0),
    },
    "duality": {
        "identity": ("str", "self"), "theta": ("float", 2.0),
        "T": ("float", 0.5), "s": ("float", 0.25), "x": ("float", 2.0),
        "replicas": ("int", 400), "N_cap": ("float", 50.0),
        "beta_scale": ("float", 1.0),
    },
    "sweep": {
        "theta_list": ("floats", (3.0, 4.0, 5.0, 6.0)),
        "T": ("float", 10.0), "replicas": ("int", 100),
        "N_cap": ("float", 50.0), "behind": ("float", 15.0),
    },
}


def _parse_value(raw, typ, key):
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if typ == "floats":
            return tuple(float(p) for p in raw.replace(",", " ").split())
        return raw
    except ValueError:
        raise UsageError(f"config key {key}: cannot parse {raw!r} as {typ}")


class ExperimentConfig(dict):
    """Validated flat configuration; behaves as a plain dict."""

    @classmethod
    def from_file(cls, path, overrides=None):
        pairs = {}
        try:
            with open(path) as fh:
                for lineno, line in enumerate(fh, 1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    if "=" not in line:
                        raise UsageError(
                            f"{path}:{lineno}: expected 'key = value'")
                    k, v = line.split("=", 1)
                    pairs[k.strip()] = v.strip()
        except OSError as e:
            raise UsageError(f"cannot read config: {e}")
        return cls.from_pairs(pairs, overrides)

    @classmethod
    def from_pairs(cls, pairs, overrides=None):
        if "kind" not in pairs:
            raise UsageError("config is missing the 'kind' key")
        kind = pairs["kind"].strip()
        if kind not in KINDS:
            raise UsageError(f"unknown kind {kind!r}; one of {KINDS}")
        schema = dict(_COMMON)
        schema.update(_SCHEMAS[kind])
        cfg = {k: d for k, (t, d) in schema.items()}
        cfg["kind"] = kind
        for key, raw in pairs.items():
            if key not in schema:
                raise UsageError(f"unknown config key {key!r} for kind {kind}")
            cfg[key] = _parse_value(raw, schema[key][0], key)
        for key in schema:
            env = os.environ.get(f"KPPLAB_{key.upper()}")
            if env is not None:
                cfg[key] = _parse_value(env, schema[key][0], key)
        for key, val in (overrides or {}).items():
            if val is not None:
                cfg[key] = val
        if cfg.get("schema_version") != SCHEMA_VERSION:
            raise UsageError(
                f"config schema_version must be {SCHEMA_VERSION}")
        if cfg.get("out") is None:
            cfg["out"] = os.path.join("runs", kind)
        if cfg.get("jobs") is None:
            cfg["jobs"] = default_jobs()
        return cls(cfg)


def _make_ic(spec, window, dx):
    """Initial-condition mini-language: bump, zero, heavyside:eps,x0,
    split, zetaramp:N, box:a,b,h, file:path."""
    if spec is None:
        raise UsageError("missing initial-condition spec")
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "bump":
        return Bump()
    if name == "zero":
        n = int(np.ceil((window[1] - window[0]) / dx)) + 1
        return Custom(Field(window[0], dx, np.zeros(n)))
    if name == "split":
        return SplitHeavyside()
    if name == "heavyside":
        parts = [float(p) for p in arg.split(",")] if arg else [1.0, 0.0]
        return Heavyside(*parts)
    if name == "zetaramp":
        return ZetaRamp(float(arg) if arg else 50.0)
    if name == "box":
        a, b, h = (float(p) for p in arg.split(","))
        xs = np.arange(window[0], window[1] + dx / 2, dx)
        vals = np.where((xs >= a) & (xs <= b), h, 0.0)
        return Custom(Field(window[0], dx, vals))
    if name == "file":
        with open(arg) as fh:
            _, f = read_snapshot(fh)
        return Custom(f)
    raise UsageError(f"unknown ic spec {spec!r}")


def _grid(cfg, **kw):
    opts = dict(dx=cfg["dx"], dt=cfg["dt"],
                window=(cfg["window_lo"], cfg["window_hi"]),
                record_every=cfg["record_every"])
    opts.update(kw)
    return GridSpec(**opts)


class _Artifacts:
    """Collects written files and hashes them for the manifest."""

    def __init__(self, out_dir):
        self.out = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.files = []

    def path(self, rel):
        p = os.path.join(self.out, rel)
        os.makedirs(os.path.dirname(p) or ".", exist_ok=True)
        self.files.append(rel)
        return p

    def open(self, rel):
        return open(self.path(rel), "w")

    def entries(self):
        out = []
        for rel in sorted(set(self.files)):
            p = os.path.join(self.out, rel)
            h = hashlib.sha256(open(p, "rb").read()).hexdigest()
            out.append({"path": rel, "sha256": h,
                        "bytes": os.path.getsize(p)})
        return out


def _run_simulate(cfg, art):
    from .plots import plot_markers

    grid = _grid(cfg, move_left=cfg["move_left"], move_right=cfg["move_right"])
    ic = _make_ic(cfg["ic"], grid.window, grid.dx)
    p = SpdeParams(theta=cfg["theta"], alpha=cfg["alpha"], beta=cfg["beta"],
                   gamma=cfg["gamma"], noise_amp=cfg["noise_amp"],
                   noise_model=cfg["noise_model"])
    traj = simulate(ic, p, grid, cfg["T"], snapshot_times=cfg["snapshot_times"],
                    noise=NoiseStream(cfg["seed"]),
                    front_level=cfg["front_level"])
    with art.open("trajectory.csv") as fh:
        trajectory_to_csv(fh, traj)
    for t, f in sorted(traj.snapshots.items()):
        with art.open(f"snapshot_t{t:g}.txt") as fh:
            write_snapshot(fh, t, f)
    plot_markers(traj.times,
                 {"R0": traj.r0, "L0": traj.l0, "mass": traj.mass},
                 art.path("markers.svg"), title=f"simulate {cfg['ic']}")
    return {"replicas": 1, "extinction_time": traj.extinction_time}


def _run_couple(cfg, art):
    import kpplab.coupling as C
    from .plots import plot_markers

    grid = _grid(cfg, move_left=False, move_right=False)
    ic = _make_ic(cfg["ic"], grid.window, grid.dx)
    kind = cfg["coupling"]
    kw = dict(replicas=cfg["replicas"], snapshot_times=cfg["snapshot_times"],
              check_every=cfg["check_every"])
    if kind == "monotone":
        ic2 = _make_ic(cfg["ic2"] or "bump", grid.window, grid.dx)
        ct = C.couple_monotone(ic, ic2, cfg["theta"], grid, cfg["T"],
                               cfg["seed"], **kw)
    elif kind == "theta":
        th2 = cfg["theta2"] if cfg["theta2"] is not None else cfg["theta"] + 1.0
        ct = C.couple_theta(ic, cfg["theta"], th2, grid, cfg["T"],
                            cfg["seed"], **kw)
    elif kind == "two_independent":
        ic2 = _make_ic(cfg["ic2"] or "bump", grid.window, grid.dx)
        ct = C.couple_two_independent(ic, ic2, cfg["theta"], grid, cfg["T"],
                                      cfg["seed"], **kw)
    elif kind == "immigration":
        a2 = 0.0
        if cfg["alpha2_ic"]:
            a2 = render(_make_ic(cfg["alpha2_ic"], grid.window, grid.dx),
                        grid.window, grid.dx)
        ct = C.couple_immigration(ic, cfg["alpha1"], a2, cfg["theta"], grid,
                                  cfg["T"], cfg["seed"], **kw)
    elif kind == "claim2":
        ic2 = _make_ic(cfg["ic2"] or "bump", grid.window, grid.dx)
        ct = C.claim2_chain(ic, ic2, cfg["N_cap"], cfg["theta"], grid,
                            cfg["T"], cfg["seed"], **kw)
    else:
        raise UsageError(f"unknown coupling {kind!r}")
    with art.open("coupled.csv") as fh:
        C.coupled_to_csv(fh, ct, replica=0)
    with art.open("wiring.json") as fh:
        json.dump(ct.system.wiring_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    series = {}
    for nm in ct.series:
        series[f"R0_{nm}"] = ct.series[nm]["r0"][0]
        series[f"mass_{nm}"] = ct.series[nm]["mass"][0]
    plot_markers(ct.times, series, art.path("markers.svg"),
                 title=f"coupling {kind}")
    return {"replicas": cfg["replicas"], "coupling": kind}


def _run_particle(cfg, art):
    import kpplab.particle as P
    from .plots import plot_markers

    info = {"n": cfg["n"], "replicas": cfg["replicas"]}
    ic_field = render(_make_ic(cfg["ic"], (-3, 3), 0.01), (-3, 3), 0.01)
    if cfg["vs_spde"]:
        n_list = [int(v) for v in (cfg["n_list"] or (cfg["n"],))]
        rep = P.particle_vs_spde(ic_field, cfg["theta"], n_list, cfg["T"],
                                 cfg["replicas"], cfg["spde_replicas"],
                                 cfg["seed"], c1=cfg["c1"])
        with art.open("particle_vs_spde.csv") as fh:
            fh.write("n,laplace,laplace_se,spde_laplace,spde_se,"
                     "discrepancy,joint_se\n")
            s = rep["spde"]["laplace"]
            for n in n_list:
                r = rep["particle"][n]
                fh.write(f"{n},{r['laplace'][0]!r},{r['laplace'][1]!r},"
                         f"{s[0]!r},{s[1]!r},{r['discrepancy']!r},"
                         f"{r['joint_se']!r}\n")
        info["kind"] = "vs_spde"
        return info
    thetas = list(cfg["theta_list"]) or [cfg["theta"]]
    rec = np.linspace(0, cfg["T"], 21)
    traj = P.couple_theta_star_particles(
        ic_field, thetas, cfg["n"], cfg["T"], cfg["seed"], c1=cfg["c1"],
        record_times=rec, snapshot_times=[cfg["T"]])
    with art.open("particle.csv") as fh:
        cols = [f"R0_theta{tt:g}" for tt in thetas] + \
               [f"count_theta{tt:g}" for tt in thetas]
        fh.write("t," + ",".join(cols) + "\n")
        for i, t in enumerate(traj.times):
            row = [repr(float(t))]
            row += [repr(float(v)) for v in traj.r0[:, i]]
            row += [repr(float(v)) for v in traj.counts[:, i]]
            fh.write(",".join(row) + "\n")
    for j, tt in enumerate(thetas):
        st = traj.state(float(cfg["T"]), j)
        with art.open(f"occupancy_theta{tt:g}.txt") as fh:
            P.write_occupancy(fh, cfg["T"], st)
        with art.open(f"density_theta{tt:g}.txt") as fh:
            write_snapshot(fh, cfg["T"],
                           P.approx_density(st, dx_out=cfg["dx"]))
    series = {f"R0_theta{tt:g}": traj.r0[j] for j, tt in enumerate(thetas)}
    plot_markers(traj.times, series, art.path("markers.svg"),
                 title=f"particle n={cfg['n']}")
    info["events"] = traj.events
    return info


def _run_speed(cfg, art, thetas=None):
    import kpplab.fronts as F
    from .plots import plot_speed_table

    thetas = thetas if thetas is not None else [cfg["theta"]]
    ests = []
    if thetas:
        grid = F.ustar_grid(max(thetas), cfg["T"], dx=cfg["dx"], dt=cfg["dt"],
                            behind=cfg["behind"], record_every=5)
        for i, th in enumerate(thetas):
            ests.append(F.estimate_B(th, cfg["T"], cfg["replicas"],
                                     cfg["N_cap"], grid,
                                     cfg["seed"] + i * cfg["replicas"]))
    with art.open("speed.csv") as fh:
        F.speed_table_csv(fh, ests)
    if cfg.get("with_alpha", False) and len(thetas) == 1:
        a, se = F.estimate_alpha_T(thetas[0], cfg["T"], cfg["replicas"],
                                   cfg["N_cap"], grid,
                                   cfg["seed"] + 7 * cfg["replicas"])
        with art.open("alpha.csv") as fh:
            fh.write("theta,T,replicas,N_cap,alpha_T,stderr\n")
            fh.write(f"{thetas[0]!r},{cfg['T']!r},{cfg['replicas']},"
                     f"{cfg['N_cap']!r},{a!r},{se!r}\n")
    plot_speed_table([e.theta for e in ests],
                     [e.mean_R0_over_T for e in ests],
                     [e.std_error for e in ests], art.path("speed.svg"))
    # a sweep must produce a speed column monotone within significance
    for a, b in zip(ests, ests[1:]):
        joint = float(np.hypot(a.std_error, b.std_error))
        if b.mean_R0_over_T < a.mean_R0_over_T - 3 * joint:
            raise InvariantViolation(
                f"speed estimate decreased from theta={a.theta} to "
                f"{b.theta} by more than 3 joint s.e.")
    return {"replicas": cfg["replicas"],
            "estimates": [[e.theta, e.mean_R0_over_T, e.std_error]
                          for e in ests]}


def _run_wave(cfg, art):
    import kpplab.fronts as F
    from .plots import plot_waves

    grid = F.ustar_grid(cfg["theta"], cfg["T"], dx=cfg["dx"], dt=cfg["dt"],
                        record_every=5)
    samples = F.sample_wave(cfg["theta"], cfg["T"], cfg["N_cap"], grid,
                            cfg["count"], cfg["seed"], depth=cfg["depth"])
    lines = []
    for i, w in enumerate(samples):
        rel = f"samples/wave_{i:04d}.txt"
        with art.open(rel) as fh:
            write_snapshot(fh, w.s, w.profile)
        lines.append(f"{rel} {w.s!r}")
    with art.open("wave_manifest.txt") as fh:
        fh.write("\n".join(lines) + "\n")
    plot_waves([w.profile for w in samples], art.path("waves.svg"))
    return {"replicas": cfg["count"]}


def _run_duality(cfg, art):
    import kpplab.duality as D
    from .field import Bump as _B
    from .plots import plot_duality

    grid = _grid(cfg)
    ident = cfg["identity"]
    reports = []
    if ident == "self":
        reports = D.self_duality_check(_B(), _B(), cfg["theta"], cfg["T"],
                                       cfg["s"], cfg["replicas"], grid,
                                       cfg["seed"])
    elif ident == "competition":
        f2 = render(_B(), grid.window, grid.dx)
        scale = cfg["beta_scale"]
        T = cfg["T"]

        def beta(t, _f=f2, _T=T, _s=scale):
            return Field(_f.origin, _f.dx, _s * _f.values) if t <= _T / 2 else 0.0

        reports = [D.competition_duality_check(_B(), _B(), beta, cfg["theta"],
                                               T, cfg["replicas"], grid,
                                               cfg["seed"])]
    elif ident == "marker_cdf":
        reports = [D.marker_cdf_via_dual(_B(), cfg["x"], cfg["T"],
                                         cfg["theta"], cfg["replicas"],
                                         cfg["N_cap"], grid, cfg["seed"])]
    elif ident == "laplace":
        from .field import shift as _shift
        g = _shift(render(_B(), (-1, 1), grid.dx), -2.0)
        reports = [D.upper_measure_laplace_check(g, cfg["theta"], cfg["T"],
                                                 cfg["replicas"], cfg["N_cap"],
                                                 grid, cfg["seed"])]
    else:
        raise UsageError(f"unknown duality identity {ident!r}")
    with art.open("duality.csv") as fh:
        fh.write(D.duality_csv_header())
        for r in reports:
            fh.write(D.duality_csv_row(r))
    plot_duality([r.identity for r in reports], [r.z for r in reports],
                 art.path("duality.svg"))
    worst = max((r.z for r in reports), default=0.0)
    if worst >= 3.0:
        raise InvariantViolation(f"duality z-score {worst:.2f} >= 3")
    return {"replicas": cfg["replicas"], "max_z": worst}


def run_experiment(cfg):
    """Dispatch a validated config; returns the manifest dict."""
    t0 = time.perf_counter()
    art = _Artifacts(cfg["out"])
    kind = cfg["kind"]
    if kind == "simulate":
        info = _run_simulate(cfg, art)
    elif kind == "couple":
        info = _run_couple(cfg, art)
    elif kind == "particle":
        info = _run_particle(cfg, art)
    elif kind == "speed":
        info = _run_speed(cfg, art)
    elif kind == "sweep":
        info = _run_speed(cfg, art, thetas=list(cfg["theta_list"]))
    elif kind == "wave":
        info = _run_wave(cfg, art)
    elif kind == "duality":
        info = _run_duality(cfg, art)
    else:
        raise UsageError(f"unknown kind {kind!r}")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": f"kpplab {__version__}",
        "kind": kind,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in sorted(cfg.items())},
        "info": info,
        "wallclock_s": round(time.perf_counter() - t0, 3),
        "artifacts": art.entries(),
    }
    with open(os.path.join(cfg["out"], "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def emit_plot_data(manifest_path, plot_kind, out_dir=None):
    """Write two-column plot data (x y [yerr]) plus an SVG rendering."""
    from . import plots

    try:
        manifest = json.load(open(manifest_path))
    except OSError as e:
        raise UsageError(f"cannot read manifest: {e}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    out_dir = out_dir or base
    os.makedirs(out_dir, exist_ok=True)
    names = {a["path"] for a in manifest["artifacts"]}

    def rd(rel):
        if rel not in names:
            raise UsageError(f"manifest has no artifact {rel!r}")
        return open(os.path.join(base, rel))

    dat_path = os.path.join(out_dir, f"{plot_kind}_plot.dat")
    svg_path = os.path.join(out_dir, f"{plot_kind}_plot.svg")
    if plot_kind == "markers":
        src = "trajectory.csv" if "trajectory.csv" in names else "coupled.csv"
        rows = [ln.strip().split(",") for ln in rd(src)][1:]
        with open(dat_path, "w") as fh:
            for r in rows:
                fh.write(f"{r[0]} {r[1]}\n")
        ts = [float(r[0]) for r in rows]
        r0 = [float(r[1]) for r in rows]
        plots.plot_markers(ts, {"R0": r0}, svg_path)
    elif plot_kind == "speed":
        rows = [ln.strip().split(",") for ln in rd("speed.csv")][1:]
        with open(dat_path, "w") as fh:
            for r in rows:
                fh.write(f"{r[0]} {r[4]} {r[5]}\n")
        plots.plot_speed_table([float(r[0]) for r in rows],
                               [float(r[4]) for r in rows],
                               [float(r[5]) for r in rows], svg_path)
    elif plot_kind == "duality":
        rows = [ln.strip().split(",") for ln in rd("duality.csv")][1:]
        with open(dat_path, "w") as fh:
            for i, r in enumerate(rows):
                fh.write(f"{i} {r[-1]}\n")
        plots.plot_duality([r[0] for r in rows],
                           [float(r[-1]) for r in rows], svg_path)
    elif plot_kind == "wave":
        profs = []
        lines = [ln.split() for ln in rd("wave_manifest.txt") if ln.strip()]
        for rel, _s in lines:
            with open(os.path.join(base, rel)) as fh:
                _, f = read_snapshot(fh)
            profs.append(f)
        with open(dat_path, "w") as fh:
            if profs:
                for x, v in zip(profs[0].x(), profs[0].values):
                    fh.write(f"{x!r} {v!r}\n")
        plots.plot_waves(profs, svg_path)
    else:
        raise UsageError(f"unknown plot kind {plot_kind!r}")
    return [dat_path, svg_path]


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kpplab",
        description="Monte Carlo laboratory for the KPP equation with noise")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run a {kind} experiment")
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--jobs", type=int, default=None)
    pp = sub.add_parser("plot", help="emit plot data from a manifest")
    pp.add_argument("--manifest", required=True)
    pp.add_argument("--kind", required=True,
                    choices=("markers", "speed", "duality", "wave"))
    pp.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    try:
        if args.command == "plot":
            emit_plot_data(args.manifest, args.kind, args.out)
            return 0
        overrides = {"seed": args.seed, "out": args.out, "jobs": args.jobs}
        cfg = ExperimentConfig.from_file(args.config, overrides)
        if cfg["kind"] != args.command:
            raise UsageError(
                f"config kind {cfg['kind']!r} does not match subcommand")
        run_experiment(cfg)
        return 0
    except (UsageError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2
    except (KpplabError, Exception) as e:  # noqa: B902
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
