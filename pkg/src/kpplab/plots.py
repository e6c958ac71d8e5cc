"""Figure rendering for experiment artifacts.

Every plot function takes already-parsed data, draws one matplotlib figure
and writes it to file.  Rendering is deterministic: fixed hash salt, no
embedded dates, Agg backend.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "kpplab"

__all__ = ["plot_markers", "plot_speed_table", "plot_duality", "plot_waves",
           "save_figure"]

_NO_DATE = {"Date": None}


def save_figure(fig, path):
    fig.savefig(path, metadata=_NO_DATE if str(path).endswith(".svg") else None)
    plt.close(fig)


def plot_markers(times, series, path, title="front markers"):
    """Marker/mass series vs time.  series maps label -> values."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for label, vals in series.items():
        vals = np.asarray(vals)
        tgt = ax2 if label.startswith("mass") else ax1
        finite = np.isfinite(vals)
        tgt.plot(np.asarray(times)[finite], vals[finite], label=label, lw=1)
    ax1.set_ylabel("marker position")
    ax2.set_ylabel("mass")
    ax2.set_xlabel("t")
    for ax in (ax1, ax2):
        if ax.lines:
            ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
    ax1.set_title(title)
    save_figure(fig, path)


def plot_speed_table(thetas, b_hats, errs, path):
    """Speed estimates vs theta with the 2*sqrt(theta) ceiling."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    thetas = np.asarray(thetas, dtype=float)
    ax.errorbar(thetas, b_hats, yerr=3 * np.asarray(errs), fmt="o-",
                capsize=3, label="speed estimate (3 s.e.)")
    if thetas.size:
        ts = np.linspace(max(1e-6, thetas.min() * 0.8), thetas.max() * 1.1, 100)
        ax.plot(ts, 2 * np.sqrt(ts), "k--", lw=1, label="2*sqrt(theta)")
    ax.set_xlabel("theta")
    ax.set_ylabel("front speed")
    ax.legend()
    ax.grid(alpha=0.3)
    save_figure(fig, path)


def plot_duality(names, zs, path):
    """z-scores of the duality comparisons with the 3-sigma gate."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    y = np.arange(len(names))
    ax.barh(y, zs, color="steelblue")
    ax.axvline(3.0, color="crimson", ls="--", lw=1, label="3 sigma")
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xlabel("|lhs - rhs| / combined s.e.")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)


def plot_waves(profiles, path, max_profiles=40):
    """Overlay of recentered wave profiles (right marker at 0)."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for f in profiles[:max_profiles]:
        ax.plot(f.x(), f.values, lw=0.6, alpha=0.5, color="steelblue")
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("x (recentered at right marker)")
    ax.set_ylabel("u")
    ax.grid(alpha=0.3)
    save_figure(fig, path)
