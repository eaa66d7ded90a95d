"""Quick-look figures rendered next to the CLI's data files.

Every renderer takes the already computed data plus a target path, writes a
PNG, and returns the path. The data files stay the primary interface; these
figures exist so a run can be eyeballed without a separate plotting step.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_winding_curve",
    "plot_pole_chart",
    "plot_decay_distribution",
    "plot_conditional_mean",
    "plot_two_level_sweep",
    "plot_multichannel_sweep",
    "plot_preparation_sweep",
]

_DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_winding_curve(curve_points, winding, path):
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    pts = np.asarray(curve_points)
    ax.plot(pts.real, pts.imag, lw=0.9, color="tab:blue")
    ax.plot(0.0, 0.0, "k+", ms=10)
    ax.set_xlabel("Re C")
    ax.set_ylabel("Im C")
    ax.set_title(f"winding number {winding}")
    ax.set_aspect("equal")
    return _finish(fig, path)


def plot_pole_chart(poles, energies, overlaps, grid_x, grid_y, grid_v, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    v = np.asarray(grid_v)
    levels = np.quantile(v[np.isfinite(v)], np.linspace(0.02, 0.98, 30))
    ax.contourf(grid_x, grid_y, v, levels=np.unique(levels), cmap="viridis")
    poles = np.asarray(poles)
    ax.scatter(poles.real, poles.imag, marker="+", s=90, color="white", label="poles")
    sizes = 40.0 + 400.0 * np.asarray(overlaps)
    ax.scatter(
        np.zeros_like(energies), -np.asarray(energies), s=sizes,
        facecolors="none", edgecolors="tab:red", label="charges",
    )
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    ax.legend(loc="upper left", framealpha=0.6)
    return _finish(fig, path)


def plot_decay_distribution(times, density, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(times, np.maximum(density, 1e-300), lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("F(t)")
    return _finish(fig, path)


def plot_conditional_mean(thetas, values, gamma, w, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(thetas, 2.0 * gamma * np.asarray(values), lw=1.2)
    for level in range(1, w + 1):
        ax.axhline(level, color="0.85", lw=0.6, zorder=0)
    ax.set_xlabel("observation time")
    ax.set_ylabel("2 Gamma <T_c>")
    return _finish(fig, path)


def plot_two_level_sweep(omegas, means, variances, gamma, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(omegas, np.asarray(means) * gamma, "o-", ms=3, label="Gamma <T>")
    ax.set_xlabel("Omega")
    ax.set_ylabel("Gamma <T>")
    ax.set_ylim(0.0, 1.5)
    twin = ax.twinx()
    twin.semilogy(omegas, variances, "^-", ms=3, color="tab:green", label="Var T")
    twin.set_ylabel("Var T")
    return _finish(fig, path)


def plot_multichannel_sweep(gammas, channel_means, mixed_means, prediction, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, means in channel_means.items():
        ax.semilogx(gammas, np.asarray(gammas) * np.asarray(means), "o--", ms=3, label=label)
    ax.semilogx(gammas, np.asarray(gammas) * np.asarray(mixed_means), "s-", label="mixed")
    ax.axhline(prediction, color="k", lw=0.8)
    ax.set_xlabel("Gamma")
    ax.set_ylabel("Gamma <T>")
    ax.legend()
    return _finish(fig, path)


def plot_preparation_sweep(gammas, curves, w, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, means in curves.items():
        ax.semilogx(gammas, 2.0 * np.asarray(gammas) * np.asarray(means), "o-", ms=3, label=label)
    ax.axhline(w, color="k", lw=0.8)
    ax.set_xlabel("Gamma")
    ax.set_ylabel("2 Gamma <T>")
    ax.legend()
    return _finish(fig, path)
