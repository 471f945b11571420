"""Figure rendering for the CLI report paths.

Every subcommand that writes CSV output also renders a PNG next to it; these
helpers own the matplotlib side (Agg backend, no display needed).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_moments", "plot_spectra", "plot_kz_scan", "plot_geometry",
           "plot_oracle"]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_moments(times, moments: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for exp in sorted(moments):
        ax.plot(times, moments[exp], label=f"$M_{{{exp:g}}}$")
    ax.set_xlabel("t")
    ax.set_ylabel("moment")
    if all(np.all(np.asarray(v) > 0) for v in moments.values()):
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_title("moment history")
    _save(fig, path)


def plot_spectra(snapshots, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for spec in snapshots:
        mask = spec.values > 0
        if not np.any(mask):
            continue
        ax.loglog(spec.grid.nodes[mask], spec.values[mask], label=f"t={spec.time:g}")
    ax.set_xlabel("k")
    ax.set_ylabel("f(k)")
    ax.legend(fontsize=8)
    ax.set_title("spectrum snapshots")
    _save(fig, path)


def plot_kz_scan(exponents, residuals, argmin_x, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(exponents, residuals, marker=".", lw=1)
    ax.axvline(argmin_x, color="tab:red", lw=1,
               label=f"argmin x = {argmin_x:.4f}")
    ax.axvline(17.0 / 4.0, color="tab:gray", lw=1, ls="--", label="x = 17/4")
    ax.set_xlabel("spectral exponent x")
    ax.set_ylabel("normalized stationarity residual")
    ax.legend(fontsize=8)
    ax.set_title("power-law stationarity scan")
    _save(fig, path)


def plot_geometry(alphas, s_vals, u_gain, w_gain, u_loss, w_loss, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    axes[0].plot(alphas, s_vals)
    axes[0].set_xlabel(r"$\alpha$")
    axes[0].set_ylabel(r"s($\alpha$) / p")
    axes[0].set_title("gain surface profile")
    axes[1].plot(u_gain, w_gain, label="gain")
    axes[1].plot(u_loss, w_loss, label="loss")
    axes[1].set_xlabel("u / p")
    axes[1].set_ylabel("weight density")
    axes[1].set_yscale("log")
    axes[1].legend(fontsize=8)
    axes[1].set_title("reduced weights")
    _save(fig, path)


def plot_oracle(labels, rel_diff, sigmas, path) -> None:
    idx = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.4 * len(labels)), 4.0))
    ax.bar(idx, 100.0 * np.asarray(rel_diff), color="tab:blue", alpha=0.7)
    ax.axhline(2.0, color="tab:red", lw=1, ls="--")
    ax.axhline(-2.0, color="tab:red", lw=1, ls="--")
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("reduced vs MC difference [%]")
    ax.set_title("surface-weight oracle comparison")
    _save(fig, path)
