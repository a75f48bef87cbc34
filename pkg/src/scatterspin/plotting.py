"""Figure rendering for the CLI report path.

Each experiment gets one PNG next to its delimited output.  Figures are a
convenience view of the same rows the CSV/JSON carries; the delimited file
remains the artifact of record.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_correlations(rows: list[dict], path) -> None:
    t = np.array([r["t"] for r in rows])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
    ax1.plot(t, [r["exact"] for r in rows], "o-", label="exact")
    ax1.plot(t, [r["model"] for r in rows], "-", label="leakage model")
    ax1.plot(t, [r["single_ion_bound"] for r in rows], ":", label="single-ion bound")
    ax1.plot(t, [r["exact_perp"] for r in rows], "s--", label="exact (perp)")
    ax1.plot(t, [r["model_perp"] for r in rows], "--", label="model (perp)")
    ax1.set_ylabel("correlator")
    ax1.legend(fontsize=8)
    ax2.plot(t, [r["p_leak"] for r in rows], "k-")
    ax2.set_xlabel("effective Ising time (s)")
    ax2.set_ylabel("leak probability")
    _save(fig, path)


def plot_squeezing(rows: list[dict], path) -> None:
    x = np.array([r["coupling_angle"] for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(x, [r["xi2"] for r in rows], "o-", label="with scattering")
    ax.loglog(x, [r["xi2_noiseless"] for r in rows], "s--", label="noiseless")
    ax.set_xlabel("J t / N")
    ax.set_ylabel(r"squeezing parameter $\xi^2_R$")
    ax.legend()
    _save(fig, path)


def plot_qaoa(rows: list[dict], gammas, betas, path) -> None:
    costs = np.array([r["cost"] for r in rows]).reshape(len(gammas), len(betas))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(betas, gammas, costs, shading="auto")
    fig.colorbar(mesh, ax=ax, label="cost")
    ax.set_xlabel("beta")
    ax.set_ylabel("gamma")
    _save(fig, path)


def plot_sweep(rows: list[dict], x_column: str, y_columns: list[str], path) -> None:
    x = np.array([r[x_column] for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in y_columns:
        ax.plot(x, [r[col] for r in rows], "o-", label=col)
    ax.set_xlabel(x_column)
    ax.legend(fontsize=8)
    _save(fig, path)
