"""Figure rendering for run and study outputs (written next to the CSV)."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_run_figure(times, states, out_path, title: str = "trajectory"):
    """State components against time, one line per component."""
    plt = _pyplot()
    times = np.asarray(times)
    states = np.atleast_2d(np.asarray(states))
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for j in range(states.shape[1]):
        ax.plot(times, states[:, j], label=f"x{j + 1}", linewidth=1.4)
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_study_figure(table, out_path, title: str = "convergence study"):
    """Log-log plot of the study errors against the rate envelope."""
    plt = _pyplot()
    ns = [row.n for row in table.rows]
    errs = [row.e_n for row in table.rows]
    envs = [row.env_n for row in table.rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(ns, errs, "o-", label="e_n", linewidth=1.4)
    ax.loglog(ns, np.sqrt(envs), "s--", label="sqrt(env_n)", linewidth=1.2)
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
