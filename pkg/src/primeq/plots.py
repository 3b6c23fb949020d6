"""Figure rendering for report paths. The CSV stream is the canonical
output; these are quick-look plots written next to it.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _series(records, attr):
    return (np.array([r.t for r in records]),
            np.array([getattr(r, attr) for r in records]))


def render_diagnostics(records, directory) -> list:
    """Energy, dissipation and pressure history figures; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for attr, label in (("E_v", r"$\|v\|_2^2$"), ("E_tau", r"$\|\tau\|_2^2$"),
                        ("E_sigma", r"$\|\sigma\|_2^2$")):
        ts, ys = _series(records, attr)
        ax.plot(ts, ys, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_yscale("log" if all(r.E_v > 0 for r in records) else "linear")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(directory, "energies.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for attr, label in (("D_v", r"$\|\nabla v\|_2^2$"),
                        ("D_zeta", r"$\|\nabla\zeta\|_2^2$"),
                        ("robin_term", "Robin boundary term")):
        ts, ys = _series(records, attr)
        ax.plot(ts, ys, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("dissipation")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(directory, "dissipation.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ts, ys = _series(records, "gradpi_norm")
    ax.plot(ts, ys, label=r"$\|\nabla_H \pi_s\|_2$")
    ts, ys = _series(records, "energy_residual")
    ax.plot(ts, np.abs(ys), label="|energy residual|")
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(directory, "pressure_residual.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def render_decay(report, samples, directory) -> list:
    """Fitted decay series with the reference exponential envelopes."""
    os.makedirs(directory, exist_ok=True)
    ts, dv_lap, dt_lap, gradpi = samples
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ts, dv_lap, label=r"$\|\partial_t v\| + \|\Delta v\|$")
    ax.semilogy(ts, dt_lap, label=r"$\|\partial_t \tau\| + \|\Delta\tau\|$")
    ax.semilogy(ts, gradpi, label=r"$\|\nabla_H \pi_s\|$")
    ref = dv_lap[0] * np.exp(-report.beta_v * ts)
    ax.semilogy(ts, ref, "k--", lw=0.8,
                label=rf"$e^{{-\beta_v t}}$, $\beta_v$={report.beta_v:.3f}")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(directory, "decay_rates.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def render_convergence(report, directory) -> list:
    """Error-vs-refinement panels for the manufactured cases in the report."""
    os.makedirs(directory, exist_ok=True)
    panels = [(k, v) for k, v in report.values.items() if "errors" in v]
    if not panels:
        return []
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.5))
    axes = np.atleast_1d(axes)
    xdata = {"horizontal": [8, 16], "vertical": [8, 16, 32],
             "temporal": [32, 64, 128]}
    for ax, (name, vals) in zip(axes, panels):
        xs = xdata.get(name, range(len(vals["errors"])))
        ax.loglog(xs, vals["errors"], "o-")
        ax.set_title(name)
        ax.set_xlabel("refinement")
        ax.set_ylabel("error")
    fig.tight_layout()
    path = os.path.join(directory, "convergence.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
