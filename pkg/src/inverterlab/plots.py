"""Static SVG charts of a finished run (needs matplotlib)."""

from __future__ import annotations

import os

import numpy as np


def write_svgs(result, out_dir: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "inverterlab"
    meta = {"Date": None}
    t_ms = result.column("t") * 1e3
    paths = []

    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(t_ms, result.column("x1_star"), "k--", lw=1, label="reference")
    ax.plot(t_ms, result.column("x1"), lw=1, label="output voltage")
    ax.set_xlabel("t [ms]")
    ax.set_ylabel("V")
    ax.legend(loc="upper right")
    ax.set_title(f"{result.config.controller} ({result.config.model})")
    paths.append(os.path.join(out_dir, "voltage.svg"))
    fig.savefig(paths[-1], format="svg", metadata=meta, bbox_inches="tight")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 2.5))
    ax.plot(t_ms, result.column("u_command"), lw=1)
    ax.set_xlabel("t [ms]")
    ax.set_ylabel("u")
    ax.set_ylim(-1.05, 1.05)
    paths.append(os.path.join(out_dir, "command.svg"))
    fig.savefig(paths[-1], format="svg", metadata=meta, bbox_inches="tight")
    plt.close(fig)

    spec = result.spectrum
    fig, ax = plt.subplots(figsize=(8, 3))
    n = np.arange(1, spec.n_harmonics + 1)
    ax.bar(n, spec.magnitudes)
    ax.set_yscale("log")
    ax.set_xlabel("harmonic")
    ax.set_ylabel("peak V")
    ax.set_title(f"THD = {100 * result.summary.thd:.3f} %")
    paths.append(os.path.join(out_dir, "spectrum.svg"))
    fig.savefig(paths[-1], format="svg", metadata=meta, bbox_inches="tight")
    plt.close(fig)
    return paths
