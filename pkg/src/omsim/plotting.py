"""Static figures for sweep results (file output only, Agg backend)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweep import AXES, FREQUENCY_FIELDS, SweepResult  # noqa: E402

AXIS_LABELS = {
    "delta": r"$\Delta/\omega_m$",
    "gamma_m": r"$\gamma_m/\omega_m$",
    "temperature": "T (K)",
    "varpi": r"$\varpi/\omega_m$",
    "hopping": r"$J/\omega_m$",
}


def _x_values(result: SweepResult) -> np.ndarray:
    spec = result.config.sweep
    if AXES[spec.axis] in FREQUENCY_FIELDS and spec.units != "omega_m":
        return result.grid / result.config.params.mech_freq
    return result.grid


def plot_sweep(result: SweepResult, path: str | os.PathLike, dpi: int = 150) -> str:
    """Plot E_N against the sweep axis, one line per (series, pair); returns ``path``."""
    spec = result.config.sweep
    x = _x_values(result)
    multi_pair = len(result.config.pairs) > 1
    fig, ax = plt.subplots(figsize=(5.0, 3.6), constrained_layout=True)
    for k, s in enumerate(result.series):
        for pair in result.config.pairs:
            label = f"{s.label} {pair[0]}-{pair[1]}" if multi_pair else s.label
            ax.plot(x, result.e_n(k, pair), lw=1.4, label=label)
    ax.set_xlabel(AXIS_LABELS[spec.axis])
    ax.set_ylabel(r"$E_N$")
    if spec.scale == "log":
        ax.set_xscale("log")
    ax.set_ylim(bottom=0)
    ax.set_title(result.config.name)
    if len(result.series) > 1 or multi_pair:
        ax.legend(fontsize=7, frameon=False)
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return str(path)
