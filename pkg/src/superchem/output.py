"""CSV tables and SVG plots."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cpt import cpt_steady_state
from .ensemble import EnsembleStats
from .integrator import TrajectoryResult
from .model import SPECIES

LABELS = {"a": "A", "b": "B", "b2": "B$_2$", "ab": "AB", "t": "AB$_2$"}
COLORS = {"a": "tab:blue", "b": "tab:orange", "b2": "tab:green", "ab": "tab:red", "t": "tab:gray"}


def table_columns(data):
    """Ordered ``{column: 1-d array}`` view of stats, a trajectory, or a mapping."""
    if isinstance(data, EnsembleStats):
        cols = {"time": data.times}
        for i, name in enumerate(SPECIES):
            cols[f"mean_{name}"] = data.mean[i]
            cols[f"std_{name}"] = data.std[i]
        cols["corr_ab_b"] = data.corr_ab_b
        return cols
    if isinstance(data, TrajectoryResult):
        cols = {"time": data.times}
        for i, name in enumerate(SPECIES):
            cols[f"N_{name}"] = data.populations[i]
        cols["q_A"] = data.q_A
        cols["q_B"] = data.q_B
        return cols
    cols = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in data.items()}
    lengths = {v.shape[0] for v in cols.values()}
    if len(lengths) != 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    return cols


def _fmt(x):
    return format(float(x), ".12g")


def format_csv(data):
    cols = table_columns(data)
    lines = [",".join(cols)]
    for row in zip(*cols.values()):
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def emit_csv(data, path):
    """Write a header row and one row per grid point, 12 significant digits."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(format_csv(data))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def emit_plot(stats, path, R=0.5, cpt_level=None, title=None):
    """SVG of mean populations with +-std bands and the ideal CPT product level.

    ``cpt_level`` defaults to the dark-state fraction for ratio ``R`` at a
    vanishing Rabi rate, the value products reach once the pulse is gone.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if stats.times.size == 0:
        raise ValueError("cannot plot empty statistics")
    if cpt_level is None:
        cpt_level = cpt_steady_state(R, 0.0)
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "superchem", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for i, name in enumerate(SPECIES):
            m, s = stats.mean[i], stats.std[i]
            ax.plot(stats.times, m, color=COLORS[name], label=LABELS[name], lw=1.2)
            ax.fill_between(stats.times, m - s, m + s, color=COLORS[name], alpha=0.25, lw=0)
        ax.axhline(cpt_level, color="k", ls="--", lw=0.9, label="CPT")
        ax.set_xlabel(r"time ($\lambda^{-1}$)")
        ax.set_ylabel("population fraction")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write plot to {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path
