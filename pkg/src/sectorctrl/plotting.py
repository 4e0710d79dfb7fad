"""Optional figures for suite reports."""
from __future__ import annotations

import numpy as np


def plot_report(report, path: str) -> str:
    """Per-case distance spread on a log axis with the tolerance marked."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cases = report.cases
    floor = 1e-17
    fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(cases) + 2), 4.0))
    for i, c in enumerate(cases):
        vals = np.maximum(np.abs(np.asarray(c.values, dtype=float)), floor)
        if vals.size == 0:
            continue
        jitter = np.linspace(-0.15, 0.15, vals.size) if vals.size > 1 else np.zeros(1)
        ax.scatter(i + jitter, vals, s=6, color="tab:blue" if c.passed else "tab:red")
    ax.axhline(report.config.tol, color="gray", ls="--", lw=1, label=f"tol {report.config.tol:g}")
    ax.set_yscale("log")
    ax.set_xticks(range(len(cases)))
    ax.set_xticklabels([c.name for c in cases], rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("distance")
    ax.set_title(report.config.suite)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
