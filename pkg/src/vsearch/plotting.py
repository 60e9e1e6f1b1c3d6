"""Static SVG rendering of result curves (CSV remains the source of truth)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .analysis import RTCurve  # noqa: E402

__all__ = ["plot_curves_svg"]


def plot_curves_svg(curves: list[RTCurve], title: str, path: str) -> None:
    """Mean RT vs set size with SEM error bars, one polyline per condition."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for curve in curves:
        ax.errorbar(curve.set_sizes, curve.mean_rt, yerr=curve.sem,
                    marker="o", capsize=3, label=curve.condition)
    ax.set_xlabel("set size")
    ax.set_ylabel("mean RT (model iterations)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
