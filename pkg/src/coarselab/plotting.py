"""Log-log SVG figures.  Output is byte-stable for identical input."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "svg.hashsalt": "coarselab",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.6),
}


def loglog_figure(series, path, title: str, xlabel: str, ylabel: str, fits=None, logy: bool = True) -> None:
    """Plot ``{label: (x, y)}`` on log axes and save an SVG.

    ``fits`` maps a label to ``(slope, intercept)`` of a log-log line drawn
    over that series' x range.  Nonpositive points are left out.
    """
    fits = fits or {}
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for label, (x, y) in series.items():
            x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
            keep = (x > 0) & ((y > 0) if logy else np.ones_like(y, dtype=bool))
            if not keep.any():
                continue
            ax.plot(x[keep], y[keep], marker="o", markersize=3, linewidth=1, label=label)
            if label in fits:
                a, b = fits[label]
                xs = np.array([x[keep].min(), x[keep].max()])
                ax.plot(xs, np.exp(b) * xs**a, linestyle="--", linewidth=0.8, color="0.4", label=f"slope {a:.3f}")
        ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if ax.lines:
            ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
