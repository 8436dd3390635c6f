"""Log-log SVG plots with fitted slopes."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import EmptySeries  # noqa: E402
from .reporting import atomic_write  # noqa: E402

SVG_SALT = "liftlab"


def fitted_slope(points):
    """Least-squares slope of ``log y`` against ``log x``; the secant for two points."""
    pts = np.asarray(points, dtype=float)
    return float(np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0])


def _clean(name, points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.all(np.isfinite(pts) & (pts > 0), axis=1)]
    if len(pts) < 2:
        raise EmptySeries(f"series {name!r} has fewer than two positive points")
    return pts


def emit_plot(series, path, title=None, xlabel="x", ylabel="y"):
    """Render ``{name: [(x, y), ...]}`` on log-log axes to an SVG file.

    Each series is one polyline labelled with its fitted slope.  Returns the
    slopes by series name.
    """
    if not series:
        raise EmptySeries("no series to plot")
    cleaned = {name: _clean(name, pts) for name, pts in series.items()}
    slopes = {}
    with plt.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        try:
            for name, pts in cleaned.items():
                k = fitted_slope(pts)
                slopes[name] = k
                ax.plot(pts[:, 0], pts[:, 1], marker="o", ms=3, label=f"{name} (slope {k:.3f})")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            ax.legend(fontsize="small")
            ax.grid(True, which="both", lw=0.3, alpha=0.5)
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    atomic_write(path, buf.getvalue())
    return slopes
