"""Static SVG rendering of a tracking run over the target level curve."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .field import FieldModel, _value

CONTOUR_GRID = 401
ARROW_COUNT = 24


def render_svg(cols: dict[str, np.ndarray], field: FieldModel, z_d: float, path,
               title: str | None = None) -> None:
    """Write an SVG showing the ``z_d`` contour, the center path and ``n`` arrows.

    The contour is traced by matplotlib's marching-squares contouring on a
    401 x 401 grid over the field's domain box, so it is clipped to the box.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if cols["step"].size == 0:
        raise ValueError("empty trajectory")
    (x0, x1), (y0, y1) = field.domain_box
    xs = np.linspace(x0, x1, CONTOUR_GRID)
    ys = np.linspace(y0, y1, CONTOUR_GRID)
    X, Y = np.meshgrid(xs, ys)
    Z = _value(field, X, Y)

    fig, ax = plt.subplots(figsize=(6, 6))
    if Z.min() <= z_d <= Z.max():
        ax.contour(X, Y, Z, levels=[z_d], colors="tab:gray", linewidths=1.2)
    rcx, rcy = cols["rcx"], cols["rcy"]
    ax.plot(rcx, rcy, color="black", linewidth=0.8, label="formation center")
    ax.plot(cols["r1x"][0], cols["r1y"][0], "o", color="tab:red", label="agent 1")
    ax.plot(cols["r2x"][0], cols["r2y"][0], "o", color="tab:blue", label="agent 2")
    ax.plot(cols["r1x"][-1], cols["r1y"][-1], "s", color="tab:red", mfc="none")
    ax.plot(cols["r2x"][-1], cols["r2y"][-1], "s", color="tab:blue", mfc="none")

    idx = np.unique(np.linspace(0, rcx.size - 1, min(ARROW_COUNT, rcx.size)).astype(int))
    dx = cols["r2x"][idx] - cols["r1x"][idx]
    dy = cols["r2y"][idx] - cols["r1y"][idx]
    s = np.hypot(dx, dy)
    s[s == 0] = 1.0
    nx, ny = -dy / s, dx / s
    ax.quiver(rcx[idx], rcy[idx], nx, ny, color="tab:green", angles="xy", width=0.004,
              label="n direction")

    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"tracking z_d = {z_d:g}")
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(Path(path), format="svg")
    plt.close(fig)
