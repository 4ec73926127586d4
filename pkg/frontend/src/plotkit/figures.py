"""Figure kinds: 3D gallery, distance-to-axis profile, coordinate projection."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import FormatError, TrajectoryData, read_trajectory  # noqa: E402

KINDS = ("gallery3d", "distance_profile", "projection")

COLOR_NEG = "tab:blue"   # end with s < 0
COLOR_POS = "tab:red"    # end with s >= 0
SAVE = {"dpi": 150, "metadata": {"Software": "plotkit"}}


@dataclass
class RenderResult:
    output: Path
    kind: str
    inputs: list
    extras: dict = field(default_factory=dict)


def count_interior_minima(w) -> int:
    """Strict interior local minima, plateaus collapsed."""
    d = np.sign(np.diff(np.asarray(w, float)))
    d = d[d != 0]
    if d.size < 2:
        return 0
    return int(np.sum((d[:-1] < 0) & (d[1:] > 0)))


def _coords(X, axes):
    X = np.asarray(X, float)
    out = np.zeros((X.shape[0], len(axes)))
    for k, j in enumerate(axes):
        if j >= X.shape[1]:
            raise FormatError(f"projection axis {j} out of range for n={X.shape[1]}")
        out[:, k] = X[:, j]
    return out


def _plot_ends(ax, s, P, label=None):
    # one polyline per sign of s so the two ends get distinct colors
    neg, pos = s < 0.0, s >= 0.0
    dim = P.shape[1]
    for mask, color in ((neg, COLOR_NEG), (pos, COLOR_POS)):
        if not np.any(mask):
            continue
        # keep the curve visually connected across s = 0
        idx = np.flatnonzero(mask)
        lo, hi = max(idx[0] - 1, 0), min(idx[-1] + 2, len(s))
        seg = P[lo:hi]
        args = (seg[:, 0], seg[:, 1]) if dim == 2 else (seg[:, 0], seg[:, 1], seg[:, 2])
        ax.plot(*args, color=color, lw=1.0, label=label if color == COLOR_POS else None)


def _fig_gallery3d(trajs, spec):
    fig = plt.figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    for tr in trajs:
        P = np.zeros((tr.C.shape[0], 3))
        P[:, : min(tr.n, 3)] = tr.C[:, :3]
        _plot_ends(ax, tr.s, P, label=tr.path.stem)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_zlabel("x3")
    ax.set_title(spec.get("title", "soliton gallery"))
    if len(trajs) > 1:
        ax.legend(loc="upper left", fontsize=7)
    return fig, {}


def _fig_distance_profile(trajs, spec):
    tr = trajs[0]
    # delta_W = half the squared distance to the rotation axis
    w = np.sqrt(np.maximum(2.0 * tr.scalars["delta_W"], 0.0))
    minima = count_interior_minima(w)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(tr.s, w, color="black", lw=1.2)
    ax.set_xlabel("arc length s")
    ax.set_ylabel("distance to rotation axis")
    ax.set_title(spec.get("title", f"axis distance ({minima} interior minimum{'s' if minima != 1 else ''})"))
    ax.grid(True, alpha=0.3)
    return fig, {"minima": minima}


def _fig_projection(trajs, spec):
    tr = trajs[0]
    axes = spec.get("projection", list(range(min(tr.n, 3))))
    if len(axes) not in (2, 3):
        raise FormatError("projection needs 2 or 3 axes")
    P = _coords(tr.C, axes)
    fig = plt.figure(figsize=(6.0, 6.0))
    if len(axes) == 3:
        ax = fig.add_subplot(projection="3d")
        ax.set_zlabel(f"x{axes[2] + 1}")
    else:
        ax = fig.add_subplot()
        ax.set_aspect("equal", adjustable="datalim")
    _plot_ends(ax, tr.s, P)
    ax.set_xlabel(f"x{axes[0] + 1}")
    ax.set_ylabel(f"x{axes[1] + 1}")
    ax.set_title(spec.get("title", "projection"))
    zoom = spec.get("zoom")
    if zoom is not None and len(axes) == 2:
        cx, cy = (float(v) for v in zoom["center"])
        h = float(zoom["half_width"])
        ins = ax.inset_axes([0.58, 0.58, 0.38, 0.38])
        _plot_ends(ins, tr.s, P)
        ins.set_xlim(cx - h, cx + h)
        ins.set_ylim(cy - h, cy + h)
        ins.set_xticks([])
        ins.set_yticks([])
        ax.indicate_inset_zoom(ins, edgecolor="gray")
    return fig, {}


_BUILDERS = {
    "gallery3d": _fig_gallery3d,
    "distance_profile": _fig_distance_profile,
    "projection": _fig_projection,
}


def render(spec: dict) -> RenderResult:
    kind = spec.get("kind")
    if kind not in KINDS:
        raise FormatError(f"kind must be one of {KINDS}, got {kind!r}")
    inputs = spec.get("inputs")
    if not inputs:
        raise FormatError("spec needs a non-empty inputs list")
    output = spec.get("output")
    if not output:
        raise FormatError("spec needs an output path")
    trajs = [read_trajectory(p) for p in inputs]
    fig, extras = _BUILDERS[kind](trajs, spec)
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **SAVE)
    plt.close(fig)
    return RenderResult(output=out, kind=kind, inputs=[t.path for t in trajs], extras=extras)
