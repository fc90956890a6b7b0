"""The four figure kinds.

Everything renders through the Agg backend straight to a file; nothing
here opens a window. Color scales are computed from the data once and
shared across panels, so a reference/estimate pair always gets one
colorbar (and identical inputs produce identical panels).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .readers import read_ensf1, read_series_csv  # noqa: E402

KINDS = ("contour", "surface", "series", "overlay")

# inputs each kind accepts: (min, max)
_ARITY = {"contour": (1, 2), "surface": (1, 1), "series": (1, 1), "overlay": (2, 8)}

_LEVELS = 21  # contour quantization; panel pairs share the same level set


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    out: str
    labels: tuple = ()
    column: str = "rmse"  # overlay only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("kind must be one of %s, got %r" % (", ".join(KINDS), self.kind))
        inputs = tuple(str(p) for p in self.inputs)
        lo, hi = _ARITY[self.kind]
        if not (lo <= len(inputs) <= hi):
            raise ValueError(
                "%s takes %d to %d inputs, got %d" % (self.kind, lo, hi, len(inputs))
            )
        for p in inputs:
            if not os.path.exists(p):
                raise ValueError("input does not exist: %s" % p)
        labels = tuple(str(s) for s in self.labels)
        if labels and len(labels) != len(inputs):
            raise ValueError("%d labels for %d inputs" % (len(labels), len(inputs)))
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)


def _default_labels(paths):
    stems = [os.path.splitext(os.path.basename(p))[0] for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    # runs all name the file diagnostics.csv; fall back to the run dir
    return [
        os.path.join(os.path.basename(os.path.dirname(p)), s) for p, s in zip(paths, stems)
    ]


def _panel_scalar(path):
    """A single 2-D field per snapshot: the stored array, or the speed
    magnitude averaged to cell centers for velocity snapshots."""
    snap = read_ensf1(path)
    if snap.variant == "ns":
        u, v = snap.arrays[0], snap.arrays[1]
        if u.ndim != 2 or v.ndim != 2:
            raise ValueError("%s: velocity arrays must be 2-d" % path)
        # channel walls store one extra v row; trim to the cell count
        v = v[:, : u.shape[1]]
        uc = 0.5 * (u + np.roll(u, -1, axis=0))
        vc = 0.5 * (v + np.roll(v, -1, axis=1))
        return np.hypot(uc, vc), snap.time
    a = snap.arrays[0]
    if a.ndim != 2:
        raise ValueError("%s: expected a 2-d field, got rank %d" % (path, a.ndim))
    return a, snap.time


def _mesh(shape):
    # snapshots carry no domain extent; draw on the unit square
    x = (np.arange(shape[0]) + 0.5) / shape[0]
    y = (np.arange(shape[1]) + 0.5) / shape[1]
    return np.meshgrid(x, y, indexing="ij")


def _contour_figure(spec):
    panels = []
    for p in spec.inputs:
        f, t = _panel_scalar(p)
        panels.append((f, t))
    shapes = {f.shape for f, _ in panels}
    if len(shapes) > 1:
        raise ValueError(
            "field shapes differ: "
            + "; ".join("%s is %s" % (p, f.shape) for p, (f, _) in zip(spec.inputs, panels))
        )
    lo = min(float(f.min()) for f, _ in panels)
    hi = max(float(f.max()) for f, _ in panels)
    if hi <= lo:
        hi = lo + 1.0
    levels = np.linspace(lo, hi, _LEVELS)

    labels = spec.labels or _default_labels(spec.inputs)
    n = len(panels)
    fig, axes = plt.subplots(1, n, figsize=(5.0 * n, 4.2), layout="constrained",
                             squeeze=False)
    mappable = None
    for ax, (f, t), lab in zip(axes[0], panels, labels):
        x, y = _mesh(f.shape)
        mappable = ax.contourf(x, y, f, levels=levels, cmap="viridis")
        ax.set_title("%s  (t=%.4g)" % (lab, t))
        ax.set_aspect("equal")
    fig.colorbar(mappable, ax=axes[0], shrink=0.9)
    return fig, axes[0]


def _surface_figure(spec):
    f, t = _panel_scalar(spec.inputs[0])
    x, y = _mesh(f.shape)
    fig = plt.figure(figsize=(6.4, 5.0))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(x, y, f, cmap="viridis", linewidth=0, antialiased=False)
    label = (spec.labels or _default_labels(spec.inputs))[0]
    ax.set_title("%s  (t=%.4g)" % (label, t))
    return fig, [ax]


def _series_figure(spec):
    table = read_series_csv(spec.inputs[0])
    t = table["time"]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    for name, vals in table.items():
        if name in ("step", "time"):
            continue
        ax.plot(t, vals, label=name)
    ax.set_xlabel("time")
    ax.legend()
    label = (spec.labels or _default_labels(spec.inputs))[0]
    ax.set_title(label)
    return fig, [ax]


def _overlay_figure(spec):
    labels = spec.labels or _default_labels(spec.inputs)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    for p, lab in zip(spec.inputs, labels):
        table = read_series_csv(p)
        if spec.column not in table:
            raise ValueError("%s has no %r column" % (p, spec.column))
        ax.plot(table["time"], table[spec.column], label=lab)
    ax.set_xlabel("time")
    ax.set_ylabel(spec.column)
    ax.legend()
    return fig, [ax]


_BUILDERS = {
    "contour": _contour_figure,
    "surface": _surface_figure,
    "series": _series_figure,
    "overlay": _overlay_figure,
}


def render(spec: FigureSpec) -> str:
    """Draw the figure and write it to spec.out; returns spec.out."""
    fig, _ = _BUILDERS[spec.kind](spec)
    try:
        fig.savefig(spec.out, dpi=150)
    finally:
        plt.close(fig)
    return spec.out
