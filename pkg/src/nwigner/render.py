"""Heatmaps with a zero-centred diverging colour scale (blue negative, red positive)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib import colormaps
from PIL import Image

from .errors import BadAxis, BadDimension
from .io import dump_json
from .wigner import WignerGrid

CMAP = "RdBu_r"

__all__ = ["plane_of", "colorize", "render_heatmap", "CMAP"]


def plane_of(grid: WignerGrid, slice_axis: int | None = None, slice_index: int | None = None,
             integrate_axis: int | None = None):
    """Reduce a grid to a 2D array plus its two remaining axes.

    Three-dimensional grids need either an axis-aligned slice or an axis to
    integrate out.
    """
    if grid.n == 2:
        return grid.values, grid.spec.axes
    if grid.n != 3:
        raise BadDimension(f"cannot render an {grid.n}-dimensional grid")
    if (slice_axis is None) == (integrate_axis is None):
        raise BadDimension("a 3D grid needs exactly one of slice_axis or integrate_axis")
    axis = slice_axis if slice_axis is not None else integrate_axis
    if not 0 <= axis < 3:
        raise BadAxis(f"axis {axis} out of range")
    keep = tuple(ax for k, ax in enumerate(grid.spec.axes) if k != axis)
    if integrate_axis is not None:
        return grid.values.sum(axis=axis) * grid.spec.axes[axis].step, keep
    idx = grid.spec.axes[axis].count // 2 if slice_index is None else slice_index
    return np.take(grid.values, idx, axis=axis), keep


def colorize(values, vmax: float | None = None) -> tuple[np.ndarray, float]:
    """RGB bytes for ``values`` on a scale symmetric about zero (white = 0)."""
    values = np.asarray(values, dtype=float)
    if vmax is None:
        vmax = float(np.max(np.abs(values))) if values.size else 0.0
    scale = vmax if vmax > 0 else 1.0
    normed = np.clip(0.5 + 0.5 * values / scale, 0.0, 1.0)
    rgba = colormaps[CMAP](normed, bytes=True)
    return rgba[..., :3], vmax


def render_heatmap(grid: WignerGrid, path, slice_axis=None, slice_index=None, integrate_axis=None,
                   upscale: int = 1) -> dict:
    """Write a PNG heatmap and a ``<image>.json`` sidecar with the colour limits.

    The first remaining axis runs left to right, the second bottom to top.
    """
    plane, axes = plane_of(grid, slice_axis, slice_index, integrate_axis)
    rgb, vmax = colorize(plane)
    img = np.ascontiguousarray(np.transpose(rgb, (1, 0, 2))[::-1])
    if upscale > 1:
        img = np.repeat(np.repeat(img, upscale, axis=0), upscale, axis=1)
    path = Path(path)
    Image.fromarray(img, mode="RGB").save(path, format="PNG")
    meta = {
        "image": path.name,
        "colormap": CMAP,
        "vmin": -vmax,
        "vmax": vmax,
        "horizontal": {"min": axes[0].min, "max": axes[0].max, "count": axes[0].count},
        "vertical": {"min": axes[1].min, "max": axes[1].max, "count": axes[1].count},
        "slice_axis": slice_axis,
        "slice_index": slice_index,
        "integrate_axis": integrate_axis,
    }
    dump_json(meta, path.with_name(path.name + ".json"))
    return meta
