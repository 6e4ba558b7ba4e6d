"""Scalar fields on uniform cell-centred grids, plus their text format.

A GridFunction3D holds values at cell centres of a uniform axis-aligned
grid, ordered [i, j, k] for (x1, x2, y), with an optional mask of active
cells.  Functions meant as compactly supported test functions should be
zero outside the mask; fields that merely restrict a smooth function to a
region (e.g. a sector) may keep smooth values everywhere and let the mask
gate integration.

Text format (version 1):

    grushin-grid v1
    n1 n2 n3
    x1min x1max x2min x2max ymin ymax
    v(0,0,0) v(1,0,0) ... v(n1-1,0,0) v(0,1,0) ...   # x1 fastest, then x2, then y

All numbers are written with 17 significant digits so a write/read round
trip is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, GridFormatError

__all__ = ["GridFunction3D", "load_grid", "save_grid", "resample", "GRID_MAGIC"]

GRID_MAGIC = "grushin-grid v1"


@dataclass
class GridFunction3D:
    bbox: np.ndarray  # (3, 2)
    values: np.ndarray  # (n1, n2, n3)
    mask: Optional[np.ndarray] = None  # bool, same shape; None = all active

    def __post_init__(self):
        self.bbox = np.asarray(self.bbox, dtype=float).reshape(3, 2)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise DomainError("values must be a 3D array")
        if not np.all(self.bbox[:, 1] > self.bbox[:, 0]):
            raise DomainError("degenerate bbox")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.values.shape:
                raise DomainError("mask shape must match values shape")

    @property
    def dims(self):
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return (self.bbox[:, 1] - self.bbox[:, 0]) / np.array(self.dims)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return self.bbox[axis, 0] + (np.arange(self.dims[axis]) + 0.5) * h

    def weight2d(self, alpha: float) -> np.ndarray:
        """|x|^{2*alpha} at cell centres; constant along the y axis."""
        x1 = self.axis_centers(0)
        x2 = self.axis_centers(1)
        return (x1[:, None] ** 2 + x2[None, :] ** 2) ** alpha

    def active(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.dims, dtype=bool)
        return self.mask

    def masked_values(self) -> np.ndarray:
        if self.mask is None:
            return self.values
        return np.where(self.mask, self.values, 0.0)

    @classmethod
    def from_callable(cls, fn, bbox, dims, mask=None) -> "GridFunction3D":
        bbox = np.asarray(bbox, dtype=float).reshape(3, 2)
        dims = tuple(int(d) for d in dims)
        hs = (bbox[:, 1] - bbox[:, 0]) / np.array(dims)
        axes = [bbox[i, 0] + (np.arange(dims[i]) + 0.5) * hs[i] for i in range(3)]
        X1, X2, Y = np.meshgrid(*axes, indexing="ij")
        return cls(bbox, np.asarray(fn(X1, X2, Y), dtype=float), mask)


def resample(grid: GridFunction3D, dims, bbox=None) -> GridFunction3D:
    """Trilinear resampling onto a new cell-centred grid (zero outside)."""
    from scipy.interpolate import RegularGridInterpolator

    bbox = grid.bbox if bbox is None else np.asarray(bbox, dtype=float).reshape(3, 2)
    interp = RegularGridInterpolator(
        tuple(grid.axis_centers(ax) for ax in range(3)),
        grid.values,
        bounds_error=False,
        fill_value=0.0,
    )
    dims = tuple(int(d) for d in dims)
    hs = (bbox[:, 1] - bbox[:, 0]) / np.array(dims)
    axes = [bbox[i, 0] + (np.arange(dims[i]) + 0.5) * hs[i] for i in range(3)]
    X1, X2, Y = np.meshgrid(*axes, indexing="ij")
    vals = interp(np.column_stack([X1.ravel(), X2.ravel(), Y.ravel()])).reshape(dims)
    return GridFunction3D(bbox, vals)


def save_grid(grid: GridFunction3D, path) -> None:
    n1, n2, n3 = grid.dims
    flat = grid.values.ravel(order="F")  # x1 fastest, then x2, then y
    with open(path, "w") as fh:
        fh.write(GRID_MAGIC + "\n")
        fh.write(f"{n1} {n2} {n3}\n")
        fh.write(" ".join(f"{v:.17g}" for v in grid.bbox.ravel()) + "\n")
        for start in range(0, flat.size, n1):
            fh.write(" ".join(f"{v:.17g}" for v in flat[start : start + n1]) + "\n")


def load_grid(path) -> GridFunction3D:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != GRID_MAGIC:
        raise GridFormatError(f"expected header {GRID_MAGIC!r}", line=1)
    if len(lines) < 3:
        raise GridFormatError("missing dimensions / bbox lines", line=len(lines))
    try:
        dims = tuple(int(tok) for tok in lines[1].split())
    except ValueError:
        raise GridFormatError("dimensions must be integers", line=2) from None
    if len(dims) != 3 or min(dims) < 1:
        raise GridFormatError("need three positive dimensions", line=2)
    try:
        bvals = [float(tok) for tok in lines[2].split()]
    except ValueError:
        raise GridFormatError("bbox entries must be numbers", line=3) from None
    if len(bvals) != 6:
        raise GridFormatError("bbox needs six numbers", line=3)
    bbox = np.array(bvals).reshape(3, 2)
    if not np.all(bbox[:, 1] > bbox[:, 0]):
        raise GridFormatError("bbox is degenerate", line=3)

    total = dims[0] * dims[1] * dims[2]
    vals = np.empty(total)
    count = 0
    for lineno, line in enumerate(lines[3:], start=4):
        toks = line.split()
        if not toks:
            continue
        if count + len(toks) > total:
            raise GridFormatError("more values than n1*n2*n3", line=lineno)
        try:
            vals[count : count + len(toks)] = [float(t) for t in toks]
        except ValueError:
            raise GridFormatError("malformed value", line=lineno) from None
        if not np.all(np.isfinite(vals[count : count + len(toks)])):
            raise GridFormatError("non-finite value", line=lineno)
        count += len(toks)
    if count != total:
        raise GridFormatError(
            f"expected {total} values, found {count}", line=len(lines)
        )
    return GridFunction3D(bbox, vals.reshape(dims, order="F"))
