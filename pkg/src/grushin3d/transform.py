"""Sector flattening maps that turn weighted measures into Euclidean ones.

Work inside the first angular sector, theta in (0, pi/n(a)).  Two polar
parametrisations of that wedge are glued into the flattening map:

    polar_to_point:      (r, theta, y)   -> (r cos theta, r sin theta, y)
    polar_to_flat_point: (r, theta, eta) -> (r^{a+1} cos((a+1) theta) / (a+1),
                                             r^{a+1} sin((a+1) theta) / (a+1), eta)

Composing the second with the inverse of the first gives ``flatten_point``;
it sends the sector onto the wider wedge of opening (a+1) pi / n(a), maps
the reference ball sector onto the Euclidean unit-ball wedge, and satisfies

    vol_w(E) = |flatten(E)|        (Lebesgue volume),
    relative weighted perimeter of E = Euclidean area of flatten(bd E)

for sets E contained in the closed sector.  ``unflatten_point`` is its
inverse; round trips are exact to ~1e-12.

Composition-order note: the flattening direction is the map that composes
"flat polar" after "inverse cartesian polar", acting on points of the
original sector.  Both directions are exported so callers never have to
guess the convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import (
    ImplicitShape,
    QuadratureConfig,
    _as_alpha,
    sector_index,
    sector_perimeter,
    voxel_integral,
    weighted_volume,
)

__all__ = [
    "PolarTriple",
    "polar_to_point",
    "polar_to_flat_point",
    "flatten_point",
    "unflatten_point",
    "flatten_shape",
    "PushforwardReport",
    "pushforward_volume_check",
    "pushforward_perimeter_check",
]


@dataclass(frozen=True)
class PolarTriple:
    """Polar coordinates (r, theta, y) of a first-sector point."""

    r: float
    theta: float
    y: float

    def validate(self, alpha) -> "PolarTriple":
        ap = _as_alpha(alpha)
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not 0.0 < self.theta < ap.sector_width:
            raise DomainError(
                f"theta={self.theta} outside the open sector (0, {ap.sector_width})"
            )
        return self


def polar_to_point(t: PolarTriple) -> np.ndarray:
    """Cartesian point of the polar triple (the wedge parametrisation)."""
    return np.array([t.r * np.cos(t.theta), t.r * np.sin(t.theta), t.y])


def polar_to_flat_point(t: PolarTriple, alpha) -> np.ndarray:
    """Point of the flattened wedge assigned to the polar triple."""
    ap = _as_alpha(alpha)
    a = ap.alpha
    rad = t.r ** (a + 1.0) / (a + 1.0)
    ang = (a + 1.0) * t.theta
    return np.array([rad * np.cos(ang), rad * np.sin(ang), t.y])


def _split_polar(pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    return pts, r, theta


def flatten_point(p, alpha, check_sector: bool = True):
    """Measure-flattening map on (arrays of) first-sector points."""
    ap = _as_alpha(alpha)
    a = ap.alpha
    pts, r, theta = _split_polar(p)
    if check_sector and np.any(sector_index(pts, ap) != 1):
        raise DomainError("point not strictly inside the first sector")
    rad = r ** (a + 1.0) / (a + 1.0)
    ang = (a + 1.0) * theta
    out = np.column_stack([rad * np.cos(ang), rad * np.sin(ang), pts[:, 2]])
    return out[0] if np.asarray(p).ndim == 1 else out

def unflatten_point(p, alpha, check_sector: bool = True):
    """Inverse of flatten_point, defined on the flattened wedge."""
    ap = _as_alpha(alpha)
    a = ap.alpha
    pts, rad, ang = _split_polar(p)
    if check_sector:
        width = (a + 1.0) * ap.sector_width
        bad = (rad <= 0) | (ang <= 0) | (ang >= width)
        if np.any(bad):
            raise DomainError("point not strictly inside the flattened wedge")
    r = ((a + 1.0) * rad) ** (1.0 / (a + 1.0))
    theta = ang / (a + 1.0)
    out = np.column_stack([r * np.cos(theta), r * np.sin(theta), pts[:, 2]])
    return out[0] if np.asarray(p).ndim == 1 else out


def flatten_shape(shape: ImplicitShape, alpha) -> ImplicitShape:
    """Implicit description of the flattened image of a first-sector shape."""
    ap = _as_alpha(alpha)
    a = ap.alpha
    level = shape.level

    def flat_level(pts):
        pts = np.asarray(pts, dtype=float)
        rad = np.hypot(pts[..., 0], pts[..., 1])
        ang = np.mod(np.arctan2(pts[..., 1], pts[..., 0]), 2.0 * np.pi)
        r = ((a + 1.0) * rad) ** (1.0 / (a + 1.0))
        theta = ang / (a + 1.0)
        orig = np.stack(
            [r * np.cos(theta), r * np.sin(theta), pts[..., 2]], axis=-1
        )
        vals = level(orig)
        # outside the image wedge nothing is inside the image shape
        outside = (ang <= 0.0) | (ang >= (a + 1.0) * ap.sector_width)
        return np.where(outside, np.maximum(vals, 1.0), vals)

    rx = float(np.max(np.abs(shape.bbox[0]))), float(np.max(np.abs(shape.bbox[1])))
    rmax = np.hypot(*rx) ** (a + 1.0) / (a + 1.0)
    pad = 1.0239 * rmax
    # the image wedge lies in {xi2 >= 0}; putting that wall exactly on the
    # bbox face keeps the voxel classification bias-free along it
    bbox = np.array([(-pad, pad), (0.0, pad), tuple(shape.bbox[2])])
    return ImplicitShape(flat_level, bbox, name=f"flat({shape.name})")


@dataclass(frozen=True)
class PushforwardReport:
    weighted: float
    euclidean: float
    rel_gap: float


def _gap(a, b, eps=1e-300):
    return abs(a - b) / max(abs(a), abs(b), eps)


def pushforward_volume_check(
    shape: ImplicitShape, alpha, cfg: QuadratureConfig = QuadratureConfig()
) -> PushforwardReport:
    """Compare vol_w(E) with the Lebesgue volume of the flattened image."""
    _require_in_sector(shape, alpha)
    weighted = weighted_volume(shape, alpha, cfg)
    flat = flatten_shape(shape, alpha)
    euclidean = voxel_integral(flat.level, flat.bbox, lambda x1, x2: np.ones_like(x1 + x2), cfg)
    if weighted == 0.0 and euclidean == 0.0:
        return PushforwardReport(0.0, 0.0, 0.0)
    return PushforwardReport(weighted, euclidean, _gap(weighted, euclidean))


def pushforward_perimeter_check(
    shape: ImplicitShape, alpha, cfg: QuadratureConfig = QuadratureConfig()
) -> PushforwardReport:
    """Compare the relative weighted perimeter with the flattened Euclidean area.

    The Euclidean side pushes the shape's analytic patches through the
    flattening map and measures their area with finite-difference tangents,
    an independent route from the weighted-integrand quadrature.
    """
    ap = _as_alpha(alpha)
    _require_in_sector(shape, ap)
    weighted = sector_perimeter(shape, ap, 1, cfg)
    if not shape.patches:
        raise DomainError("perimeter pushforward requires analytic patches")

    total = 0.0
    m = cfg.surface_resolution
    for patch in shape.patches:
        st, dst = patch.midpoint_nodes(m)
        pts = patch.param(st)
        keep = sector_index(pts, ap) == 1
        if not keep.any():
            continue
        st = st[keep]
        hs = (patch.s_range[1] - patch.s_range[0]) / m * 1e-4
        ht = (patch.t_range[1] - patch.t_range[0]) / m * 1e-4

        def image(st_):
            return flatten_point(patch.param(st_), ap, check_sector=False)

        ds = (image(st + [hs, 0.0]) - image(st - [hs, 0.0])) / (2 * hs)
        dt = (image(st + [0.0, ht]) - image(st - [0.0, ht])) / (2 * ht)
        total += float(np.sum(np.linalg.norm(np.cross(ds, dt), axis=1))) * dst

    if weighted == 0.0 and total == 0.0:
        return PushforwardReport(0.0, 0.0, 0.0)
    return PushforwardReport(weighted, total, _gap(weighted, total))


def _require_in_sector(shape: ImplicitShape, alpha, samples: int = 17) -> None:
    """Sampled containment check: inside points must lie in the closed sector."""
    ap = _as_alpha(alpha)
    axes = [np.linspace(a, b, samples) for a, b in shape.bbox]
    G1, G2, G3 = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([G1.ravel(), G2.ravel(), G3.ravel()])
    inside = pts[shape.level(pts) < 0]
    if len(inside) == 0:
        return
    theta = np.mod(np.arctan2(inside[:, 1], inside[:, 0]), 2.0 * np.pi)
    if np.any(theta > ap.sector_width * (1 + 1e-9)):
        raise DomainError(f"shape {shape.name!r} is not contained in the first sector")
