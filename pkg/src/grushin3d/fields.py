"""Grid-function corpus: radial profiles, sector grids, random bumps.

These builders feed the rearrangement, Sobolev and embedding checks.  All
randomness is seeded, so corpora are reproducible.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import _as_alpha, sector_index
from .grids import GridFunction3D
from .rearrangement import anisotropic_radius

__all__ = [
    "compact_bump",
    "cosine_bump",
    "radial_field",
    "sector_extremal_grid",
    "random_bump_corpus",
]


def compact_bump(rho):
    """Smooth compactly supported profile exp(-rho^2/(1-rho^2)) on rho < 1."""
    rho = np.asarray(rho, dtype=float)
    inside = np.abs(rho) < 1.0
    out = np.zeros_like(rho)
    r2 = np.clip(rho[inside] ** 2, 0.0, 1.0 - 1e-15)
    out[inside] = np.exp(-r2 / (1.0 - r2))
    return out


def cosine_bump(rho):
    """cos(pi rho / 2)^2 on rho < 1; C1 across the support edge and with
    mild curvature, so grid energies converge fast."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    m = np.abs(rho) < 1.0
    out[m] = np.cos(np.pi * rho[m] / 2.0) ** 2
    return out


def radial_field(profile, alpha, support_radius: float, resolution: int = 96, pad: float = 1.12) -> GridFunction3D:
    """u(x, y) = profile(r / support_radius) on a box holding {r < radius}.

    ``profile`` takes the normalised radius rho in [0, 1]; values beyond
    the support are zero.  The box is the smallest axis-aligned one around
    the anisotropic ball, slightly padded.
    """
    ap = _as_alpha(alpha)
    a = ap.alpha
    rx = support_radius ** (1.0 / (a + 1.0)) * pad
    ry = support_radius / (a + 1.0) * pad
    bbox = np.array([(-rx, rx), (-rx, rx), (-ry, ry)])

    def fn(X1, X2, Y):
        r = anisotropic_radius(X1, X2, Y, ap)
        return profile(r / support_radius)

    return GridFunction3D.from_callable(fn, bbox, (resolution, resolution, resolution))


def sector_extremal_grid(
    alpha,
    b: float = 4.0,
    truncation_radius: float = 20.0,
    resolution: int = 128,
    a: float = 1.0,
    perturbation: Sequence[float] = (),
    perturbation_size: float = 0.05,
) -> GridFunction3D:
    """Truncated radial extremal sampled on a first-sector grid.

    u = (a + b r^2)^{-1/2} - (a + b R^2)^{-1/2}, clipped at zero beyond the
    truncation radius R; the grid covers the sector's bounding box and the
    mask keeps cells whose centres lie strictly inside the sector, so the
    Rayleigh quotient approximates the sector quotient of the profile.
    Optional perturbation coefficients c_i multiply by (1 + s c_i g_i) with
    smooth bump factors g_i, to probe non-extremal directions.
    """
    ap = _as_alpha(alpha)
    aa = ap.alpha
    R = float(truncation_radius)
    rx = R ** (1.0 / (aa + 1.0))
    ry = R / (aa + 1.0)
    width = ap.sector_width
    x2max = rx * math.sin(width) if width < math.pi / 2 else rx
    bbox = np.array([(0.0, rx), (0.0, x2max), (-ry, ry)])
    n = int(resolution)
    hs = (bbox[:, 1] - bbox[:, 0]) / n
    axes = [bbox[i, 0] + (np.arange(n) + 0.5) * hs[i] for i in range(3)]
    X1, X2, Y = np.meshgrid(*axes, indexing="ij")
    r = anisotropic_radius(X1, X2, Y, ap)
    shift = (a + b * R * R) ** -0.5
    u = np.maximum((a + b * r * r) ** -0.5 - shift, 0.0)
    for i, c in enumerate(perturbation):
        if c == 0.0:
            continue
        g = np.sin((i + 1) * np.pi * np.clip(r / R, 0.0, 1.0)) * compact_bump(r / R)
        u = u * (1.0 + perturbation_size * c * g)
    pts = np.stack([X1, X2, Y], axis=-1).reshape(-1, 3)
    mask = (sector_index(pts, ap) == 1).reshape(u.shape)
    return GridFunction3D(bbox, u, mask)


def random_bump_corpus(
    count: int,
    alpha,
    resolution: int = 64,
    seed: int = 20250809,
    bumps_per_field: int = 3,
    bbox_half: float = 1.0,
) -> list[GridFunction3D]:
    """Deterministic corpus of nonnegative smooth compactly supported fields.

    Each field is a sum of a few positive bumps with random centres, widths
    and amplitudes, supported strictly inside the box.
    """
    rng = np.random.default_rng(seed)
    bbox = np.array([(-bbox_half, bbox_half)] * 3)
    n = int(resolution)
    hs = (bbox[:, 1] - bbox[:, 0]) / n
    axes = [bbox[i, 0] + (np.arange(n) + 0.5) * hs[i] for i in range(3)]
    X1, X2, Y = np.meshgrid(*axes, indexing="ij")
    out = []
    for _ in range(count):
        u = np.zeros_like(X1)
        for _ in range(bumps_per_field):
            ctr = rng.uniform(-0.45 * bbox_half, 0.45 * bbox_half, size=3)
            width = rng.uniform(0.18, 0.4) * bbox_half
            amp = rng.uniform(0.3, 1.0)
            rho = np.sqrt((X1 - ctr[0]) ** 2 + (X2 - ctr[1]) ** 2 + (Y - ctr[2]) ** 2) / (
                2.2 * width
            )
            u += amp * compact_bump(rho)
        out.append(GridFunction3D(bbox, u))
    return out
