"""Dilation (Pohozaev-type) identity for the degenerate Dirichlet problem.

For a solution u of -Delta_x u - |x|^{2a} u_yy = |x|^{2a} |u|^{p-1} u with
u = 0 on the boundary, multiplying by the anisotropic dilation generator
X . grad u, X = (x1, x2, (1+a) y), and integrating by parts yields

    ((3a+3)/(p+1) - (a+1)/2) int |x|^{2a} |u|^{p+1}
        = 1/2 int_bd (X . nu) (nu1^2 + nu2^2 + |x|^{2a} nu3^2) (du/dnu)^2.

The boundary side is one half of the weighted flux integral; the factor
1/2 is forced by the divergence computation (the alpha = 0 case reduces to
the classical three-dimensional identity) and is confirmed here by the
machine check of the underlying identity on analytic fields.  The left
coefficient vanishes exactly at p = 5 and is negative beyond, so on
domains star-shaped for the anisotropic dilation no nontrivial solution
can exist for p > 5.

Boundary integrals are evaluated on box domains only, where face normals
are exact; the normal derivative uses the second-order one-sided stencil
through the homogeneous boundary value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError
from .geometry import ImplicitShape, QuadratureConfig, _as_alpha
from .grids import GridFunction3D
from .solver import Domain

__all__ = [
    "pohozaev_coefficient",
    "nonexistence_classify",
    "StarShapedReport",
    "star_shaped_check",
    "pohozaev_lhs",
    "pohozaev_rhs",
    "PohozaevReport",
    "pohozaev_residual",
]

CRITICAL_POWER = 5.0


def pohozaev_coefficient(p: float, alpha) -> float:
    """(3a+3)/(p+1) - (a+1)/2; zero exactly at p = 5 for every alpha."""
    if p < 1:
        raise DomainError("p must be >= 1")
    a = _as_alpha(alpha).alpha
    return (3.0 * a + 3.0) / (p + 1.0) - (a + 1.0) / 2.0


def nonexistence_classify(p: float) -> str:
    """subcritical (p < 5), critical (p = 5) or supercritical (p > 5).

    The supercritical verdict carries the nonexistence conclusion on
    star-shaped domains; the artifact reports the regime, it does not
    attempt a numerical nonexistence proof.
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if p < CRITICAL_POWER:
        return "subcritical"
    if p == CRITICAL_POWER:
        return "critical"
    return "supercritical"


@dataclass(frozen=True)
class StarShapedReport:
    verdict: bool
    min_value: float


def star_shaped_check(
    target: Union[ImplicitShape, Domain], alpha, cfg: QuadratureConfig = QuadratureConfig()
) -> StarShapedReport:
    """Evaluate g = x1 nu1 + x2 nu2 + (1+a) y nu3 over the boundary.

    The domain is star-shaped for the anisotropic dilation iff g >= 0
    everywhere on the boundary (and the origin lies inside).
    """
    a = _as_alpha(alpha).alpha
    if isinstance(target, Domain):
        bbox = target.bbox
        gs = []
        for axis in range(3):
            for side, sign in ((0, -1.0), (1, 1.0)):
                coord = bbox[axis, side]
                lo = [bbox[k, 0] for k in range(3) if k != axis]
                hi = [bbox[k, 1] for k in range(3) if k != axis]
                # g is affine per face; extremes occur at face corners
                for c0 in (lo[0], hi[0]):
                    for c1 in (lo[1], hi[1]):
                        pt = np.empty(3)
                        pt[axis] = coord
                        others = [k for k in range(3) if k != axis]
                        pt[others[0]], pt[others[1]] = c0, c1
                        coef = (1.0 + a) if axis == 2 else 1.0
                        gs.append(sign * coef * pt[axis])
        m = float(min(gs))
        return StarShapedReport(m >= -1e-10, m)

    shape = target
    if shape.level(np.zeros((1, 3)))[0] >= 0:
        raise DomainError("star-shapedness is relative to the origin, which must lie inside")
    if not shape.patches:
        raise DomainError("star-shaped check needs analytic patches")
    m = math.inf
    for patch in shape.patches:
        st, _ = patch.midpoint_nodes(cfg.surface_resolution)
        pts = patch.param(st)
        nu = patch.normal(st)
        g = pts[:, 0] * nu[:, 0] + pts[:, 1] * nu[:, 1] + (1.0 + a) * pts[:, 2] * nu[:, 2]
        m = min(m, float(g.min()))
    return StarShapedReport(m >= -1e-10, m)


def pohozaev_lhs(u: GridFunction3D, p: float, alpha) -> float:
    """Coefficient times the weighted interior integral of |u|^{p+1}."""
    ap = _as_alpha(alpha)
    coef = pohozaev_coefficient(p, ap)
    w = u.weight2d(ap.alpha)[:, :, None]
    integral = float(np.sum((w * np.abs(u.values) ** (p + 1.0))[u.active()])) * u.cell_volume
    return coef * integral


def _face_normal_derivative(values: np.ndarray, axis: int, side: int, h: float) -> np.ndarray:
    """Second-order one-sided du/dnu at a Dirichlet face.

    Uses the boundary value 0 at the face plus the first two cell centres
    at distances h/2 and 3h/2: derivative = (9 u1 - u2) / (3 h).
    """
    u1 = np.take(values, 0 if side == 0 else -1, axis=axis)
    u2 = np.take(values, 1 if side == 0 else -2, axis=axis)
    return (9.0 * u1 - u2) / (3.0 * h)


def pohozaev_rhs(u: GridFunction3D, domain: Domain, alpha) -> float:
    """One half of the weighted boundary flux of the solution.

    1/2 int over bd of (X . nu)(nu1^2 + nu2^2 + |x|^{2a} nu3^2) (du/dnu)^2,
    by midpoint quadrature over the box faces.
    """
    if domain.mask is not None:
        raise DomainError("boundary quadrature is defined for box domains only")
    a = _as_alpha(alpha).alpha
    h = domain.spacing
    total = 0.0
    centers = [domain.axis_centers(k) for k in range(3)]
    for axis in range(3):
        others = [k for k in range(3) if k != axis]
        area = float(np.prod([h[k] for k in others]))
        C0, C1 = np.meshgrid(centers[others[0]], centers[others[1]], indexing="ij")
        for side, sign in ((0, -1.0), (1, 1.0)):
            coord = domain.bbox[axis, side]
            dd = _face_normal_derivative(u.values, axis, side, h[axis])
            pt = {axis: coord, others[0]: C0, others[1]: C1}
            if axis == 2:
                g = (1.0 + a) * pt[2] * sign
                wmag = (pt[0] ** 2 + pt[1] ** 2) ** a
            else:
                g = pt[axis] * sign
                wmag = 1.0
            total += float(np.sum(g * wmag * dd**2)) * area
    return 0.5 * total


@dataclass(frozen=True)
class PohozaevReport:
    lhs: float
    rhs: float
    coefficient: float
    residual: float
    star_shaped: StarShapedReport
    trivial: bool


def pohozaev_residual(u: GridFunction3D, p: float, domain: Domain, alpha) -> PohozaevReport:
    """Relative defect of the dilation identity plus the star-shape verdict."""
    ap = _as_alpha(alpha)
    lhs = pohozaev_lhs(u, p, ap)
    rhs = pohozaev_rhs(u, domain, ap)
    star = star_shaped_check(domain, ap)
    trivial = float(np.max(np.abs(u.values))) == 0.0
    residual = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-14)
    return PohozaevReport(lhs, rhs, pohozaev_coefficient(p, ap), residual, star, trivial)
