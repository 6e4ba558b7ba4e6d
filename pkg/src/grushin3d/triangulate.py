"""Marching-tetrahedra extraction of implicit surfaces.

Each grid cube is split into the six Kuhn tetrahedra sharing the main
diagonal; zero crossings of the level function are interpolated linearly
along tetrahedron edges.  Normals are taken from central differences of
the level function at triangle centroids (pointing toward positive level,
i.e. outward), so the caller never depends on triangle winding.
"""

from __future__ import annotations

import numpy as np

__all__ = ["marching_tetrahedra"]

# Kuhn decomposition: the six vertex chains 0 -> e_p3 -> e_p3+e_p2 -> (1,1,1)
_CUBE_TETS = []
for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
    v = [np.zeros(3, dtype=int)]
    acc = np.zeros(3, dtype=int)
    for axis in reversed(perm):
        acc = acc.copy()
        acc[axis] = 1
        v.append(acc)
    _CUBE_TETS.append(np.array(v))

_TWO_TWO_SPLITS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def _edge_points(Pa, Pb, va, vb):
    t = (va / (va - vb))[:, None]
    return Pa + t * (Pb - Pa)


def marching_tetrahedra(level, bbox, resolution):
    """Triangulate {level = 0}; returns (centroids, areas, unit normals).

    Empty output means the level set does not cross the sampling grid
    (empty or all-covering shape: zero boundary measure inside the bbox).
    """
    bbox = np.asarray(bbox, dtype=float).reshape(3, 2)
    lo = bbox[:, 0]
    n = int(resolution)
    hs = (bbox[:, 1] - lo) / n

    axes = [lo[i] + np.arange(n + 1) * hs[i] for i in range(3)]
    G1, G2, G3 = np.meshgrid(*axes, indexing="ij")
    vals = level(np.column_stack([G1.ravel(), G2.ravel(), G3.ravel()])).reshape(
        n + 1, n + 1, n + 1
    )
    del G1, G2, G3

    cell_origin = np.stack(
        np.meshgrid(axes[0][:-1], axes[1][:-1], axes[2][:-1], indexing="ij"), axis=-1
    ).reshape(-1, 3)

    tris = []
    for tet in _CUBE_TETS:
        V = [vals[c[0] : n + c[0], c[1] : n + c[1], c[2] : n + c[2]].ravel() for c in tet]
        P = [cell_origin + c * hs for c in tet]
        neg = [v < 0 for v in V]
        nneg = sum(m.astype(np.int8) for m in neg)

        # one vertex on one side, three on the other
        for lone in range(4):
            others = [k for k in range(4) if k != lone]
            for lone_negative in (True, False):
                want = 1 if lone_negative else 3
                m = (nneg == want) & (neg[lone] == lone_negative)
                if not m.any():
                    continue
                pts = [
                    _edge_points(P[lone][m], P[k][m], V[lone][m], V[k][m]) for k in others
                ]
                tris.append((pts[0], pts[1], pts[2]))

        # two-two: quad split into two triangles
        m2 = nneg == 2
        if m2.any():
            for (a, b), (c, d) in _TWO_TWO_SPLITS:
                m = m2 & (neg[a] == neg[b]) & (neg[a] != neg[c]) & (neg[c] == neg[d])
                if not m.any():
                    continue
                ac = _edge_points(P[a][m], P[c][m], V[a][m], V[c][m])
                ad = _edge_points(P[a][m], P[d][m], V[a][m], V[d][m])
                bc = _edge_points(P[b][m], P[c][m], V[b][m], V[c][m])
                bd = _edge_points(P[b][m], P[d][m], V[b][m], V[d][m])
                tris.append((ac, ad, bd))
                tris.append((ac, bd, bc))

    if not tris:
        empty = np.empty((0, 3))
        return empty, np.empty(0), empty

    A = np.concatenate([t[0] for t in tris])
    B = np.concatenate([t[1] for t in tris])
    C = np.concatenate([t[2] for t in tris])
    cr = np.cross(B - A, C - A)
    areas = 0.5 * np.linalg.norm(cr, axis=1)
    keep = areas > 0
    A, B, C, areas = A[keep], B[keep], C[keep], areas[keep]
    centroids = (A + B + C) / 3.0

    h = 1e-5 * float(hs.min())
    grad = np.empty_like(centroids)
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = h
        grad[:, ax] = (level(centroids + e) - level(centroids - e)) / (2 * h)
    norm = np.linalg.norm(grad, axis=1)
    ok = norm > 0
    normals = np.zeros_like(grad)
    normals[ok] = grad[ok] / norm[ok, None]
    return centroids[ok], areas[ok], normals[ok]
