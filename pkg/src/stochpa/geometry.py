"""Convex hulls in 2D/3D and vertex <-> halfspace conversion.

Degenerate (lower-dimensional) hulls are written with paired opposing
inequalities: a segment in the plane becomes two rows pinning its line plus
one row per end, a single point becomes ``+-x <= ..`` rows for every axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

COLLINEAR_TOL = 1e-12
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ValuePolytope:
    """{x : H x <= b} together with its vertex list."""

    dimension: int
    vertices: np.ndarray
    H: np.ndarray
    b: np.ndarray
    owner: Optional[tuple] = None

    def contains(self, x, tol: float = 0.0) -> bool:
        return contains(self, x, tol)

    def lexmax_vertex(self) -> np.ndarray:
        """Vertex maximizing the coordinates lexicographically (first coordinate first)."""
        order = np.lexsort(tuple(-self.vertices[:, k] for k in reversed(range(self.dimension))))
        return self.vertices[order[0]].copy()

    def to_dict(self) -> dict:
        owner = None
        if self.owner is not None:
            h, o = self.owner
            owner = {"h": h, "o": None if o is None else [int(v) for v in o]}
        return {"dimension": self.dimension, "vertices": self.vertices.tolist(),
                "H": self.H.tolist(), "b": self.b.tolist(), "owner": owner}

    @classmethod
    def from_dict(cls, d: dict) -> "ValuePolytope":
        owner = d.get("owner")
        if owner is not None:
            o = owner["o"]
            owner = (owner["h"], None if o is None else tuple(o))
        dim = d["dimension"]
        return cls(dim, np.array(d["vertices"], dtype=float).reshape(-1, dim),
                   np.array(d["H"], dtype=float).reshape(-1, dim), np.array(d["b"], dtype=float), owner)

    @classmethod
    def from_points(cls, points, owner=None) -> "ValuePolytope":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dim = pts.shape[1]
        if dim == 2:
            verts = convex_hull_2d(pts)
            H, b = to_halfspaces_2d(verts)
        elif dim == 3:
            H, b, verts = convex_hull_3d_halfspaces(pts)
        else:
            raise ValueError(f"only 2D and 3D polytopes are supported, got {dim}D")
        return cls(dim, verts, H, b, owner)

    @classmethod
    def point(cls, x, owner=None) -> "ValuePolytope":
        return cls.from_points([x], owner)


def contains(poly: ValuePolytope, x, tol: float = 0.0) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (poly.dimension,):
        raise ValueError(f"point of shape {x.shape} for a {poly.dimension}D polytope")
    return bool(np.all(poly.H @ x <= poly.b + tol))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_indices_2d(pts: np.ndarray) -> list:
    """Andrew's monotone chain; returns indices of hull vertices, counterclockwise."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    uniq = []
    for i in order:
        # near-duplicates need not be adjacent in lexicographic order
        if uniq and np.any(np.all(np.abs(pts[uniq] - pts[i]) <= COLLINEAR_TOL, axis=1)):
            continue
        uniq.append(int(i))
    if len(uniq) <= 2:
        return uniq

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and _cross(pts[out[-2]], pts[out[-1]], pts[i]) <= 0.0:
                out.pop()
            out.append(i)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    hull = _drop_flat_vertices(pts, lower[:-1] + upper[:-1])
    # start from the lexicographically smallest survivor, as an undegraded hull does
    rank = {i: r for r, i in enumerate(uniq)}
    start = min(range(len(hull)), key=lambda j: rank[hull[j]])
    return hull[start:] + hull[:start]


def _drop_flat_vertices(pts: np.ndarray, hull: list) -> list:
    """Remove vertices within COLLINEAR_TOL of the chord between their neighbours.

    Done after the exact chain so that the sort order never decides which of
    several nearly collinear points survives.
    """
    changed = True
    while changed and len(hull) >= 3:
        changed = False
        k = len(hull)
        for j in range(k):
            a, v, b = pts[hull[j - 1]], pts[hull[j]], pts[hull[(j + 1) % k]]
            d = b - a
            length = np.hypot(d[0], d[1])
            t = np.dot(v - a, d)
            if length > 0 and abs(_cross(a, b, v)) / length <= COLLINEAR_TOL and 0.0 <= t <= length * length:
                del hull[j]
                changed = True
                break
    return hull


def convex_hull_2d(points) -> np.ndarray:
    """Minimal counterclockwise vertex list of the hull of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0 or pts.shape[1] != 2:
        raise ValueError("convex_hull_2d needs at least one 2D point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point")
    return pts[_hull_indices_2d(pts)].copy()


def _point_rows(p: np.ndarray):
    d = p.size
    H = np.vstack([np.eye(d), -np.eye(d)])
    b = np.concatenate([p, -p])
    return H, b


def to_halfspaces_2d(hull) -> tuple:
    """(H, b) with unit-length rows for a counterclockwise hull vertex list."""
    v = np.atleast_2d(np.asarray(hull, dtype=float))
    k = v.shape[0]
    if k == 1:
        return _point_rows(v[0])
    if k == 2:
        d = v[1] - v[0]
        d = d / np.linalg.norm(d)
        n = np.array([-d[1], d[0]])
        H = np.vstack([n, -n, d, -d])
        b = np.array([n @ v[0], -(n @ v[0]), d @ v[1], -(d @ v[0])])
        return H, b
    rows, rhs = [], []
    for i in range(k):
        p, q = v[i], v[(i + 1) % k]
        e = q - p
        n = np.array([e[1], -e[0]]) / np.linalg.norm(e)
        rows.append(n)
        # the loosest vertex keeps every hull point inside despite rounding
        rhs.append(max(n @ p, n @ q))
    return np.array(rows), np.array(rhs)


def _dedupe_rows(H, b, tol=1e-9):
    keep_H, keep_b = [], []
    for h, c in zip(H, b):
        for j, kh in enumerate(keep_H):
            if np.all(np.abs(kh - h) <= tol):
                keep_b[j] = max(keep_b[j], c)
                break
        else:
            keep_H.append(h)
            keep_b.append(c)
    return np.array(keep_H), np.array(keep_b)


def convex_hull_3d_halfspaces(points) -> tuple:
    """(H, b, vertices) for the hull of 3D ``points``.

    Rank-deficient inputs (coplanar, collinear, a single point) are detected
    from the singular values of the centered point cloud and written as slabs.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0 or pts.shape[1] != 3:
        raise ValueError("convex_hull_3d_halfspaces needs at least one 3D point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point")
    pts = np.unique(pts, axis=0)
    center = pts.mean(axis=0)
    X = pts - center
    _, sv, Vt = np.linalg.svd(X, full_matrices=True)
    sv = np.concatenate([sv, np.zeros(3 - sv.size)])
    rank = int(np.sum(sv > RANK_TOL))
    if rank == 3:
        try:
            hull = ConvexHull(pts)
        except QhullError:
            rank = 2
        else:
            H = hull.equations[:, :3]
            H = H / np.linalg.norm(H, axis=1, keepdims=True)
            b = np.max(pts @ H.T, axis=0)
            H, b = _dedupe_rows(H, b)
            return H, b, pts[np.sort(hull.vertices)].copy()
    return _degenerate_3d(pts, center, Vt, rank)


def _slab(n, pts):
    vals = pts @ n
    return [n, -n], [vals.max(), -vals.min()]


def _degenerate_3d(pts, center, Vt, rank):
    if rank == 0:
        p = pts.mean(axis=0)
        rows, rhs = [], []
        for e in np.eye(3):
            r, c = _slab(e, pts)
            rows += r
            rhs += c
        return np.array(rows), np.array(rhs), p[None, :]
    if rank == 1:
        d = Vt[0]
        t = pts @ d
        verts = pts[[int(np.argmin(t)), int(np.argmax(t))]]
        rows, rhs = [], []
        for n in (d, Vt[1], Vt[2]):
            r, c = _slab(n, pts)
            rows += r
            rhs += c
        return np.array(rows), np.array(rhs), verts.copy()
    u, v, n = Vt[0], Vt[1], Vt[2]
    coords = (pts - center) @ np.column_stack([u, v])
    idx = _hull_indices_2d(coords)
    H2, _ = to_halfspaces_2d(coords[idx])
    rows, rhs = _slab(n, pts)
    for a in H2:
        normal = a[0] * u + a[1] * v
        normal = normal / np.linalg.norm(normal)
        rows.append(normal)
        rhs.append(float(np.max(pts @ normal)))
    return np.array(rows), np.array(rhs), pts[idx].copy()
