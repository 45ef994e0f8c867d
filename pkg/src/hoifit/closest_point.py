"""Exact nearest-point-on-mesh queries with bound-based triangle pruning.

For each query the centroid distances give a lower bound |p - c| - r and an
upper bound min(|p - c| + r) on the point-triangle distance; only triangles
whose lower bound clears the best upper bound are evaluated exactly, so the
result equals the true minimum over all faces while the exact kernel runs on
a small candidate set.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .mesh import TriangleMesh

try:
    from numba import njit, prange
    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap

    prange = range

_SURFACE_EPS = 1e-12


def closest_point_on_triangles(tri: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Closest point on each triangle to each query, both (N, ...) aligned.

    tri: (N, 3, 3) triangle vertices, points: (N, 3). Returns (N, 3).
    Region-based method from Ericson's "Real-Time Collision Detection".
    """
    tri = np.asarray(tri, dtype=float)
    p = np.asarray(points, dtype=float)
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab = b - a
    ac = c - a
    ap = p - a

    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    result = np.zeros_like(p)
    remain = np.ones(len(p), dtype=bool)

    is_a = (d1 <= 0) & (d2 <= 0)
    result[is_a] = a[is_a]
    remain &= ~is_a

    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    is_b = (d3 >= 0) & (d4 <= d3) & remain
    result[is_b] = b[is_b]
    remain &= ~is_b

    vc = d1 * d4 - d3 * d2
    is_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0) & remain
    if is_ab.any():
        v = (d1[is_ab] / (d1[is_ab] - d3[is_ab]))[:, None]
        result[is_ab] = a[is_ab] + v * ab[is_ab]
        remain &= ~is_ab

    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    is_c = (d6 >= 0) & (d5 <= d6) & remain
    result[is_c] = c[is_c]
    remain &= ~is_c

    vb = d5 * d2 - d1 * d6
    is_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0) & remain
    if is_ac.any():
        w = (d2[is_ac] / (d2[is_ac] - d6[is_ac]))[:, None]
        result[is_ac] = a[is_ac] + w * ac[is_ac]
        remain &= ~is_ac

    va = d3 * d6 - d5 * d4
    is_bc = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0) & remain
    if is_bc.any():
        d43 = d4[is_bc] - d3[is_bc]
        w = (d43 / (d43 + d5[is_bc] - d6[is_bc]))[:, None]
        result[is_bc] = b[is_bc] + w * (c[is_bc] - b[is_bc])
        remain &= ~is_bc

    if remain.any():
        denom = 1.0 / (va[remain] + vb[remain] + vc[remain])
        v = (vb[remain] * denom)[:, None]
        w = (vc[remain] * denom)[:, None]
        result[remain] = a[remain] + ab[remain] * v + ac[remain] * w

    return result


@njit(cache=True, fastmath=False)
def _closest_point_single(tri, px, py, pz):
    """Scalar region-based closest point on one triangle (Ericson)."""
    ax, ay, az = tri[0, 0], tri[0, 1], tri[0, 2]
    bx, by, bz = tri[1, 0], tri[1, 1], tri[1, 2]
    cx, cy, cz = tri[2, 0], tri[2, 1], tri[2, 2]
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az

    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az

    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bx, by, bz

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return ax + v * abx, ay + v * aby, az + v * abz

    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy, cz

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return ax + w * acx, ay + w * acy, az + w * acz

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return bx + w * (cx - bx), by + w * (cy - by), bz + w * (cz - bz)

    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return (ax + abx * v + acx * w, ay + aby * v + acy * w, az + abz * v + acz * w)


@njit(cache=True, parallel=True, fastmath=False)
def _query_kernel(tri, centroids, radii, pts, out_dist, out_cp):
    """Per query: pruned pass over all triangles keeping the exact minimum.

    The triangle loop is sequential per query, so results do not depend on
    the thread schedule.
    """
    n = pts.shape[0]
    f = tri.shape[0]
    for i in prange(n):
        px, py, pz = pts[i, 0], pts[i, 1], pts[i, 2]
        best = 1e300
        bx = by = bz = 0.0
        for t in range(f):
            dx = px - centroids[t, 0]
            dy = py - centroids[t, 1]
            dz = pz - centroids[t, 2]
            lower = np.sqrt(dx * dx + dy * dy + dz * dz) - radii[t]
            if lower * lower >= best and lower > 0.0:
                continue
            qx, qy, qz = _closest_point_single(tri[t], px, py, pz)
            ex, ey, ez = px - qx, py - qy, pz - qz
            d2 = ex * ex + ey * ey + ez * ez
            if d2 < best:
                best = d2
                bx, by, bz = qx, qy, qz
        out_dist[i] = np.sqrt(best)
        out_cp[i, 0] = bx
        out_cp[i, 1] = by
        out_cp[i, 2] = bz


class UdfResult(NamedTuple):
    distance: np.ndarray      # (N,)
    gradient: np.ndarray      # (N, 3), zero rows where on_surface
    closest: np.ndarray       # (N, 3)
    on_surface: np.ndarray    # (N,) bool


class ClosestPointQuery:
    """Immutable spatial index over a TriangleMesh for exact nearest-surface
    queries. Safe for concurrent read-only use."""

    def __init__(self, mesh: TriangleMesh):
        if mesh.num_faces == 0:
            raise ValueError("cannot index a mesh with no faces")
        self.mesh = mesh
        self._tri = np.ascontiguousarray(mesh.triangles())
        self._centroids = self._tri.mean(axis=1)
        self._radii = np.linalg.norm(
            self._tri - self._centroids[:, None, :], axis=2
        ).max(axis=1)

    def query(self, points: np.ndarray) -> UdfResult:
        """Exact unsigned distance, gradient, and closest surface point for
        each query point (N, 3)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(p)
        f = self.mesh.num_faces
        dist = np.empty(n)
        closest = np.empty((n, 3))

        if _HAS_NUMBA:
            _query_kernel(self._tri, self._centroids, self._radii,
                          np.ascontiguousarray(p), dist, closest)
            return self._finish(p, dist, closest)

        chunk = max(1, 2_000_000 // f)
        for start in range(0, n, chunk):
            pts = p[start:start + chunk]
            m = len(pts)
            diff = pts[:, None, :] - self._centroids[None, :, :]
            cdist = np.sqrt(np.einsum("mfc,mfc->mf", diff, diff))
            lower = cdist - self._radii[None, :]
            # exact distance to the best-bound triangle is a tight upper bound
            seed = np.argmin(cdist + self._radii[None, :], axis=1)
            cp0 = closest_point_on_triangles(self._tri[seed], pts)
            d0 = np.linalg.norm(cp0 - pts, axis=1)
            # fp slack keeps the pruning conservative
            iq, it = np.nonzero(lower <= d0[:, None] + 1e-12)

            cp = closest_point_on_triangles(self._tri[it], pts[iq])
            d = np.linalg.norm(cp - pts[iq], axis=1)
            order = np.lexsort((d, iq))
            first = order[np.searchsorted(iq[order], np.arange(m))]
            dist[start:start + chunk] = d[first]
            closest[start:start + chunk] = cp[first]

        return self._finish(p, dist, closest)

    @staticmethod
    def _finish(p: np.ndarray, dist: np.ndarray, closest: np.ndarray) -> UdfResult:
        on_surface = dist <= _SURFACE_EPS
        grad = np.zeros_like(p)
        off = ~on_surface
        grad[off] = (p[off] - closest[off]) / dist[off, None]
        return UdfResult(dist, grad, closest, on_surface)


def mesh_udf(query: ClosestPointQuery, p) -> tuple[float, np.ndarray, bool]:
    """Unsigned distance and gradient of a single point to the indexed mesh.

    Returns (distance, gradient, on_surface); the gradient is the unit vector
    from the closest surface point toward p, reported as zero on the surface.
    """
    res = query.query(np.asarray(p, dtype=float).reshape(1, 3))
    return float(res.distance[0]), res.gradient[0], bool(res.on_surface[0])
