"""Procedural meshes: boxes, cylinders, spheres. Used for object templates,
synthetic scenes, and test fixtures."""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh, concatenate_meshes


def _grid_patch(origin, du, dv, nu: int, nv: int):
    """Rectangular patch spanned by du, dv with (nu+1)x(nv+1) vertices."""
    us = np.linspace(0.0, 1.0, nu + 1)
    vs = np.linspace(0.0, 1.0, nv + 1)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    verts = (np.asarray(origin)[None, :]
             + uu.reshape(-1, 1) * np.asarray(du)[None, :]
             + vv.reshape(-1, 1) * np.asarray(dv)[None, :])
    faces = []
    for i in range(nu):
        for j in range(nv):
            a = i * (nv + 1) + j
            b = a + nv + 1
            faces.append([a, a + 1, b + 1])
            faces.append([a, b + 1, b])
    return verts, np.array(faces, dtype=np.int64)


def box_mesh(size, center=(0.0, 0.0, 0.0), segments=None) -> TriangleMesh:
    """Axis-aligned box surface. size is a scalar or per-axis triple;
    segments (per axis) defaults to roughly 2 cm vertex spacing."""
    size = np.broadcast_to(np.asarray(size, dtype=float), (3,)).copy()
    if segments is None:
        segments = np.maximum(1, np.round(size / 0.02).astype(int))
    else:
        segments = np.broadcast_to(np.asarray(segments, dtype=int), (3,)).copy()
    hx, hy, hz = size / 2.0
    sx, sy, sz = (int(s) for s in segments)

    patches = [
        # +x / -x faces parameterized over (y, z), etc.
        _grid_patch([hx, -hy, -hz], [0, 2 * hy, 0], [0, 0, 2 * hz], sy, sz),
        _grid_patch([-hx, -hy, -hz], [0, 2 * hy, 0], [0, 0, 2 * hz], sy, sz),
        _grid_patch([-hx, hy, -hz], [2 * hx, 0, 0], [0, 0, 2 * hz], sx, sz),
        _grid_patch([-hx, -hy, -hz], [2 * hx, 0, 0], [0, 0, 2 * hz], sx, sz),
        _grid_patch([-hx, -hy, hz], [2 * hx, 0, 0], [0, 2 * hy, 0], sx, sy),
        _grid_patch([-hx, -hy, -hz], [2 * hx, 0, 0], [0, 2 * hy, 0], sx, sy),
    ]
    verts = []
    faces = []
    offset = 0
    for v, f in patches:
        verts.append(v)
        faces.append(f + offset)
        offset += len(v)
    return TriangleMesh(np.vstack(verts) + np.asarray(center, dtype=float),
                        np.vstack(faces))


def cylinder_mesh(radius: float, height: float, center=(0.0, 0.0, 0.0),
                  sides: int = 16, rings: int | None = None,
                  capped: bool = True) -> TriangleMesh:
    """Cylinder with axis along y."""
    if rings is None:
        rings = max(2, int(round(height / 0.02)) + 1)
    phis = np.arange(sides) * 2 * np.pi / sides
    circle = np.stack([np.cos(phis), np.zeros(sides), np.sin(phis)], axis=1)
    ys = np.linspace(-height / 2, height / 2, rings)
    verts = []
    for y in ys:
        ring = radius * circle
        ring[:, 1] = y
        verts.append(ring)
    verts = np.vstack(verts)
    faces = []
    for i in range(rings - 1):
        for k in range(sides):
            a = i * sides + k
            b = i * sides + (k + 1) % sides
            c = (i + 1) * sides + (k + 1) % sides
            d = (i + 1) * sides + k
            faces.append([a, b, c])
            faces.append([a, c, d])
    if capped:
        for ring_i, y in ((0, ys[0]), (rings - 1, ys[-1])):
            apex = len(verts)
            verts = np.vstack([verts, [[0.0, y, 0.0]]])
            for k in range(sides):
                a = ring_i * sides + k
                b = ring_i * sides + (k + 1) % sides
                faces.append([a, b, apex])
    return TriangleMesh(verts + np.asarray(center, dtype=float),
                        np.array(faces, dtype=np.int64))


def icosphere(subdivisions: int = 2, radius: float = 1.0,
              center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Subdivided icosahedron projected onto the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)

    for _ in range(subdivisions):
        verts_list = list(verts)
        midpoint = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = verts_list[i] + verts_list[j]
                p = p / np.linalg.norm(p)
                midpoint[key] = len(verts_list)
                verts_list.append(p)
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.array(verts_list)
        faces = np.array(new_faces, dtype=np.int64)

    return TriangleMesh(verts * radius + np.asarray(center, dtype=float), faces)


def object_template(shape: str, scale: float = 1.0) -> TriangleMesh:
    """Named object templates used by the scene generator, centered at the
    origin. Shapes: box, rod, cylinder, composite."""
    if shape == "box":
        mesh = box_mesh([0.10, 0.08, 0.06])
    elif shape == "rod":
        mesh = box_mesh([0.50, 0.07, 0.07])
    elif shape == "cylinder":
        mesh = cylinder_mesh(0.045, 0.24)
    elif shape == "composite":
        mesh = concatenate_meshes(
            box_mesh([0.12, 0.05, 0.08]),
            cylinder_mesh(0.03, 0.16, center=(0.0, -0.10, 0.0)))
    else:
        raise ValueError(f"unknown object shape {shape!r}")
    if scale != 1.0:
        mesh = mesh.scaled(scale)
    return mesh.translated(-mesh.centroid())
