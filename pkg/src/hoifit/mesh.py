"""Indexed triangle meshes and ASCII OBJ/PLY io."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class TriangleMesh:
    """Triangle surface in meters, camera coordinates.

    vertices: (V, 3) float array
    faces: (F, 3) int array, indices into vertices
    """

    vertices: np.ndarray
    faces: np.ndarray
    dropped_degenerate: int = field(default=0, compare=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("mesh vertices contain non-finite coordinates")
        if len(self.faces):
            if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
                raise ValueError("face index out of range")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def triangles(self) -> np.ndarray:
        """Per-face vertex coordinates, (F, 3, 3)."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        tri = self.triangles()
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def without_degenerate_faces(self, area_eps: float = 1e-14) -> "TriangleMesh":
        """Drop zero-area faces, recording how many were removed."""
        keep = self.face_areas() > area_eps
        dropped = int((~keep).sum())
        if dropped == 0:
            return self
        return TriangleMesh(self.vertices, self.faces[keep], dropped_degenerate=dropped)

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=float), self.faces)

    def scaled(self, s: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices * float(s), self.faces)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def copy(self) -> "TriangleMesh":
        return TriangleMesh(self.vertices.copy(), self.faces.copy())


def concatenate_meshes(a: TriangleMesh, b: TriangleMesh) -> TriangleMesh:
    verts = np.vstack([a.vertices, b.vertices])
    faces = np.vstack([a.faces, b.faces + a.num_vertices]) if (len(a.faces) or len(b.faces)) \
        else np.zeros((0, 3), dtype=np.int64)
    return TriangleMesh(verts, faces)


# --- io -----------------------------------------------------------------

def save_mesh(mesh: TriangleMesh, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".obj":
        save_obj(mesh, path)
    elif path.suffix.lower() == ".ply":
        save_ply(mesh, path)
    else:
        raise ValueError(f"unsupported mesh format: {path.suffix}")


def load_mesh(path) -> TriangleMesh:
    path = Path(path)
    if path.suffix.lower() == ".obj":
        return load_obj(path)
    if path.suffix.lower() == ".ply":
        return load_ply(path)
    raise ValueError(f"unsupported mesh format: {path.suffix}")


def save_obj(mesh: TriangleMesh, path) -> None:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_obj(path) -> TriangleMesh:
    verts, faces = [], []
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v" and len(parts) >= 4:
            verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "f" and len(parts) >= 4:
            idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
            # fan-triangulate polygons
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
    if not verts:
        raise ValueError(f"no vertices in OBJ file {path}")
    mesh = TriangleMesh(np.array(verts), np.array(faces) if faces else np.zeros((0, 3), int))
    return mesh.without_degenerate_faces()


def save_ply(mesh: TriangleMesh, path) -> None:
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {mesh.num_vertices}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {mesh.num_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for v in mesh.vertices:
        lines.append(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_ply(path) -> TriangleMesh:
    text = Path(path).read_bytes()
    if not text.startswith(b"ply"):
        raise ValueError(f"{path} is not a PLY file")
    try:
        text = text.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path}: only ASCII PLY is supported") from exc
    lines = text.splitlines()
    n_vert = n_face = 0
    i = 0
    while i < len(lines):
        tok = lines[i].split()
        if tok[:1] == ["format"] and "ascii" not in lines[i]:
            raise ValueError(f"{path}: only ASCII PLY is supported")
        if tok[:2] == ["element", "vertex"]:
            n_vert = int(tok[2])
        elif tok[:2] == ["element", "face"]:
            n_face = int(tok[2])
        elif tok[:1] == ["end_header"]:
            i += 1
            break
        i += 1
    verts = np.array([[float(x) for x in lines[i + k].split()[:3]] for k in range(n_vert)])
    faces = []
    for k in range(n_face):
        tok = lines[i + n_vert + k].split()
        count = int(tok[0])
        idx = [int(x) for x in tok[1:1 + count]]
        for j in range(1, count - 1):
            faces.append([idx[0], idx[j], idx[j + 1]])
    mesh = TriangleMesh(verts, np.array(faces) if faces else np.zeros((0, 3), int))
    return mesh.without_degenerate_faces()
