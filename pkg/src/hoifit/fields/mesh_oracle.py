"""Exact mesh-backed field oracle with optional synthetic noise.

Distances and gradients come from exact closest-point queries against the
ground-truth meshes; part logits are built from distances to each part's
vertex cloud (scaled by a temperature, so the best logit marks the nearest
labeled vertex and the channels vary smoothly in space); the rotation and
center fields are spatially constant at their ground-truth values.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..body import NUM_PARTS, BodyModel
from ..closest_point import ClosestPointQuery
from ..errors import CorrespondenceMismatch
from ..mesh import TriangleMesh
from . import rng
from .sample import FieldOracle, FieldSampleBatch, NoiseSpec

_BIG_DISTANCE = 1e6


def _rotate_vectors(vec: np.ndarray, axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rodrigues rotation of rows of vec about per-row unit axes."""
    c = np.cos(angle)[:, None]
    s = np.sin(angle)[:, None]
    dot = np.einsum("ij,ij->i", axis, vec)[:, None]
    return vec * c + np.cross(axis, vec) * s + axis * dot * (1 - c)


def _tilt_vectors(vec: np.ndarray, rand_dir: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Tilt each row by exactly its angle, about an axis perpendicular to the
    row (derived from rand_dir), so the angular error equals the sample."""
    norms = np.linalg.norm(vec, axis=1)
    ok = norms > 1e-12
    out = vec.copy()
    unit = vec[ok] / norms[ok, None]
    axis = np.cross(unit, rand_dir[ok])
    a_norm = np.linalg.norm(axis, axis=1)
    # rand_dir parallel to the vector leaves no tilt plane; keep those rows
    usable = a_norm > 1e-9
    axis = axis[usable] / a_norm[usable, None]
    rows = np.flatnonzero(ok)[usable]
    out[rows] = _rotate_vectors(vec[rows], axis, angle[rows])
    return out


class MeshFieldOracle(FieldOracle):
    def __init__(self, human: TriangleMesh, obj: TriangleMesh,
                 body_model: BodyModel, object_rotation: np.ndarray,
                 noise: NoiseSpec | None = None,
                 part_temperature: float = 0.1,
                 fixed_depth: float = 2.2):
        if human.num_vertices != body_model.num_vertices:
            raise CorrespondenceMismatch(
                f"human mesh has {human.num_vertices} vertices, "
                f"body model has {body_model.num_vertices}")
        self.noise = noise or NoiseSpec()
        self.part_temperature = float(part_temperature)
        self.fixed_depth = float(fixed_depth)
        # accept an ObjectPose-like carrier or a raw 3x3 matrix
        object_rotation = getattr(object_rotation, "rotation", object_rotation)
        self._human_query = ClosestPointQuery(human)
        self._object_query = ClosestPointQuery(obj)
        self._part_trees = []
        for part in range(1, NUM_PARTS + 1):
            pts = human.vertices[body_model.part_labels == part]
            self._part_trees.append(cKDTree(pts) if len(pts) else None)

        self._gt_rotation = np.asarray(object_rotation, dtype=float).reshape(3, 3)
        human_center = human.vertices.mean(axis=0)
        scale = self.fixed_depth / human_center[2] if human_center[2] != 0 else 1.0
        offset = obj.vertices.mean(axis=0) - human_center
        self._gt_centers = np.concatenate([human_center[:2] * scale, offset])

    @property
    def gt_centers(self) -> np.ndarray:
        return self._gt_centers.copy()

    def query(self, points: np.ndarray) -> FieldSampleBatch:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(pts)
        res_h = self._human_query.query(pts)
        res_o = self._object_query.query(pts)
        u_h, grad_h = res_h.distance.copy(), res_h.gradient.copy()
        u_o, grad_o = res_o.distance.copy(), res_o.gradient.copy()

        logits = np.full((n, NUM_PARTS), -_BIG_DISTANCE / self.part_temperature)
        logit_grads = np.zeros((n, NUM_PARTS, 3))
        for part, tree in enumerate(self._part_trees):
            if tree is None:
                continue
            d, idx = tree.query(pts)
            logits[:, part] = -d / self.part_temperature
            off = d > 1e-12
            logit_grads[off, part, :] = -(pts[off] - tree.data[idx[off]]) \
                / (d[off, None] * self.part_temperature)

        rot = np.broadcast_to(self._gt_rotation, (n, 3, 3)).copy()
        centers = np.broadcast_to(self._gt_centers, (n, 5)).copy()

        if not self.noise.is_zero:
            keys = rng.point_keys(self.noise.seed, pts)
            ns = self.noise
            if ns.sigma_d > 0:
                u_h = np.maximum(u_h + ns.sigma_d * rng.normals(keys, 0), 0.0)
                u_o = np.maximum(u_o + ns.sigma_d * rng.normals(keys, 1), 0.0)
            if ns.sigma_g > 0:
                grad_h = _tilt_vectors(grad_h, rng.unit_vectors(keys, 0),
                                       np.abs(ns.sigma_g * rng.normals(keys, 2)))
                grad_o = _tilt_vectors(grad_o, rng.unit_vectors(keys, 1),
                                       np.abs(ns.sigma_g * rng.normals(keys, 3)))
            if ns.flip_prob > 0:
                gate = rng.uniforms(keys, 50) < ns.flip_prob
                pick = np.floor(rng.uniforms(keys, 51) * (NUM_PARTS - 1)).astype(int)
                best = np.argmax(logits, axis=1)
                target = pick + (pick >= best)
                for i in np.flatnonzero(gate):
                    b, t = best[i], target[i]
                    logits[i, [b, t]] = logits[i, [t, b]]
                    logit_grads[i, [b, t]] = logit_grads[i, [t, b]]
            if ns.sigma_r > 0:
                axis = rng.unit_vectors(keys, 2)
                angle = np.abs(ns.sigma_r * rng.normals(keys, 4))
                c = np.cos(angle)
                s = np.sin(angle)
                k = axis
                # per-point Rodrigues matrix, left-applied to the constant field
                kx = np.zeros((n, 3, 3))
                kx[:, 0, 1], kx[:, 0, 2] = -k[:, 2], k[:, 1]
                kx[:, 1, 0], kx[:, 1, 2] = k[:, 2], -k[:, 0]
                kx[:, 2, 0], kx[:, 2, 1] = -k[:, 1], k[:, 0]
                outer = k[:, :, None] * k[:, None, :]
                pert = (c[:, None, None] * np.eye(3)[None] + s[:, None, None] * kx
                        + (1 - c)[:, None, None] * outer)
                rot = pert @ rot
            if ns.sigma_c > 0:
                for ch in range(5):
                    centers[:, ch] += ns.sigma_c * rng.normals(keys, 5 + ch)

        return FieldSampleBatch(u_h, grad_h, u_o, grad_o, logits, rot, centers,
                                part_logit_grads=logit_grads)


def mesh_oracle(human: TriangleMesh, obj: TriangleMesh, body_model: BodyModel,
                object_rotation: np.ndarray, noise: NoiseSpec | None = None,
                part_temperature: float = 0.1,
                fixed_depth: float = 2.2) -> MeshFieldOracle:
    """Build the exact oracle for a ground-truth scene. The human mesh must
    be in vertex correspondence with the body model (for part labels)."""
    return MeshFieldOracle(human, obj, body_model, object_rotation, noise,
                           part_temperature, fixed_depth)
