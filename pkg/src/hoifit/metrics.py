"""Point-set metrics: chamfer distance, Procrustes alignment, v2v."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateConfiguration, EmptySet, TopologyMismatch


def chamfer_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric chamfer distance between two point sets, in meters.

    Mean of nearest-neighbor Euclidean distances, averaged over both
    directions. Zero iff the sets cover each other exactly.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("chamfer distance needs two non-empty point sets")
    d_ab, _ = cKDTree(b).query(a)
    d_ba, _ = cKDTree(a).query(b)
    return 0.5 * (float(d_ab.mean()) + float(d_ba.mean()))


class SimilarityTransform(NamedTuple):
    rotation: np.ndarray    # (3, 3), det +1
    translation: np.ndarray  # (3,)
    scale: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(points, dtype=float) @ self.rotation.T) + self.translation


def procrustes_align(source: np.ndarray, target: np.ndarray,
                     with_scale: bool = True) -> SimilarityTransform:
    """Least-squares similarity transform mapping source onto target.

    Point sets must be in correspondence (same length, >= 3 points, not all
    collinear). Umeyama's method with the reflection guard: if the optimal
    orthogonal matrix has det -1, the smallest singular direction is flipped.
    """
    src = np.asarray(source, dtype=float)
    tgt = np.asarray(target, dtype=float)
    if src.shape != tgt.shape or src.ndim != 2 or src.shape[1] != 3:
        raise DegenerateConfiguration("point sets must both be (N, 3) in correspondence")
    n = len(src)
    if n < 3:
        raise DegenerateConfiguration("need at least 3 corresponding points")

    mu_s = src.mean(axis=0)
    mu_t = tgt.mean(axis=0)
    src_c = src - mu_s
    tgt_c = tgt - mu_t

    cov = tgt_c.T @ src_c / n
    u, s, vt = np.linalg.svd(cov)
    src_scale = np.linalg.svd(src_c, compute_uv=False)
    if src_scale[1] <= 1e-12 * max(src_scale[0], 1e-300):
        raise DegenerateConfiguration("source points are collinear")
    tgt_scale = np.linalg.svd(tgt_c, compute_uv=False)
    if tgt_scale[1] <= 1e-12 * max(tgt_scale[0], 1e-300):
        raise DegenerateConfiguration("target points are collinear")

    d = np.ones(3)
    if np.linalg.det(u @ vt) < 0:
        d[-1] = -1.0
    rot = u @ np.diag(d) @ vt

    if with_scale:
        var_s = (src_c**2).sum() / n
        scale = float((s * d).sum() / var_s)
    else:
        scale = 1.0
    trans = mu_t - scale * rot @ mu_s
    return SimilarityTransform(rot, trans, scale)


def v2v_distance(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean per-vertex distance between corresponding vertex arrays, meters."""
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise TopologyMismatch(
            f"v2v needs identical topology, got {pred.shape} vs {gt.shape}")
    return float(np.linalg.norm(pred - gt, axis=1).mean())
