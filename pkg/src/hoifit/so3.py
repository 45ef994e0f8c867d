"""Rotation helpers: axis-angle exponential, its derivative, SVD projection."""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]x for vectors (..., 3) -> (..., 3, 3)."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def axis_angle_to_matrix(r: np.ndarray) -> np.ndarray:
    """Rodrigues formula for axis-angle vectors (..., 3) -> (..., 3, 3)."""
    r = np.asarray(r, dtype=float)
    theta = np.linalg.norm(r, axis=-1, keepdims=True)
    small = theta[..., 0] < 1e-12
    axis = np.where(theta > 1e-12, r / np.where(theta > 1e-12, theta, 1.0), 0.0)
    k = skew(axis)
    c = np.cos(theta)[..., None]
    s = np.sin(theta)[..., None]
    eye = np.broadcast_to(np.eye(3), k.shape)
    rot = eye * c + s * k + (1 - c) * axis[..., :, None] * axis[..., None, :]
    if np.any(small):
        # first-order expansion keeps the zero-angle limit exact
        rot = np.where(small[..., None, None], eye + skew(r), rot)
    return rot


def axis_angle_jacobian(r: np.ndarray) -> np.ndarray:
    """dR/dr_c for a single axis-angle vector r, returned as (3, 3, 3) with
    the leading index selecting the component c.

    Closed form from Gallego & Yezzi: for r != 0,
    dR/dr_c = ((r_c [r]x + [r x ((I - R) e_c)]x) / |r|^2) R,
    and [e_c]x at r = 0.
    """
    r = np.asarray(r, dtype=float).reshape(3)
    theta2 = float(r @ r)
    rot = axis_angle_to_matrix(r)
    out = np.zeros((3, 3, 3))
    if theta2 < 1e-16:
        for c in range(3):
            e = np.zeros(3)
            e[c] = 1.0
            out[c] = skew(e)
        return out
    eye_m_rot = np.eye(3) - rot
    rx = skew(r)
    for c in range(3):
        e = np.zeros(3)
        e[c] = 1.0
        out[c] = ((r[c] * rx + skew(np.cross(r, eye_m_rot @ e))) / theta2) @ rot
    return out


def svd_project_so3(m: np.ndarray) -> np.ndarray:
    """Nearest rotation to a 3x3 matrix in the Frobenius norm.

    Standard SVD projection with the reflection guard: when det(U V^T) is
    negative the smallest singular direction is sign-flipped. Raises
    SingularMatrix when the two smallest singular values vanish, in which
    case the nearest rotation is not unique.
    """
    m = np.asarray(m, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    u, s, vt = np.linalg.svd(m)
    tol = 1e-12 * max(s[0], 1.0)
    if s[1] <= tol and s[2] <= tol:
        raise SingularMatrix("two vanishing singular values, projection not unique")
    d = np.ones(3)
    if np.linalg.det(u @ vt) < 0:
        d[-1] = -1.0
    return u @ np.diag(d) @ vt


def geodesic_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Rotation angle of r1 r2^T, in radians."""
    rel = np.asarray(r1, dtype=float) @ np.asarray(r2, dtype=float).T
    cos = (np.trace(rel) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation (axis uniform on the sphere, angle uniform)."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, np.pi)
    return axis_angle_to_matrix(axis * angle)
