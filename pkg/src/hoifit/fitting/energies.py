"""Energy terms of the joint fit and their analytic gradients.

Every term reports its gradient against the quantities it depends on:
body terms against posed body vertices (backpropagated through the skinning
Jacobian by the caller), object terms against the pose tangent
(axis-angle increment at the current rotation, translation, log-free scale).
Distance clamps use strict inequality, so the gradient is exactly zero in
the saturated regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..body import BodyModel, BodyParams, lbs_forward, lbs_vjp
from ..camera import PerspectiveCamera
from ..fields.sample import FieldOracle, FieldSampleBatch
from ..raster import MaskDistanceField
from .config import FitConfig
from .contacts import ContactSets
from .pose import ObjectPose


@dataclass
class PoseGradient:
    """Gradient of a scalar w.r.t. an ObjectPose tangent: omega is the
    axis-angle increment applied on the left of the current rotation."""

    omega: np.ndarray
    translation: np.ndarray
    scale: float

    def __iadd__(self, other: "PoseGradient") -> "PoseGradient":
        self.omega += other.omega
        self.translation += other.translation
        self.scale += other.scale
        return self

    @classmethod
    def zero(cls) -> "PoseGradient":
        return cls(np.zeros(3), np.zeros(3), 0.0)


def pose_gradient_from_vertices(pose: ObjectPose, template: np.ndarray,
                                dE_dverts: np.ndarray) -> PoseGradient:
    """Chain a per-vertex gradient through v = s (R o + t)."""
    g = np.asarray(dE_dverts, dtype=float)
    rotated = template @ pose.rotation.T
    g_t = pose.scale * g.sum(axis=0)
    g_s = float(np.einsum("ij,ij->", g, rotated + pose.translation))
    g_w = pose.scale * np.cross(rotated, g).sum(axis=0)
    return PoseGradient(g_w, g_t, g_s)


# --- term pieces (vertex-level gradients) ----------------------------------

def clamped_udf_term(u: np.ndarray, grad_u: np.ndarray, delta: float
                     ) -> tuple[float, np.ndarray]:
    value = float(np.minimum(u, delta).sum())
    dverts = np.where((u < delta)[:, None], grad_u, 0.0)
    return value, dverts


def part_ce_term(batch: FieldSampleBatch, labels: np.ndarray
                 ) -> tuple[float, np.ndarray]:
    """Cross entropy between predefined per-vertex labels (1-based) and the
    oracle's part logits. The spatial gradient uses the oracle's logit
    gradients when available and is a zero subgradient otherwise."""
    logits = batch.part_logits
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    lbl = np.asarray(labels, dtype=int) - 1
    rows = np.arange(len(logits))
    value = float((logz - shifted[rows, lbl]).sum())
    if batch.part_logit_grads is None:
        return value, np.zeros((len(logits), 3))
    probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
    coeff = probs.copy()
    coeff[rows, lbl] -= 1.0
    dverts = np.einsum("nj,njc->nc", coeff, batch.part_logit_grads)
    return value, dverts


def center_reg_term(posed_verts: np.ndarray, batch: FieldSampleBatch,
                    oracle: FieldOracle) -> tuple[float, np.ndarray]:
    """Squared distance between the field-predicted object center and the
    posed template centroid. The prediction is aggregated over the queried
    samples and treated as constant for the gradient."""
    predicted = oracle.decode_object_center(batch.centers).mean(axis=0)
    mean = posed_verts.mean(axis=0)
    diff = mean - predicted
    value = float(diff @ diff)
    dverts = np.broadcast_to(2.0 * diff / len(posed_verts), posed_verts.shape).copy()
    return value, dverts


def silhouette_term(posed_verts: np.ndarray, camera: PerspectiveCamera,
                    allowed_field: MaskDistanceField) -> tuple[float, np.ndarray]:
    """Mean squared distance-transform value at the projected vertices.

    The field is the pixel distance to the observed object-or-human region,
    so vertices rendered outside anything that could explain them are pulled
    back; occluded-by-human placements cost nothing. Differentiable through
    the bilinear field interpolation and the projection.
    """
    n = len(posed_verts)
    dverts = np.zeros_like(posed_verts)
    in_front = posed_verts[:, 2] > 1e-6
    if not in_front.any():
        return 0.0, dverts
    pts = posed_verts[in_front]
    pix = camera.project(pts)
    phi, dphi = allowed_field.sample(pix)
    value = float((phi**2).sum()) / n
    jproj = camera.projection_jacobian(pts)
    dverts[in_front] = np.einsum("n,nk,nkc->nc", 2.0 * phi / n, dphi, jproj)
    return value, dverts


def keypoint_term(landmarks: np.ndarray, camera: PerspectiveCamera,
                  pixels: np.ndarray, confidence: np.ndarray,
                  huber_pixels: float) -> tuple[float, np.ndarray]:
    """Confidence-weighted squared pixel error with a Huber-style switch to
    a linear regime above huber_pixels."""
    pix_pred = camera.project(landmarks)
    err = pix_pred - np.asarray(pixels, dtype=float)
    r = np.linalg.norm(err, axis=1)
    conf = np.asarray(confidence, dtype=float)
    quad = r <= huber_pixels
    rho = np.where(quad, r**2, huber_pixels * (2.0 * r - huber_pixels))
    value = float((conf * rho).sum())
    # d rho / d err: 2 err below the switch, 2 k err / r above
    coeff = np.where(quad, 2.0, 2.0 * huber_pixels / np.maximum(r, 1e-30))
    derr = (conf * coeff)[:, None] * err
    jproj = camera.projection_jacobian(landmarks)
    dlandmarks = np.einsum("nk,nkc->nc", derr, jproj)
    return value, dlandmarks


# --- spec-level energies ----------------------------------------------------

def energy_human(params: BodyParams, model: BodyModel, oracle: FieldOracle,
                 cfg: FitConfig) -> tuple[float, np.ndarray]:
    """Sum over posed body vertices of the clamped human distance plus the
    part cross entropy (Eq. 4 shape). Returns (value, gradient) with the
    gradient over the packed body parameter vector."""
    mesh, cache = lbs_forward(model, params, return_cache=True)
    batch = oracle.query(mesh.vertices)
    udf_val, udf_dv = clamped_udf_term(batch.u_h, batch.grad_u_h, cfg.clamp_delta)
    ce_val, ce_dv = part_ce_term(batch, model.part_labels)
    value = cfg.lambda_h * udf_val + cfg.lambda_part * ce_val
    dverts = cfg.lambda_h * udf_dv + cfg.lambda_part * ce_dv
    return value, lbs_vjp(model, params, cache, dverts)


def energy_object(pose: ObjectPose, template: np.ndarray, oracle: FieldOracle,
                  cfg: FitConfig, camera: PerspectiveCamera | None = None,
                  allowed_field: MaskDistanceField | None = None
                  ) -> tuple[float, PoseGradient]:
    """Clamped object distance summed over posed template vertices, the
    occlusion-aware silhouette relaxation, and the center regularizer."""
    template = np.asarray(template, dtype=float)
    posed = pose.apply(template)
    batch = oracle.query(posed)
    udf_val, udf_dv = clamped_udf_term(batch.u_o, batch.grad_u_o, cfg.clamp_delta)
    value = cfg.lambda_o * udf_val
    dverts = cfg.lambda_o * udf_dv
    if cfg.lambda_center > 0:
        c_val, c_dv = center_reg_term(posed, batch, oracle)
        value += cfg.lambda_center * c_val
        dverts += cfg.lambda_center * c_dv
    if cfg.use_silhouette and cfg.lambda_occ > 0 and camera is not None \
            and allowed_field is not None:
        s_val, s_dv = silhouette_term(posed, camera, allowed_field)
        value += cfg.lambda_occ * s_val
        dverts += cfg.lambda_occ * s_dv
    return value, pose_gradient_from_vertices(pose, template, dverts)


def energy_j2d(params: BodyParams, model: BodyModel, camera: PerspectiveCamera,
               pixels: np.ndarray, confidence: np.ndarray,
               cfg: FitConfig) -> tuple[float, np.ndarray]:
    """Keypoint reprojection energy over the model's landmark set, raw
    (unweighted) value in squared pixels."""
    mesh, cache = lbs_forward(model, params, return_cache=True)
    idx = model.landmark_indices
    value, dlm = keypoint_term(mesh.vertices[idx], camera, pixels, confidence,
                               cfg.huber_pixels)
    dverts = np.zeros_like(mesh.vertices)
    np.add.at(dverts, idx, dlm)
    return value, lbs_vjp(model, params, cache, dverts)


def energy_reg(params: BodyParams, pose_init: np.ndarray, model: BodyModel
               ) -> tuple[float, np.ndarray]:
    """Quadratic anchor on the articulated pose (root excluded) plus the
    squared shape coefficients."""
    dpose = params.pose - np.asarray(pose_init, dtype=float)
    dpose[0] = 0.0  # global rotation is unconstrained
    value = float((dpose**2).sum() + (params.betas**2).sum())
    grad = np.zeros(model.num_params)
    grad[:3 * model.num_joints] = (2.0 * dpose).ravel()
    grad[3 * model.num_joints + 3:] = 2.0 * params.betas
    return value, grad


def energy_contact(contacts: ContactSets, body_verts: np.ndarray,
                   obj_verts: np.ndarray
                   ) -> tuple[float, np.ndarray, np.ndarray]:
    """Sum over parts of the chamfer distance between paired contact sets
    (Eq. 7 shape). Zero, with zero gradients, whenever every part has an
    empty side. Gradients are reported for both vertex arrays."""
    value = 0.0
    dbody = np.zeros_like(body_verts)
    dobj = np.zeros_like(obj_verts)
    for j in contacts.active_parts():
        bi = contacts.body_indices[j]
        oi = contacts.object_indices[j]
        h_pts = body_verts[bi]
        o_pts = obj_verts[oi]
        d_ho, nn_ho = cKDTree(o_pts).query(h_pts)
        d_oh, nn_oh = cKDTree(h_pts).query(o_pts)
        value += 0.5 * (d_ho.mean() + d_oh.mean())

        ok = d_ho > 1e-12
        dirs = np.zeros_like(h_pts)
        dirs[ok] = (h_pts[ok] - o_pts[nn_ho[ok]]) / d_ho[ok, None]
        w = 0.5 / len(h_pts)
        np.add.at(dbody, bi, w * dirs)
        np.subtract.at(dobj, oi[nn_ho], w * dirs)

        ok = d_oh > 1e-12
        dirs = np.zeros_like(o_pts)
        dirs[ok] = (o_pts[ok] - h_pts[nn_oh[ok]]) / d_oh[ok, None]
        w = 0.5 / len(o_pts)
        np.add.at(dobj, oi, w * dirs)
        np.subtract.at(dbody, bi[nn_oh], w * dirs)
    return float(value), dbody, dobj
