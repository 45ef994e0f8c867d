"""Three-stage joint optimization: human warmup, object warmup from the pose
fields, then joint refinement with contact reasoning.

The optimizer is first order with an RMS-scaled per-parameter direction and
a step-halving line search on the total energy, so within any phase with
fixed contact sets the accepted energy sequence is non-increasing. Contact
sets are discrete, so they are re-detected at a fixed cadence instead of
being differentiated through.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..body import BodyModel, BodyParams, lbs_forward, lbs_vjp
from ..camera import PerspectiveCamera
from ..errors import EmptyShell
from ..fields.projection import surface_projection
from ..fields.sample import FieldOracle
from ..mesh import TriangleMesh
from ..raster import MaskDistanceField, SilhouetteMask
from ..so3 import axis_angle_to_matrix, svd_project_so3
from .config import FitConfig
from .contacts import ContactSets, detect_contacts
from .energies import (PoseGradient, center_reg_term, clamped_udf_term,
                       energy_contact, energy_reg, keypoint_term,
                       part_ce_term, pose_gradient_from_vertices,
                       silhouette_term)
from .initialize import init_object_pose
from .pose import ObjectPose

_COMPONENTS = ("h_udf", "h_part", "o_udf", "o_sil", "o_center",
               "contact", "j2d", "reg")


@dataclass
class FitScene:
    """Inputs the fitter needs beyond the oracle."""

    model: BodyModel
    template: TriangleMesh
    camera: PerspectiveCamera | None = None
    mask_object: SilhouetteMask | None = None
    mask_human: SilhouetteMask | None = None
    keypoint_pixels: np.ndarray | None = None
    keypoint_confidence: np.ndarray | None = None


@dataclass
class FitReport:
    rows: list = field(default_factory=list)
    stage_converged: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add(self, stage: str, iteration: int, total: float,
            components: dict, step: float) -> None:
        self.rows.append((stage, iteration, total,
                          {k: components.get(k, 0.0) for k in _COMPONENTS}, step))

    def final_components(self) -> dict:
        return dict(self.rows[-1][3]) if self.rows else {}

    def to_lines(self) -> list[str]:
        lines = ["stage iter total " + " ".join(_COMPONENTS) + " step"]
        for stage, it, total, comps, step in self.rows:
            vals = " ".join(f"{comps[k]:.9g}" for k in _COMPONENTS)
            lines.append(f"{stage} {it} {total:.9g} {vals} {step:.3g}")
        for stage, ok in self.stage_converged.items():
            lines.append(f"converged {stage} {'yes' if ok else 'no'}")
        for note in self.notes:
            lines.append(f"note {note}")
        return lines


@dataclass
class FitResult:
    body: BodyParams
    object_pose: ObjectPose
    contacts: ContactSets | None
    report: FitReport


@dataclass
class _State:
    body: np.ndarray          # packed body parameter vector
    rotation: np.ndarray      # current object rotation
    translation: np.ndarray
    scale: float

    def copy(self) -> "_State":
        return _State(self.body.copy(), self.rotation.copy(),
                      self.translation.copy(), self.scale)

    def pose(self) -> ObjectPose:
        return ObjectPose(self.rotation, self.translation, self.scale)


class _Descent:
    """RMS-scaled gradient descent with step-halving line search. Keeps its
    adaptive state across calls so a stage can be run in blocks (contact
    re-detection) without losing step-size memory."""

    def __init__(self, cfg: FitConfig, use_body: bool, use_object: bool):
        self.cfg = cfg
        self.use_body = use_body
        self.use_object = use_object
        self.rms: dict = {}
        self.alpha = 1.0
        self.accepted = 0

    def _direction(self, grads: dict) -> dict:
        out = {}
        for key, g in grads.items():
            if key not in self.rms:
                self.rms[key] = g * g
            else:
                self.rms[key] = 0.9 * self.rms[key] + 0.1 * g * g
            out[key] = g / (np.sqrt(self.rms[key]) + 1e-12)
        return out

    def _apply(self, state: _State, direction: dict, alpha: float,
               model: BodyModel) -> _State:
        cfg = self.cfg
        new = state.copy()
        if self.use_body:
            d = direction["body"].copy()
            j3 = 3 * model.num_joints
            d[:j3] *= cfg.step_pose
            d[j3:j3 + 3] *= cfg.step_trans
            d[j3 + 3:] *= cfg.step_betas
            new.body = state.body - alpha * d
            new.body[j3 + 3:] = np.clip(new.body[j3 + 3:], -cfg.beta_limit, cfg.beta_limit)
        if self.use_object:
            new.rotation = axis_angle_to_matrix(
                -alpha * cfg.step_obj_rot * direction["omega"]) @ state.rotation
            new.translation = state.translation - alpha * cfg.step_obj_trans * direction["obj_t"]
            new.scale = float(np.clip(
                state.scale - alpha * cfg.step_obj_scale * direction["obj_s"],
                cfg.scale_min, cfg.scale_max))
        return new

    def run(self, eval_fn, state: _State, iters: int, model: BodyModel,
            report: FitReport, stage: str, start_iter: int = 0
            ) -> tuple[_State, bool, int]:
        """Returns (state, converged, next_iteration_index)."""
        cfg = self.cfg
        energy, grads, comps = eval_fn(state)
        report.add(stage, start_iter, energy, comps, 0.0)
        calm = 0
        it = start_iter
        for it in range(start_iter + 1, start_iter + iters + 1):
            direction = self._direction(grads)
            alpha = self.alpha
            accepted = False
            for _ in range(30):
                cand = self._apply(state, direction, alpha, model)
                cand_energy, cand_grads, cand_comps = eval_fn(cand)
                if cand_energy < energy:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                # no descent along the scaled gradient at machine resolution
                return state, True, it
            rel_drop = (energy - cand_energy) / max(abs(energy), 1.0)
            state, energy, grads, comps = cand, cand_energy, cand_grads, cand_comps
            self.alpha = min(alpha * 1.5, 8.0)
            self.accepted += 1
            if self.use_object and self.accepted % cfg.reortho_every == 0:
                state.rotation = svd_project_so3(state.rotation)
            report.add(stage, it, energy, comps, alpha)
            if rel_drop < cfg.converge_tol:
                calm += 1
                if calm >= cfg.converge_patience:
                    return state, True, it + 1
            else:
                calm = 0
        return state, False, it + 1


def _allowed_field(scene: FitScene) -> MaskDistanceField | None:
    if scene.mask_object is None:
        return None
    allowed = scene.mask_object.mask
    if scene.mask_human is not None:
        allowed = allowed | scene.mask_human.mask
    return MaskDistanceField(allowed)


def joint_fit(scene: FitScene, oracle: FieldOracle, init_body: BodyParams,
              cfg: FitConfig | None = None, seed: int = 0,
              init_object: ObjectPose | None = None) -> FitResult:
    """Fit body parameters and object pose to the oracle's fields.

    The body is initialized from init_body (supplied externally); the object
    pose comes from the rotation and center fields unless an explicit
    init_object overrides that (perturbation studies). Stages: body only,
    object only, then joint refinement with contacts re-detected every
    cfg.contact_cadence iterations.
    """
    cfg = cfg or FitConfig()
    model = scene.model
    report = FitReport()
    pose_anchor = init_body.pose.copy()

    template_centroid = scene.template.centroid()
    template = scene.template.vertices - template_centroid
    sil_field = _allowed_field(scene) if cfg.use_silhouette and scene.camera else None

    keypoints = None
    if scene.keypoint_pixels is not None and scene.camera is not None:
        keypoints = (np.asarray(scene.keypoint_pixels, dtype=float),
                     np.asarray(scene.keypoint_confidence, dtype=float))

    def body_terms(vec: np.ndarray):
        """Shared body-side evaluation; returns verts, cache, value,
        dE/dverts, direct parameter gradient, and components."""
        params = BodyParams.from_vector(vec, model)
        mesh, cache = lbs_forward(model, params, return_cache=True)
        batch = oracle.query(mesh.vertices)
        udf_val, udf_dv = clamped_udf_term(batch.u_h, batch.grad_u_h, cfg.clamp_delta)
        ce_val, ce_dv = part_ce_term(batch, model.part_labels)
        value = cfg.lambda_h * udf_val + cfg.lambda_part * ce_val
        dverts = cfg.lambda_h * udf_dv + cfg.lambda_part * ce_dv
        comps = {"h_udf": cfg.lambda_h * udf_val, "h_part": cfg.lambda_part * ce_val}
        direct = np.zeros(model.num_params)
        if keypoints is not None and cfg.lambda_j2d > 0:
            idx = model.landmark_indices
            kp_val, kp_dlm = keypoint_term(mesh.vertices[idx], scene.camera,
                                           keypoints[0], keypoints[1], cfg.huber_pixels)
            value += cfg.lambda_j2d * kp_val
            comps["j2d"] = cfg.lambda_j2d * kp_val
            np.add.at(dverts, idx, cfg.lambda_j2d * kp_dlm)
        reg_val, reg_grad = energy_reg(params, pose_anchor, model)
        value += cfg.lambda_prior * reg_val
        comps["reg"] = cfg.lambda_prior * reg_val
        direct += cfg.lambda_prior * reg_grad
        return params, mesh, cache, value, dverts, direct, comps, batch

    def object_terms(state: _State):
        pose = state.pose()
        posed = pose.apply(template)
        batch = oracle.query(posed)
        udf_val, udf_dv = clamped_udf_term(batch.u_o, batch.grad_u_o, cfg.clamp_delta)
        value = cfg.lambda_o * udf_val
        dverts = cfg.lambda_o * udf_dv
        comps = {"o_udf": cfg.lambda_o * udf_val}
        if cfg.lambda_center > 0:
            c_val, c_dv = center_reg_term(posed, batch, oracle)
            value += cfg.lambda_center * c_val
            dverts += cfg.lambda_center * c_dv
            comps["o_center"] = cfg.lambda_center * c_val
        if sil_field is not None and cfg.lambda_occ > 0:
            s_val, s_dv = silhouette_term(posed, scene.camera, sil_field)
            value += cfg.lambda_occ * s_val
            dverts += cfg.lambda_occ * s_dv
            comps["o_sil"] = cfg.lambda_occ * s_val
        return pose, posed, value, dverts, comps, batch

    # --- stage 1: human only ------------------------------------------------
    def eval_human(state: _State):
        params, _, cache, value, dverts, direct, comps, _ = body_terms(state.body)
        grad = lbs_vjp(model, params, cache, dverts) + direct
        return value, {"body": grad}, comps

    state = _State(init_body.to_vector(), np.eye(3), np.zeros(3), 1.0)
    descent = _Descent(cfg, use_body=True, use_object=False)
    state, converged, _ = descent.run(eval_human, state, cfg.iters_human,
                                      model, report, "human")
    report.stage_converged["human"] = converged

    # --- object pose initialization ------------------------------------------
    if init_object is None:
        body_mesh = lbs_forward(model, BodyParams.from_vector(state.body, model))
        init_pose = _initialize_object(oracle, body_mesh.vertices, cfg, report, seed)
    else:
        # explicit override; re-express against the centered template
        init_pose = ObjectPose(
            init_object.rotation,
            init_object.translation + init_object.rotation @ template_centroid,
            init_object.scale)
    state.rotation = init_pose.rotation
    state.translation = init_pose.translation
    state.scale = init_pose.scale

    # --- stage 2: object only -------------------------------------------------
    def eval_object(state: _State):
        pose, _, value, dverts, comps, _ = object_terms(state)
        pg = pose_gradient_from_vertices(pose, template, dverts)
        return value, {"omega": pg.omega, "obj_t": pg.translation,
                       "obj_s": np.array([pg.scale])}, comps

    descent = _Descent(cfg, use_body=False, use_object=True)
    state, converged, _ = descent.run(eval_object, state, cfg.iters_object,
                                      model, report, "object")
    report.stage_converged["object"] = converged

    # --- stage 3: joint refinement with contacts ------------------------------
    contacts: ContactSets | None = None

    def eval_joint(state: _State):
        params, mesh, cache, value, body_dv, direct, comps, _ = body_terms(state.body)
        pose, posed_obj, obj_value, obj_dv, obj_comps, _ = object_terms(state)
        value += obj_value
        comps.update(obj_comps)
        if contacts is not None and cfg.use_contacts and cfg.lambda_contact > 0:
            c_val, c_dbody, c_dobj = energy_contact(contacts, mesh.vertices, posed_obj)
            value += cfg.lambda_contact * c_val
            comps["contact"] = cfg.lambda_contact * c_val
            if cfg.contact_grad_to_body:
                body_dv = body_dv + cfg.lambda_contact * c_dbody
            obj_dv = obj_dv + cfg.lambda_contact * c_dobj
        grad = lbs_vjp(model, params, cache, body_dv) + direct
        pg = pose_gradient_from_vertices(pose, template, obj_dv)
        return value, {"body": grad, "omega": pg.omega, "obj_t": pg.translation,
                       "obj_s": np.array([pg.scale])}, comps

    descent = _Descent(cfg, use_body=True, use_object=True)
    it = 0
    remaining = cfg.iters_joint
    joint_converged = False
    while remaining > 0:
        if cfg.use_contacts and cfg.lambda_contact > 0:
            body_mesh = lbs_forward(model, BodyParams.from_vector(state.body, model))
            contacts = detect_contacts(body_mesh.vertices, state.pose().apply(template),
                                       model, oracle, cfg.contact_eps)
        block = min(cfg.contact_cadence, remaining)
        state, joint_converged, it = descent.run(eval_joint, state, block,
                                                 model, report, "joint", it)
        remaining -= block
        if joint_converged and remaining <= 0:
            break
        if joint_converged:
            # converged inside this contact phase; re-detect and continue
            joint_converged = False
    report.stage_converged["joint"] = joint_converged or descent.accepted == 0

    final_body = BodyParams.from_vector(state.body, model)
    final_mesh = lbs_forward(model, final_body)
    # pose re-expressed against the original (uncentered) template
    final_rotation = svd_project_so3(state.rotation)
    final_pose = ObjectPose(
        final_rotation,
        state.translation - final_rotation @ template_centroid,
        state.scale)
    final_contacts = detect_contacts(final_mesh.vertices,
                                     final_pose.apply(scene.template.vertices),
                                     model, oracle, cfg.contact_eps)
    return FitResult(final_body, final_pose, final_contacts, report)


def _initialize_object(oracle: FieldOracle, body_verts: np.ndarray,
                       cfg: FitConfig, report: FitReport, seed: int) -> ObjectPose:
    """Probe the object field near the predicted center, project the probes
    onto the surface, and aggregate the pose fields inside the shell. The
    shell is widened twice before giving up."""
    rng = np.random.default_rng(seed)
    probe_center = oracle.decode_object_center(
        oracle.query(body_verts.mean(axis=0, keepdims=True)).centers)[0]
    seeds = probe_center + rng.uniform(-0.4, 0.4, size=(2048, 3))
    projected = surface_projection(oracle, "object", seeds, iterations=10,
                                   step_clamp=0.5)
    probes = projected.points if len(projected.points) else seeds
    last_error: EmptyShell | None = None
    for widen in (1.0, 2.0, 4.0):
        try:
            pose = init_object_pose(oracle, probes, cfg.rotation_shell * widen)
            if widen > 1.0:
                note = f"pose initialization widened shell x{widen:g}"
                report.notes.append(note)
                warnings.warn(note)
            return pose
        except EmptyShell as exc:
            last_error = exc
    raise last_error
