"""Scene fitting command: oracle construction, initialization policy, the
joint fit, and output files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..body import BodyParams, lbs_forward, save_body_params
from ..errors import SceneValidationError
from ..fields import NoiseSpec, mesh_oracle
from ..fitting import FitConfig, FitScene, ObjectPose, joint_fit
from ..mesh import TriangleMesh, save_mesh
from ..scaling import DEFAULT_TARGET_DEPTH
from ..so3 import axis_angle_to_matrix
from .scene import Scene, load_scene

FIT_BODY_MESH = "fit_body.obj"
FIT_OBJECT_MESH = "fit_object.obj"
FIT_BODY_PARAMS = "fit_body_params.txt"
FIT_OBJECT_POSE = "fit_object_pose.txt"
FIT_CONTACTS = "fit_contacts.txt"
FIT_REPORT = "fit_report.txt"


@dataclass(frozen=True)
class InitSpec:
    """Where the initial parameters come from.

    body_source: "gt", "file", or a path to a parameter file. Perturbations
    are applied on top (ground-truth based initialization is the synthetic
    test workflow; real pipelines supply init_body.txt from an external body
    regressor). The object starts from the pose fields unless
    object_source == "gt" (plus perturbation).
    """

    body_source: str = "file"
    perturb_pose_deg: float = 0.0
    perturb_trans: float = 0.0
    object_source: str = "field"
    perturb_object_deg: float = 0.0
    perturb_object_trans: float = 0.0
    seed: int = 0


def resolve_body_init(scene: Scene, spec: InitSpec) -> BodyParams:
    if spec.body_source == "file":
        if scene.init_body is None:
            raise SceneValidationError(
                f"{scene.path}: no init_body.txt; pass an init file or use "
                "ground-truth initialization")
        init = scene.init_body.copy()
    elif spec.body_source == "gt":
        if scene.gt_body is None:
            raise SceneValidationError(f"{scene.path}: no gt_body.txt for gt init")
        init = scene.gt_body.copy()
    else:
        init = BodyParams.load(spec.body_source)
    rng = np.random.default_rng(spec.seed)
    if spec.perturb_pose_deg > 0:
        amp = np.deg2rad(spec.perturb_pose_deg)
        init.pose = init.pose + rng.uniform(-amp, amp, size=init.pose.shape)
    if spec.perturb_trans > 0:
        init.trans = init.trans + rng.uniform(-spec.perturb_trans,
                                              spec.perturb_trans, size=3)
    return init


def resolve_object_init(scene: Scene, spec: InitSpec) -> ObjectPose | None:
    if spec.object_source == "field":
        return None
    if scene.gt_object is None:
        raise SceneValidationError(f"{scene.path}: no gt_object.txt for gt object init")
    pose = scene.gt_object.copy()
    rng = np.random.default_rng(spec.seed + 1)
    if spec.perturb_object_deg > 0:
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = np.deg2rad(spec.perturb_object_deg) * rng.uniform(0.2, 1.0)
        pose.rotation = axis_angle_to_matrix(axis * angle) @ pose.rotation
    if spec.perturb_object_trans > 0:
        offset = rng.uniform(-1.0, 1.0, size=3)
        offset *= spec.perturb_object_trans / max(np.linalg.norm(offset), 1e-9)
        pose.translation = pose.translation + offset
    return pose


def cmd_fit(scene_dir, out_dir=None, cfg: FitConfig | None = None,
            init: InitSpec | None = None, noise: NoiseSpec | None = None,
            seed: int = 0):
    """Fit one scene and write the output files. Returns the FitResult."""
    scene = load_scene(scene_dir)
    cfg = cfg or FitConfig()
    init = init or InitSpec()
    out_dir = Path(out_dir) if out_dir is not None else scene.path / "fit"
    out_dir.mkdir(parents=True, exist_ok=True)

    gt_rotation = scene.gt_object.rotation if scene.gt_object is not None else np.eye(3)
    oracle = mesh_oracle(scene.human, scene.obj, scene.rig, gt_rotation,
                         noise=noise, fixed_depth=DEFAULT_TARGET_DEPTH)
    kp = scene.keypoints_for_rig()
    fit_scene = FitScene(scene.rig, scene.template, scene.camera,
                         scene.mask_object, scene.mask_human,
                         kp[0] if kp else None, kp[1] if kp else None)

    init_body = resolve_body_init(scene, init)
    init_object = resolve_object_init(scene, init)
    result = joint_fit(fit_scene, oracle, init_body, cfg, seed=seed,
                       init_object=init_object)

    body_mesh = lbs_forward(scene.rig, result.body)
    object_mesh = TriangleMesh(result.object_pose.apply(scene.template.vertices),
                               scene.template.faces)
    save_mesh(body_mesh, out_dir / FIT_BODY_MESH)
    save_mesh(object_mesh, out_dir / FIT_OBJECT_MESH)
    save_body_params(result.body, out_dir / FIT_BODY_PARAMS)
    result.object_pose.save(out_dir / FIT_OBJECT_POSE)
    result.contacts.save(out_dir / FIT_CONTACTS)
    (out_dir / FIT_REPORT).write_text("\n".join(result.report.to_lines()) + "\n")
    return result
