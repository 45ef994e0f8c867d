"""Synthetic contact scenes: a posed toy rig touching a parametric object,
with rendered masks, keypoints, and ground truth, written as a scene
directory. Deterministic per seed."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..body import BodyParams, body_keypoints, lbs_forward, save_body_params
from ..camera import PerspectiveCamera, save_camera
from ..fitting.pose import ObjectPose
from ..mesh import TriangleMesh, save_mesh
from ..primitives import object_template
from ..raster import SilhouetteMask, render_silhouette, save_pgm
from ..so3 import axis_angle_to_matrix
from ..toyrig import build_toy_rig, part_id
from . import scene as scene_files

CONTACT_PARTS = ("left_hand", "right_hand", "left_foot", "right_foot",
                 "left_forearm", "right_forearm", "left_lower_leg",
                 "right_lower_leg")


@dataclass(frozen=True)
class SynthConfig:
    object_shape: str = "box"          # box | rod | cylinder | composite
    contact_part: str = "left_hand"
    pose_jitter_deg: float = 8.0       # per-joint pose range
    root_yaw_deg: float = 10.0
    target_depth: float = 2.2          # combined mean depth after placement
    image_size: int = 256
    gap: float = 0.002                 # clearance between object and body, meters
    slide: float = 0.0                 # tangential offset of the contact, meters
    object_yaw_deg: float = 25.0       # range of the random object rotation
    seed: int = 0

    def validate(self) -> None:
        if self.object_shape not in ("box", "rod", "cylinder", "composite"):
            raise ValueError(f"unknown object shape {self.object_shape!r}")
        if self.contact_part not in CONTACT_PARTS:
            raise ValueError(f"contact part must be one of {CONTACT_PARTS}")
        if self.image_size < 32:
            raise ValueError("image size must be at least 32")
        if self.target_depth <= 0:
            raise ValueError("target depth must be positive")


@dataclass
class SynthResult:
    path: Path
    gt_body: BodyParams
    gt_object: ObjectPose
    camera: PerspectiveCamera


def _fit_camera(points: np.ndarray, size: int, margin: float = 12.0,
                f_cap: float = 800.0) -> PerspectiveCamera:
    """Focal length that keeps every point inside the frame with a margin."""
    c = size / 2.0
    half = c - margin
    z = points[:, 2]
    fx_limit = np.min(np.where(np.abs(points[:, 0]) > 1e-9,
                               half * z / np.abs(points[:, 0]), f_cap))
    fy_limit = np.min(np.where(np.abs(points[:, 1]) > 1e-9,
                               half * z / np.abs(points[:, 1]), f_cap))
    f = float(min(fx_limit, fy_limit, f_cap))
    return PerspectiveCamera(f, f, c, c, size, size)


def _visible_masks(human: TriangleMesh, obj: TriangleMesh,
                   camera: PerspectiveCamera) -> tuple[SilhouetteMask, SilhouetteMask]:
    """Resolve mutual occlusion between the two renders."""
    h = render_silhouette(human, camera)
    o = render_silhouette(obj, camera)
    human_visible = h.mask & (~o.mask | (h.depth <= o.depth))
    object_visible = o.mask & (~h.mask | (o.depth < h.depth))
    return (SilhouetteMask(human_visible, "observed"),
            SilhouetteMask(object_visible, "observed"))


def generate_scene(config: SynthConfig) -> tuple[dict, SynthResult]:
    """Build all scene artifacts in memory. Returned dict maps file names to
    writer callables; cmd_synth writes them to a directory."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    rig = build_toy_rig()

    params = BodyParams.zero(rig)
    jit = np.deg2rad(config.pose_jitter_deg)
    params.pose = rng.uniform(-jit, jit, size=params.pose.shape)
    params.pose[0] = [0.0, np.deg2rad(rng.uniform(-config.root_yaw_deg,
                                                  config.root_yaw_deg)), 0.0]
    params.trans = np.array([rng.uniform(-0.05, 0.05),
                             rng.uniform(-0.05, 0.05),
                             config.target_depth])
    body = lbs_forward(rig, params)

    template = object_template(config.object_shape)
    part_verts = body.vertices[rig.part_labels == part_id(config.contact_part)]
    anchor = part_verts.mean(axis=0)
    outward = anchor - body.vertices.mean(axis=0)
    outward /= np.linalg.norm(outward)

    yaw = np.deg2rad(config.object_yaw_deg)
    rot = axis_angle_to_matrix(rng.uniform(-yaw, yaw, size=3))
    # rest the rotated template against the contact part along the outward
    # direction, optionally slid tangentially
    support = np.max((template.vertices @ rot.T) @ (-outward))
    tangent = np.cross(outward, [0.0, 1.0, 0.0])
    if np.linalg.norm(tangent) < 1e-6:
        tangent = np.cross(outward, [1.0, 0.0, 0.0])
    tangent /= np.linalg.norm(tangent)
    center = anchor + outward * (support + config.gap) + tangent * config.slide
    pose = ObjectPose(rot, center, 1.0)
    obj = TriangleMesh(pose.apply(template.vertices), template.faces)

    # place the human mean depth exactly on the target without rescaling, so
    # the ground-truth body parameters stay exact and the center field's
    # fixed-depth convention holds exactly
    dz = config.target_depth - body.vertices[:, 2].mean()
    params.trans[2] += dz
    pose = ObjectPose(rot, center + [0.0, 0.0, dz], 1.0)
    body = lbs_forward(rig, params)
    obj = TriangleMesh(pose.apply(template.vertices), template.faces)

    all_points = np.vstack([body.vertices, obj.vertices])
    camera = _fit_camera(all_points, config.image_size)
    mask_human, mask_object = _visible_masks(body, obj, camera)
    landmarks = body_keypoints(body, rig)
    kp_rows = [(name, *camera.project(pt), 1.0)
               for (name, _), pt in zip(rig.landmarks, landmarks)]

    writers = {
        scene_files.CAMERA_FILE: lambda p: save_camera(camera, p),
        scene_files.RIG_FILE: lambda p: rig.save(p),
        scene_files.HUMAN_FILE: lambda p: save_mesh(body, p),
        scene_files.OBJECT_FILE: lambda p: save_mesh(obj, p),
        scene_files.TEMPLATE_FILE: lambda p: save_mesh(template, p),
        scene_files.MASK_HUMAN_FILE: lambda p: save_pgm(mask_human, p),
        scene_files.MASK_OBJECT_FILE: lambda p: save_pgm(mask_object, p),
        scene_files.KEYPOINTS_FILE: lambda p: scene_files.save_keypoints(kp_rows, p),
        scene_files.GT_BODY_FILE: lambda p: save_body_params(params, p),
        scene_files.GT_OBJECT_FILE: lambda p: pose.save(p),
    }
    return writers, SynthResult(Path(), params, pose, camera)


def cmd_synth(config: SynthConfig, out_dir) -> SynthResult:
    """Write a complete scene directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    writers, result = generate_scene(config)
    for name, write in writers.items():
        write(out_dir / name)
    result.path = out_dir
    return result
