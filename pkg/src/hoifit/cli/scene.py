"""Scene directories: fixed file names, loading, validation.

A scene is a directory holding the per-frame payload:
  camera.txt        pinhole intrinsics (key-value)
  rig.json          body model (skinned template)
  human.ply         ground-truth posed body, in rig vertex order
  object.ply        ground-truth posed object
  template.ply      canonical object template
  mask_human.pgm    observed human silhouette (binary P5)
  mask_object.pgm   observed object silhouette
  keypoints.txt     optional "name x y confidence" per landmark
  gt_body.txt       ground-truth body parameters (synthetic scenes)
  gt_object.txt     ground-truth object pose (synthetic scenes)
  init_body.txt     optional externally supplied body initialization
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..body import BodyModel, BodyParams, load_rig
from ..camera import PerspectiveCamera, load_camera
from ..errors import (CorrespondenceMismatch, MaskMissing,
                      SceneValidationError)
from ..fitting.pose import ObjectPose
from ..mesh import TriangleMesh, load_mesh
from ..raster import SilhouetteMask, load_pgm

CAMERA_FILE = "camera.txt"
RIG_FILE = "rig.json"
HUMAN_FILE = "human.ply"
OBJECT_FILE = "object.ply"
TEMPLATE_FILE = "template.ply"
MASK_HUMAN_FILE = "mask_human.pgm"
MASK_OBJECT_FILE = "mask_object.pgm"
KEYPOINTS_FILE = "keypoints.txt"
GT_BODY_FILE = "gt_body.txt"
GT_OBJECT_FILE = "gt_object.txt"
INIT_BODY_FILE = "init_body.txt"


@dataclass
class Scene:
    path: Path
    camera: PerspectiveCamera
    rig: BodyModel
    human: TriangleMesh
    obj: TriangleMesh
    template: TriangleMesh
    mask_human: SilhouetteMask
    mask_object: SilhouetteMask
    keypoints: list | None = None          # (name, u, v, confidence) rows
    gt_body: BodyParams | None = None
    gt_object: ObjectPose | None = None
    init_body: BodyParams | None = None

    @property
    def name(self) -> str:
        return self.path.name

    def keypoints_for_rig(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Pixels and confidences aligned to the rig landmark order; landmarks
        missing from the file get confidence 0."""
        if self.keypoints is None:
            return None
        by_name = {name: (u, v, c) for name, u, v, c in self.keypoints}
        pixels = np.zeros((len(self.rig.landmarks), 2))
        conf = np.zeros(len(self.rig.landmarks))
        for i, name in enumerate(self.rig.landmark_names):
            if name in by_name:
                u, v, c = by_name[name]
                pixels[i] = (u, v)
                conf[i] = c
        return pixels, conf


def load_keypoints(path) -> list:
    rows = []
    for line in Path(path).read_text().splitlines():
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        if len(tok) != 4:
            raise SceneValidationError(f"{path}: keypoint lines are 'name x y confidence'")
        rows.append((tok[0], float(tok[1]), float(tok[2]), float(tok[3])))
    for _, _, _, c in rows:
        if not 0.0 <= c <= 1.0:
            raise SceneValidationError(f"{path}: confidences must lie in [0, 1]")
    return rows


def load_scene(path) -> Scene:
    """Load and validate a scene directory."""
    path = Path(path)
    if not path.is_dir():
        raise SceneValidationError(f"{path} is not a directory")

    def require(name: str) -> Path:
        p = path / name
        if not p.exists():
            if name.startswith("mask_"):
                raise MaskMissing(f"{path}: missing {name}")
            raise SceneValidationError(f"{path}: missing {name}")
        return p

    camera = load_camera(require(CAMERA_FILE))
    rig = load_rig(require(RIG_FILE))
    human = load_mesh(require(HUMAN_FILE))
    obj = load_mesh(require(OBJECT_FILE))
    template = load_mesh(require(TEMPLATE_FILE))
    mask_human = load_pgm(require(MASK_HUMAN_FILE))
    mask_object = load_pgm(require(MASK_OBJECT_FILE))

    if human.num_vertices != rig.num_vertices:
        raise CorrespondenceMismatch(
            f"{path}: human mesh has {human.num_vertices} vertices, "
            f"rig has {rig.num_vertices}")
    for name, mask in ((MASK_HUMAN_FILE, mask_human), (MASK_OBJECT_FILE, mask_object)):
        if not mask.matches_camera(camera):
            raise SceneValidationError(
                f"{path}: {name} is {mask.shape}, camera expects "
                f"({camera.height}, {camera.width})")

    keypoints = None
    if (path / KEYPOINTS_FILE).exists():
        keypoints = load_keypoints(path / KEYPOINTS_FILE)
    gt_body = BodyParams.load(path / GT_BODY_FILE) if (path / GT_BODY_FILE).exists() else None
    gt_object = ObjectPose.load(path / GT_OBJECT_FILE) if (path / GT_OBJECT_FILE).exists() else None
    init_body = BodyParams.load(path / INIT_BODY_FILE) if (path / INIT_BODY_FILE).exists() else None
    return Scene(path, camera, rig, human, obj, template, mask_human,
                 mask_object, keypoints, gt_body, gt_object, init_body)


def save_keypoints(rows: list, path) -> None:
    lines = [f"{name} {u:.9g} {v:.9g} {c:.9g}" for name, u, v, c in rows]
    Path(path).write_text("\n".join(lines) + "\n")
