"""Generic linear-blend-skinned body rig with shape blendshapes, the 14-part
vertex labeling, named landmarks, and analytic pose/shape derivatives."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PartIndexOutOfRange, RigFormatError
from .mesh import TriangleMesh
from .so3 import axis_angle_jacobian, axis_angle_to_matrix

NUM_PARTS = 14

PART_NAMES = (
    "head",
    "torso",
    "left_upper_arm",
    "left_forearm",
    "left_hand",
    "right_upper_arm",
    "right_forearm",
    "right_hand",
    "left_upper_leg",
    "left_lower_leg",
    "left_foot",
    "right_upper_leg",
    "right_lower_leg",
    "right_foot",
)

RIG_FORMAT = "hoifit-rig-1"


@dataclass(frozen=True)
class BodyModel:
    """Immutable skinned template.

    template: (V, 3) rest-pose vertices in meters
    faces: (F, 3)
    joint_names: length-J name list
    joint_parents: (J,) ints, -1 for the root; parents precede children
    joint_rest: (J, 3) rest joint positions
    weights: (V, J) skinning weights, rows non-negative and summing to 1
    blendshapes: (B, V, 3) shape displacement basis
    part_labels: (V,) ints in 1..14
    landmarks: ordered (name, vertex index) pairs used for 2D keypoints
    """

    template: np.ndarray
    faces: np.ndarray
    joint_names: tuple
    joint_parents: np.ndarray
    joint_rest: np.ndarray
    weights: np.ndarray
    blendshapes: np.ndarray
    part_labels: np.ndarray
    landmarks: tuple

    def __post_init__(self):
        object.__setattr__(self, "template", np.asarray(self.template, dtype=float))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=np.int64))
        object.__setattr__(self, "joint_parents", np.asarray(self.joint_parents, dtype=np.int64))
        object.__setattr__(self, "joint_rest", np.asarray(self.joint_rest, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "blendshapes", np.asarray(self.blendshapes, dtype=float))
        object.__setattr__(self, "part_labels", np.asarray(self.part_labels, dtype=np.int64))
        self._validate()

    def _validate(self):
        v = self.num_vertices
        j = self.num_joints
        if self.joint_rest.shape != (j, 3):
            raise RigFormatError("joint positions must be (J, 3)")
        if self.joint_parents[0] != -1 or np.any(self.joint_parents[1:] < 0) \
                or np.any(self.joint_parents[1:] >= np.arange(1, j)):
            raise RigFormatError("joints must form a single rooted tree with parents before children")
        if self.weights.shape != (v, j):
            raise RigFormatError(f"weights must be (V, J) = ({v}, {j})")
        if np.any(self.weights < -1e-9):
            raise RigFormatError("negative skinning weight")
        if np.any(np.abs(self.weights.sum(axis=1) - 1.0) > 1e-6):
            raise RigFormatError("skinning weight rows must sum to 1")
        if self.blendshapes.ndim != 3 or self.blendshapes.shape[1:] != (v, 3):
            raise RigFormatError("blendshapes must be (B, V, 3)")
        if self.part_labels.shape != (v,) or self.part_labels.min() < 1 \
                or self.part_labels.max() > NUM_PARTS:
            raise RigFormatError(f"part labels must be (V,) ints in 1..{NUM_PARTS}")
        for name, idx in self.landmarks:
            if not (0 <= idx < v):
                raise RigFormatError(f"landmark {name} index {idx} out of range")
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= v):
            raise RigFormatError("face index out of range")

    @property
    def num_vertices(self) -> int:
        return len(self.template)

    @property
    def num_joints(self) -> int:
        return len(self.joint_names)

    @property
    def num_shape_coeffs(self) -> int:
        return len(self.blendshapes)

    @property
    def num_params(self) -> int:
        """Length of the packed parameter vector: pose, translation, shape."""
        return 3 * self.num_joints + 3 + self.num_shape_coeffs

    @property
    def landmark_names(self) -> list:
        return [name for name, _ in self.landmarks]

    @property
    def landmark_indices(self) -> np.ndarray:
        return np.array([idx for _, idx in self.landmarks], dtype=np.int64)

    def save(self, path) -> None:
        save_rig(self, path)

    @classmethod
    def load(cls, path) -> "BodyModel":
        return load_rig(path)


@dataclass
class BodyParams:
    """Pose (axis-angle per joint, joint 0 is the global root rotation),
    global translation in meters, and shape coefficients."""

    pose: np.ndarray
    trans: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        self.pose = np.asarray(self.pose, dtype=float).reshape(-1, 3)
        self.trans = np.asarray(self.trans, dtype=float).reshape(3)
        self.betas = np.asarray(self.betas, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(self.pose)) and np.all(np.isfinite(self.trans))
                and np.all(np.isfinite(self.betas))):
            raise ValueError("body parameters must be finite")

    @classmethod
    def zero(cls, model: BodyModel) -> "BodyParams":
        return cls(np.zeros((model.num_joints, 3)), np.zeros(3),
                   np.zeros(model.num_shape_coeffs))

    def copy(self) -> "BodyParams":
        return BodyParams(self.pose.copy(), self.trans.copy(), self.betas.copy())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.pose.ravel(), self.trans, self.betas])

    @classmethod
    def from_vector(cls, vec: np.ndarray, model: BodyModel) -> "BodyParams":
        vec = np.asarray(vec, dtype=float)
        j3 = 3 * model.num_joints
        return cls(vec[:j3].reshape(-1, 3), vec[j3:j3 + 3], vec[j3 + 3:])

    def clipped_betas(self, limit: float) -> "BodyParams":
        out = self.copy()
        out.betas = np.clip(out.betas, -limit, limit)
        return out

    def save(self, path) -> None:
        save_body_params(self, path)

    @classmethod
    def load(cls, path) -> "BodyParams":
        return load_body_params(path)


@dataclass
class LbsCache:
    """Intermediates of one forward pass, reused by the derivative paths."""

    shaped: np.ndarray       # (V, 3) shape-blended rest vertices
    world_rot: np.ndarray    # (J, 3, 3)
    world_t: np.ndarray      # (J, 3)
    verts: np.ndarray        # (V, 3) posed vertices
    d_rot: np.ndarray | None = field(default=None)   # (J, 3J, 3, 3)
    d_t: np.ndarray | None = field(default=None)     # (J, 3J, 3)


def _world_transforms(model: BodyModel, pose: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j = model.num_joints
    local_rot = axis_angle_to_matrix(pose)
    world_rot = np.zeros((j, 3, 3))
    world_t = np.zeros((j, 3))
    world_rot[0] = local_rot[0]
    world_t[0] = model.joint_rest[0]
    for k in range(1, j):
        p = model.joint_parents[k]
        world_rot[k] = world_rot[p] @ local_rot[k]
        world_t[k] = world_rot[p] @ (model.joint_rest[k] - model.joint_rest[p]) + world_t[p]
    return world_rot, world_t


def _world_derivatives(model: BodyModel, pose: np.ndarray,
                       world_rot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of world joint transforms w.r.t. all 3J pose components."""
    j = model.num_joints
    np_pose = 3 * j
    local_rot = axis_angle_to_matrix(pose)
    d_rot = np.zeros((j, np_pose, 3, 3))
    d_t = np.zeros((j, np_pose, 3))

    d_rot[0, 0:3] = axis_angle_jacobian(pose[0])
    for k in range(1, j):
        p = model.joint_parents[k]
        offset = model.joint_rest[k] - model.joint_rest[p]
        d_rot[k] = np.einsum("qab,bc->qac", d_rot[p], local_rot[k])
        own = axis_angle_jacobian(pose[k])
        d_rot[k, 3 * k:3 * k + 3] += np.einsum("ab,qbc->qac", world_rot[p], own)
        d_t[k] = np.einsum("qab,b->qa", d_rot[p], offset) + d_t[p]
    return d_rot, d_t


def lbs_forward(model: BodyModel, params: BodyParams,
                return_cache: bool = False):
    """Pose the template: shape blend, rigid joint tree, skinning, then the
    global translation. Returns a TriangleMesh, or (mesh, cache)."""
    shaped = model.template.copy()
    if len(params.betas):
        shaped = shaped + np.einsum("b,bvc->vc", params.betas, model.blendshapes)
    world_rot, world_t = _world_transforms(model, params.pose)
    # per-joint posed copies of every vertex, blended by the skinning weights
    local = shaped[None, :, :] - model.joint_rest[:, None, :]
    per_joint = np.einsum("jab,jvb->jva", world_rot, local) + world_t[:, None, :]
    verts = np.einsum("vj,jva->va", model.weights, per_joint) + params.trans
    mesh = TriangleMesh(verts, model.faces)
    if not return_cache:
        return mesh
    return mesh, LbsCache(shaped, world_rot, world_t, verts)


def _ensure_derivs(model: BodyModel, params: BodyParams, cache: LbsCache) -> None:
    if cache.d_rot is None:
        cache.d_rot, cache.d_t = _world_derivatives(model, params.pose, cache.world_rot)


def lbs_jacobian(model: BodyModel, params: BodyParams,
                 cache: LbsCache | None = None,
                 vertex_indices: np.ndarray | None = None) -> np.ndarray:
    """Full Jacobian of posed vertices w.r.t. the packed parameter vector.

    Returns (V, 3, P) with P = 3J + 3 + B, parameter order matching
    BodyParams.to_vector. Restricting vertex_indices keeps landmark-only
    consumers cheap.
    """
    if cache is None:
        _, cache = lbs_forward(model, params, return_cache=True)
    _ensure_derivs(model, params, cache)
    idx = np.arange(model.num_vertices) if vertex_indices is None else np.asarray(vertex_indices)
    shaped = cache.shaped[idx]
    w = model.weights[idx]
    v, j = len(idx), model.num_joints
    np_pose = 3 * j
    jac = np.zeros((v, 3, model.num_params))

    for k in range(j):
        wk = w[:, k]
        if not np.any(wk):
            continue
        local = shaped - model.joint_rest[k]
        # (q, a, b) x (v, b) -> (v, a, q)
        dpose = np.einsum("qab,vb->vaq", cache.d_rot[k], local) + cache.d_t[k].T[None, :, :]
        jac[:, :, :np_pose] += wk[:, None, None] * dpose
    jac[:, :, np_pose:np_pose + 3] = np.eye(3)
    if model.num_shape_coeffs:
        # skinned blendshape directions
        sd = np.einsum("vj,jab,uvb->vau", w, cache.world_rot, model.blendshapes[:, idx, :])
        jac[:, :, np_pose + 3:] = sd
    return jac


def lbs_vjp(model: BodyModel, params: BodyParams, cache: LbsCache,
            dE_dverts: np.ndarray) -> np.ndarray:
    """Backpropagate a per-vertex gradient (V, 3) to the packed parameter
    vector, without forming the full Jacobian."""
    _ensure_derivs(model, params, cache)
    g = np.asarray(dE_dverts, dtype=float)
    j = model.num_joints
    np_pose = 3 * j
    out = np.zeros(model.num_params)

    for k in range(j):
        wk = model.weights[:, k]
        if not np.any(wk):
            continue
        m_k = np.einsum("v,va,vb->ab", wk, g, cache.shaped - model.joint_rest[k])
        t_k = np.einsum("v,va->a", wk, g)
        out[:np_pose] += np.einsum("qab,ab->q", cache.d_rot[k], m_k)
        out[:np_pose] += cache.d_t[k] @ t_k
    out[np_pose:np_pose + 3] = g.sum(axis=0)
    if model.num_shape_coeffs:
        sd = np.einsum("vj,jab,uvb->uva", model.weights, cache.world_rot, model.blendshapes)
        out[np_pose + 3:] = np.einsum("uva,va->u", sd, g)
    return out


def part_points(mesh: TriangleMesh | np.ndarray, model: BodyModel, j: int) -> np.ndarray:
    """Posed vertices whose part label equals j (1-based). Labels are
    pose-invariant, so the parts partition the vertex set for any pose."""
    if not (1 <= j <= NUM_PARTS):
        raise PartIndexOutOfRange(f"part index {j} outside 1..{NUM_PARTS}")
    verts = mesh.vertices if isinstance(mesh, TriangleMesh) else np.asarray(mesh)
    return verts[model.part_labels == j]


def part_vertex_indices(model: BodyModel, j: int) -> np.ndarray:
    if not (1 <= j <= NUM_PARTS):
        raise PartIndexOutOfRange(f"part index {j} outside 1..{NUM_PARTS}")
    return np.flatnonzero(model.part_labels == j)


def body_keypoints(mesh: TriangleMesh | np.ndarray, model: BodyModel) -> np.ndarray:
    """Landmark positions on a posed mesh, ordered per the model's landmark
    set, (L, 3)."""
    verts = mesh.vertices if isinstance(mesh, TriangleMesh) else np.asarray(mesh)
    return verts[model.landmark_indices]


# --- rig and parameter files ----------------------------------------------

def save_rig(model: BodyModel, path) -> None:
    doc = {
        "format": RIG_FORMAT,
        "vertices": model.template.tolist(),
        "faces": model.faces.tolist(),
        "joints": {
            "names": list(model.joint_names),
            "parents": model.joint_parents.tolist(),
            "positions": model.joint_rest.tolist(),
        },
        "skinning_weights": model.weights.tolist(),
        "blendshapes": model.blendshapes.tolist(),
        "part_labels": model.part_labels.tolist(),
        "landmarks": [[name, int(idx)] for name, idx in model.landmarks],
    }
    Path(path).write_text(json.dumps(doc))


def load_rig(path) -> BodyModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RigFormatError(f"{path}: invalid JSON: {exc}") from exc
    if doc.get("format") != RIG_FORMAT:
        raise RigFormatError(f"{path}: expected format {RIG_FORMAT!r}")
    try:
        return BodyModel(
            template=np.array(doc["vertices"], dtype=float),
            faces=np.array(doc["faces"], dtype=np.int64).reshape(-1, 3),
            joint_names=tuple(doc["joints"]["names"]),
            joint_parents=np.array(doc["joints"]["parents"], dtype=np.int64),
            joint_rest=np.array(doc["joints"]["positions"], dtype=float),
            weights=np.array(doc["skinning_weights"], dtype=float),
            blendshapes=np.array(doc["blendshapes"], dtype=float),
            part_labels=np.array(doc["part_labels"], dtype=np.int64),
            landmarks=tuple((name, int(idx)) for name, idx in doc["landmarks"]),
        )
    except KeyError as exc:
        raise RigFormatError(f"{path}: missing field {exc}") from exc


def save_body_params(params: BodyParams, path) -> None:
    lines = [f"trans {params.trans[0]:.12g} {params.trans[1]:.12g} {params.trans[2]:.12g}"]
    lines.append("betas " + " ".join(f"{b:.12g}" for b in params.betas))
    for row in params.pose:
        lines.append(f"pose {row[0]:.12g} {row[1]:.12g} {row[2]:.12g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_body_params(path) -> BodyParams:
    trans = np.zeros(3)
    betas: list = []
    pose_rows = []
    for line in Path(path).read_text().splitlines():
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        if tok[0] == "trans":
            trans = np.array([float(x) for x in tok[1:4]])
        elif tok[0] == "betas":
            betas = [float(x) for x in tok[1:]]
        elif tok[0] == "pose":
            pose_rows.append([float(x) for x in tok[1:4]])
    if not pose_rows:
        raise ValueError(f"{path}: no pose rows")
    return BodyParams(np.array(pose_rows), trans, np.array(betas))
