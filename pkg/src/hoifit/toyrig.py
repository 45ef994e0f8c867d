"""Synthetic humanoid rig: ~550 vertices, 15 joints, the standard 14-part
labeling. Built procedurally so tests and the scene generator need no
external model data. Coordinates are camera-style (y down), pelvis at the
origin, arms in a T-pose along x."""

from __future__ import annotations

import numpy as np

from .body import PART_NAMES, BodyModel
from .primitives import icosphere

_JOINTS = [
    # name, parent, rest position
    ("pelvis", -1, (0.00, 0.00, 0.0)),
    ("spine", 0, (0.00, -0.25, 0.0)),
    ("neck", 1, (0.00, -0.50, 0.0)),
    ("left_shoulder", 1, (0.18, -0.46, 0.0)),
    ("left_elbow", 3, (0.45, -0.46, 0.0)),
    ("left_wrist", 4, (0.68, -0.46, 0.0)),
    ("right_shoulder", 1, (-0.18, -0.46, 0.0)),
    ("right_elbow", 6, (-0.45, -0.46, 0.0)),
    ("right_wrist", 7, (-0.68, -0.46, 0.0)),
    ("left_hip", 0, (0.09, 0.05, 0.0)),
    ("left_knee", 9, (0.10, 0.48, 0.0)),
    ("left_ankle", 10, (0.10, 0.88, 0.0)),
    ("right_hip", 0, (-0.09, 0.05, 0.0)),
    ("right_knee", 12, (-0.10, 0.48, 0.0)),
    ("right_ankle", 13, (-0.10, 0.88, 0.0)),
]

_PART_ID = {name: i + 1 for i, name in enumerate(PART_NAMES)}

# tube segments: start point, end point, radius, rings, sides, skin joint, part
_SEGMENTS = [
    ("pelvis", "spine", 0.13, 4, 12, 0, "torso"),
    ("spine", "neck", 0.12, 4, 12, 1, "torso"),
    ("left_shoulder", "left_elbow", 0.045, 5, 8, 3, "left_upper_arm"),
    ("left_elbow", "left_wrist", 0.035, 5, 8, 4, "left_forearm"),
    ("left_wrist", (0.80, -0.46, 0.0), 0.030, 3, 6, 5, "left_hand"),
    ("right_shoulder", "right_elbow", 0.045, 5, 8, 6, "right_upper_arm"),
    ("right_elbow", "right_wrist", 0.035, 5, 8, 7, "right_forearm"),
    ("right_wrist", (-0.80, -0.46, 0.0), 0.030, 3, 6, 8, "right_hand"),
    ("left_hip", "left_knee", 0.060, 5, 8, 9, "left_upper_leg"),
    ("left_knee", "left_ankle", 0.045, 5, 8, 10, "left_lower_leg"),
    ("left_ankle", (0.10, 0.94, -0.12), 0.035, 3, 6, 11, "left_foot"),
    ("right_hip", "right_knee", 0.060, 5, 8, 12, "right_upper_leg"),
    ("right_knee", "right_ankle", 0.045, 5, 8, 13, "right_lower_leg"),
    ("right_ankle", (-0.10, 0.94, -0.12), 0.035, 3, 6, 14, "right_foot"),
]

_HEAD_CENTER = np.array([0.0, -0.63, 0.0])
_HEAD_RADIUS = 0.09


def _frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair perpendicular to axis."""
    ref = np.array([0.0, 0.0, 1.0])
    if abs(axis @ ref) > 0.9 * np.linalg.norm(axis):
        ref = np.array([1.0, 0.0, 0.0])
    u = np.cross(axis, ref)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    v /= np.linalg.norm(v)
    return u, v


def _tube(a, b, radius, rings, sides, cap_end=False):
    """Open tube from a to b. Returns (verts, faces, radial unit dirs)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    axis = b - a
    u, v = _frame(axis)
    phis = np.arange(sides) * 2 * np.pi / sides
    radial = np.outer(np.cos(phis), u) + np.outer(np.sin(phis), v)
    verts = []
    dirs = []
    for t in np.linspace(0.0, 1.0, rings):
        center = a + t * axis
        verts.append(center + radius * radial)
        dirs.append(radial)
    verts = np.vstack(verts)
    dirs = np.vstack(dirs)
    faces = []
    for i in range(rings - 1):
        for k in range(sides):
            p0 = i * sides + k
            p1 = i * sides + (k + 1) % sides
            p2 = (i + 1) * sides + (k + 1) % sides
            p3 = (i + 1) * sides + k
            faces.append([p0, p1, p2])
            faces.append([p0, p2, p3])
    if cap_end:
        apex = len(verts)
        tip_dir = axis / np.linalg.norm(axis)
        verts = np.vstack([verts, b + radius * 0.5 * tip_dir])
        dirs = np.vstack([dirs, tip_dir])
        last = (rings - 1) * sides
        for k in range(sides):
            faces.append([last + k, last + (k + 1) % sides, apex])
    return verts, np.array(faces, dtype=np.int64), dirs


def build_toy_rig() -> BodyModel:
    """Construct the synthetic rig. Deterministic, no external data."""
    joint_names = tuple(j[0] for j in _JOINTS)
    joint_parents = np.array([j[1] for j in _JOINTS], dtype=np.int64)
    joint_rest = np.array([j[2] for j in _JOINTS], dtype=float)
    name_to_joint = {n: i for i, n in enumerate(joint_names)}

    verts_parts = []
    faces_parts = []
    weight_joint = []
    labels = []
    inflate_dirs = []
    offset = 0

    def endpoint(spec):
        return joint_rest[name_to_joint[spec]] if isinstance(spec, str) else np.asarray(spec, dtype=float)

    for a_spec, b_spec, radius, rings, sides, joint, part in _SEGMENTS:
        cap = not isinstance(b_spec, str)  # hands and feet end in a tip
        v, f, d = _tube(endpoint(a_spec), endpoint(b_spec), radius, rings, sides, cap_end=cap)
        verts_parts.append(v)
        faces_parts.append(f + offset)
        weight_joint += [joint] * len(v)
        labels += [_PART_ID[part]] * len(v)
        inflate_dirs.append(d)
        offset += len(v)

    head = icosphere(subdivisions=1, radius=_HEAD_RADIUS, center=_HEAD_CENTER)
    verts_parts.append(head.vertices)
    faces_parts.append(head.faces + offset)
    weight_joint += [name_to_joint["neck"]] * head.num_vertices
    labels += [_PART_ID["head"]] * head.num_vertices
    head_dirs = head.vertices - _HEAD_CENTER
    inflate_dirs.append(head_dirs / np.linalg.norm(head_dirs, axis=1, keepdims=True))

    template = np.vstack(verts_parts)
    faces = np.vstack(faces_parts)
    n = len(template)

    weights = np.zeros((n, len(_JOINTS)))
    weights[np.arange(n), np.array(weight_joint)] = 1.0

    # two shape coefficients: overall girth, overall stature
    girth = 0.03 * np.vstack(inflate_dirs)
    stature = np.zeros_like(template)
    stature[:, 1] = 0.05 * template[:, 1]
    blendshapes = np.stack([girth, stature])

    landmarks = []
    for i, name in enumerate(joint_names):
        idx = int(np.argmin(np.linalg.norm(template - joint_rest[i], axis=1)))
        landmarks.append((name, idx))

    return BodyModel(
        template=template,
        faces=faces,
        joint_names=joint_names,
        joint_parents=joint_parents,
        joint_rest=joint_rest,
        weights=weights,
        blendshapes=blendshapes,
        part_labels=np.array(labels, dtype=np.int64),
        landmarks=tuple(landmarks),
    )


def part_id(name: str) -> int:
    """1-based part index for a part name."""
    return _PART_ID[name]
