"""Depth-aware scaling: move captured meshes to a canonical camera distance
without changing their image projection.

Scaling every vertex by s both resizes the mesh and slides it along the
viewing rays, so the perspective projection is unchanged; choosing
s = z0 / mean_depth parks the mesh's mean depth exactly at z0. The same
idea gives the test-time patch resize factor relating a capture camera to
the canonical training camera.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .camera import PerspectiveCamera
from .errors import NonPositiveDepth, NonPositiveMeanDepth
from .mesh import TriangleMesh

DEFAULT_TARGET_DEPTH = 2.2


@dataclass(frozen=True)
class ScalingRecord:
    """Applied scale s = z0 / mu_z; inverting with 1/s restores metric size."""

    s: float
    mu_z: float
    z0: float

    def __post_init__(self):
        if self.mu_z <= 0:
            raise NonPositiveMeanDepth(f"mean depth must be positive, got {self.mu_z}")
        if abs(self.s - self.z0 / self.mu_z) > 1e-12 * max(1.0, abs(self.s)):
            raise ValueError("inconsistent scaling record: s != z0 / mu_z")

    def save(self, path) -> None:
        Path(path).write_text(
            f"s {self.s:.17g}\nmu_z {self.mu_z:.17g}\nz0 {self.z0:.17g}\n")

    @classmethod
    def load(cls, path) -> "ScalingRecord":
        vals = {}
        for line in Path(path).read_text().splitlines():
            tok = line.split()
            if len(tok) == 2:
                vals[tok[0]] = float(tok[1])
        return cls(vals["s"], vals["mu_z"], vals["z0"])


def _mean_depth(vertices: np.ndarray) -> float:
    if np.any(vertices[:, 2] <= 0):
        raise NonPositiveMeanDepth("all vertices must lie in front of the camera (z > 0)")
    return float(vertices[:, 2].mean())


def depth_aware_scale(mesh: TriangleMesh, z0: float = DEFAULT_TARGET_DEPTH
                      ) -> tuple[TriangleMesh, ScalingRecord]:
    """Scale the mesh so its mean vertex depth equals z0. Projection of every
    vertex is unchanged."""
    mu_z = _mean_depth(mesh.vertices)
    s = z0 / mu_z
    return mesh.scaled(s), ScalingRecord(s, mu_z, z0)


def joint_scale(human: TriangleMesh, obj: TriangleMesh,
                z0: float = DEFAULT_TARGET_DEPTH
                ) -> tuple[TriangleMesh, TriangleMesh, ScalingRecord]:
    """One shared factor from the combined human+object vertex set, applied
    to both meshes so their relative arrangement survives up to the uniform
    scale and the combined mean depth lands on z0."""
    combined = np.vstack([human.vertices, obj.vertices])
    mu_z = _mean_depth(combined)
    s = z0 / mu_z
    return human.scaled(s), obj.scaled(s), ScalingRecord(s, mu_z, z0)


def patch_resize_factor(reference_mean_depth: float, z0: float,
                        train_camera: PerspectiveCamera,
                        test_camera_estimate: PerspectiveCamera) -> float:
    """Image resize factor that makes a person captured by the test camera at
    the reference depth appear the size they would have at depth z0 under the
    training intrinsics.

    Similar triangles: pixel extent scales with focal / depth for each
    camera, so r = (f_train / z0) / (f_test / reference_mean_depth), with f
    the geometric mean of fx and fy.
    """
    if reference_mean_depth <= 0:
        raise NonPositiveDepth("reference mean depth must be positive")
    if z0 <= 0:
        raise NonPositiveDepth("target depth must be positive")
    return (train_camera.focal_mean / z0) / (test_camera_estimate.focal_mean / reference_mean_depth)
