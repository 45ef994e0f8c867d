"""Perspective pinhole camera: intrinsics, projection and its Jacobian."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonPositiveDepth


@dataclass(frozen=True)
class PerspectiveCamera:
    """Pinhole intrinsics. Pixel coordinates follow (u right, v down); the
    camera looks along +z, so only points with z > 0 are projectable."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be at least 1x1, got {self.width}x{self.height}")

    def project(self, points: np.ndarray) -> np.ndarray:
        """Project points (..., 3) to pixel coordinates (..., 2).

        Raises NonPositiveDepth if any point has z <= 0.
        """
        p = np.asarray(points, dtype=float)
        z = p[..., 2]
        if np.any(z <= 0):
            raise NonPositiveDepth("cannot project points with z <= 0")
        u = self.fx * p[..., 0] / z + self.cx
        v = self.fy * p[..., 1] / z + self.cy
        return np.stack([u, v], axis=-1)

    def projection_jacobian(self, points: np.ndarray) -> np.ndarray:
        """d(pixel)/d(point) for points (N, 3), returned as (N, 2, 3)."""
        p = np.asarray(points, dtype=float).reshape(-1, 3)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        if np.any(z <= 0):
            raise NonPositiveDepth("cannot project points with z <= 0")
        jac = np.zeros((len(p), 2, 3))
        jac[:, 0, 0] = self.fx / z
        jac[:, 0, 2] = -self.fx * x / z**2
        jac[:, 1, 1] = self.fy / z
        jac[:, 1, 2] = -self.fy * y / z**2
        return jac

    @property
    def focal_mean(self) -> float:
        """Geometric mean of fx and fy, the scalar focal length used by
        patch-resize computations."""
        return float(np.sqrt(self.fx * self.fy))

    def save(self, path) -> None:
        save_camera(self, path)

    @classmethod
    def load(cls, path) -> "PerspectiveCamera":
        return load_camera(path)


def project_point(camera: PerspectiveCamera, p) -> np.ndarray:
    """Project a single 3D point, returning a length-2 pixel coordinate."""
    return camera.project(np.asarray(p, dtype=float).reshape(3))


def save_camera(camera: PerspectiveCamera, path) -> None:
    lines = [
        f"fx {camera.fx:.12g}",
        f"fy {camera.fy:.12g}",
        f"cx {camera.cx:.12g}",
        f"cy {camera.cy:.12g}",
        f"width {camera.width}",
        f"height {camera.height}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_camera(path) -> PerspectiveCamera:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition(" ")
        values[key] = val
    try:
        return PerspectiveCamera(
            fx=float(values["fx"]),
            fy=float(values["fy"]),
            cx=float(values["cx"]),
            cy=float(values["cy"]),
            width=int(values["width"]),
            height=int(values["height"]),
        )
    except KeyError as exc:
        raise ValueError(f"camera file {path} is missing key {exc}") from exc
