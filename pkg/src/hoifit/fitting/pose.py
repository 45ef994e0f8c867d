"""Rigid object pose: rotation, translation, uniform scale."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ObjectPose:
    """Posed template vertices are scale * (rotation @ v + translation)."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > 1e-6 or np.linalg.det(self.rotation) < 0:
            raise ValueError("rotation must be a proper orthonormal matrix")

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.scale * (pts @ self.rotation.T + self.translation)

    def copy(self) -> "ObjectPose":
        return ObjectPose(self.rotation.copy(), self.translation.copy(), self.scale)

    def save(self, path) -> None:
        r = self.rotation.ravel()
        lines = [
            "rotation " + " ".join(f"{x:.17g}" for x in r),
            "translation " + " ".join(f"{x:.17g}" for x in self.translation),
            f"scale {self.scale:.17g}",
        ]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ObjectPose":
        rot = np.eye(3)
        trans = np.zeros(3)
        scale = 1.0
        for line in Path(path).read_text().splitlines():
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "rotation":
                rot = np.array([float(x) for x in tok[1:10]]).reshape(3, 3)
            elif tok[0] == "translation":
                trans = np.array([float(x) for x in tok[1:4]])
            elif tok[0] == "scale":
                scale = float(tok[1])
        return cls(rot, trans, scale)
