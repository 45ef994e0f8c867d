"""Contact detection: per-part pairing of body vertices near the object
surface with object vertices near the body surface."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..body import NUM_PARTS, BodyModel
from ..fields.sample import FieldOracle
from ..mesh import TriangleMesh


@dataclass
class ContactSets:
    """Per part j (1..14): indices of body vertices on part j whose object
    distance is within eps, and indices of object vertices whose human
    distance is within eps and whose predicted part is j."""

    body_indices: tuple   # 14 int arrays into the body vertex array
    object_indices: tuple  # 14 int arrays into the object vertex array
    eps: float

    def active_parts(self) -> list[int]:
        """Parts (0-based) where both sides are non-empty."""
        return [j for j in range(NUM_PARTS)
                if len(self.body_indices[j]) and len(self.object_indices[j])]

    @property
    def num_body(self) -> int:
        return sum(len(idx) for idx in self.body_indices)

    @property
    def num_object(self) -> int:
        return sum(len(idx) for idx in self.object_indices)

    def save(self, path) -> None:
        lines = [f"eps {self.eps:.9g}"]
        for j in range(NUM_PARTS):
            lines.append(f"body {j + 1} " + " ".join(map(str, self.body_indices[j])))
            lines.append(f"object {j + 1} " + " ".join(map(str, self.object_indices[j])))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ContactSets":
        body = [np.zeros(0, dtype=np.int64) for _ in range(NUM_PARTS)]
        obj = [np.zeros(0, dtype=np.int64) for _ in range(NUM_PARTS)]
        eps = 0.0
        for line in Path(path).read_text().splitlines():
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "eps":
                eps = float(tok[1])
            elif tok[0] in ("body", "object"):
                j = int(tok[1]) - 1
                arr = np.array([int(x) for x in tok[2:]], dtype=np.int64)
                (body if tok[0] == "body" else obj)[j] = arr
        return cls(tuple(body), tuple(obj), eps)


def detect_contacts(body_mesh: TriangleMesh | np.ndarray,
                    object_mesh: TriangleMesh | np.ndarray,
                    model: BodyModel, oracle: FieldOracle,
                    eps: float) -> ContactSets:
    """Evaluate the oracle at both posed vertex sets and threshold.

    Body vertices use the model's predefined part labels; object vertices are
    attributed to the argmax of the oracle's part logits (ties resolved to
    the lowest part index).
    """
    if eps <= 0:
        raise ValueError("contact threshold must be positive")
    body_verts = body_mesh.vertices if isinstance(body_mesh, TriangleMesh) else np.asarray(body_mesh)
    obj_verts = object_mesh.vertices if isinstance(object_mesh, TriangleMesh) else np.asarray(object_mesh)

    body_batch = oracle.query(body_verts)
    obj_batch = oracle.query(obj_verts)
    body_close = body_batch.u_o <= eps
    obj_close = obj_batch.u_h <= eps
    obj_part = np.argmax(obj_batch.part_logits, axis=1) + 1

    body_sets = []
    obj_sets = []
    for j in range(1, NUM_PARTS + 1):
        body_sets.append(np.flatnonzero((model.part_labels == j) & body_close))
        obj_sets.append(np.flatnonzero(obj_close & (obj_part == j)))
    return ContactSets(tuple(body_sets), tuple(obj_sets), eps)
