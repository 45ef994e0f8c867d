"""Object pose initialization from the pose fields: average the rotation
field over near-surface probes and project the mean back onto SO(3);
average the center field the same way for the translation."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyShell
from ..fields.sample import FieldOracle
from ..so3 import svd_project_so3
from .pose import ObjectPose


def init_object_pose(oracle: FieldOracle, probe_points: np.ndarray,
                     shell: float = 0.004,
                     template_centroid: np.ndarray | None = None) -> ObjectPose:
    """Aggregate rotation and center fields over probes with object distance
    below the shell threshold (probes normally come from surface_projection
    of the object field).

    The returned translation re-expresses the predicted object center as the
    template offset: t = center - R @ template_centroid, so passing None is
    correct for templates centered at the origin. Scale starts at 1.
    """
    probes = np.atleast_2d(np.asarray(probe_points, dtype=float))
    batch = oracle.query(probes)
    inside = batch.u_o < shell
    if not inside.any():
        raise EmptyShell(
            f"no probe point within {shell} m of the object surface "
            f"(min distance {batch.u_o.min():.4g} m over {len(probes)} probes)")

    rotation = svd_project_so3(batch.rot[inside].mean(axis=0))
    center = oracle.decode_object_center(batch.centers[inside]).mean(axis=0)
    if template_centroid is not None:
        translation = center - rotation @ np.asarray(template_centroid, dtype=float)
    else:
        translation = center
    return ObjectPose(rotation, translation, 1.0)
