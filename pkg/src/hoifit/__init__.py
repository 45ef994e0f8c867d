"""Joint fitting of an articulated body and a rigid object template to
field-based scene descriptions, with contact reasoning and depth-aware
perspective scaling."""

from .body import BodyModel, BodyParams, body_keypoints, lbs_forward, part_points
from .camera import PerspectiveCamera, project_point
from .closest_point import ClosestPointQuery, mesh_udf
from .mesh import TriangleMesh, load_mesh, save_mesh
from .metrics import chamfer_distance, procrustes_align, v2v_distance
from .raster import SilhouetteMask, occlusion_aware_silhouette_loss, render_silhouette
from .scaling import ScalingRecord, depth_aware_scale, joint_scale, patch_resize_factor
from .so3 import svd_project_so3

__version__ = "0.1.0"

__all__ = [
    "BodyModel",
    "BodyParams",
    "ClosestPointQuery",
    "PerspectiveCamera",
    "ScalingRecord",
    "SilhouetteMask",
    "TriangleMesh",
    "body_keypoints",
    "chamfer_distance",
    "depth_aware_scale",
    "joint_scale",
    "lbs_forward",
    "load_mesh",
    "mesh_udf",
    "occlusion_aware_silhouette_loss",
    "part_points",
    "patch_resize_factor",
    "procrustes_align",
    "project_point",
    "render_silhouette",
    "save_mesh",
    "svd_project_so3",
    "v2v_distance",
]
