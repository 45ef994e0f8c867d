"""Binary silhouettes: depth-tested rasterization, mask io, occlusion-aware
mask discrepancy, and the distance-field relaxation used by the fitter."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .camera import PerspectiveCamera
from .errors import DimensionMismatch, FullyBehindCamera
from .mesh import TriangleMesh

_MIN_Z = 1e-9


@dataclass
class SilhouetteMask:
    """Per-pixel binary occupancy, shape (height, width), with provenance
    "observed" or "rendered". Rendered masks carry a per-pixel depth buffer
    (+inf where empty)."""

    mask: np.ndarray
    provenance: str = "observed"
    depth: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.ndim != 2:
            raise DimensionMismatch("mask must be a 2D array")
        if self.depth is not None and self.depth.shape != self.mask.shape:
            raise DimensionMismatch("depth buffer shape must match the mask")

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    def matches_camera(self, camera: PerspectiveCamera) -> bool:
        return self.shape == (camera.height, camera.width)


def render_silhouette(mesh: TriangleMesh, camera: PerspectiveCamera) -> SilhouetteMask:
    """Rasterize the mesh into a binary mask plus depth buffer.

    One sample per integer pixel coordinate, depth-tested with
    perspective-correct 1/z interpolation. Triangles are treated as
    double-sided; faces with any vertex at z <= 0 are skipped (near-plane
    clipping is not implemented). Deterministic for fixed inputs.
    """
    if not np.any(mesh.vertices[:, 2] > 0):
        raise FullyBehindCamera("no vertex in front of the camera")
    h, w = camera.height, camera.width
    mask = np.zeros((h, w), dtype=bool)
    depth = np.full((h, w), np.inf)

    tri3d = mesh.triangles()
    valid = (tri3d[:, :, 2] > _MIN_Z).all(axis=1)
    tri3d = tri3d[valid]
    if len(tri3d) == 0:
        return SilhouetteMask(mask, "rendered", depth)

    z = tri3d[:, :, 2]
    px = camera.fx * tri3d[:, :, 0] / z + camera.cx
    py = camera.fy * tri3d[:, :, 1] / z + camera.cy
    inv_z = 1.0 / z

    for t in range(len(tri3d)):
        x0 = max(int(np.ceil(px[t].min())), 0)
        x1 = min(int(np.floor(px[t].max())), w - 1)
        y0 = max(int(np.ceil(py[t].min())), 0)
        y1 = min(int(np.floor(py[t].max())), h - 1)
        if x0 > x1 or y0 > y1:
            continue
        xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
        ax, ay = px[t, 0], py[t, 0]
        bx, by = px[t, 1], py[t, 1]
        cx_, cy_ = px[t, 2], py[t, 2]
        det = (by - cy_) * (ax - cx_) + (cx_ - bx) * (ay - cy_)
        if abs(det) < 1e-12:
            continue
        l0 = ((by - cy_) * (xs - cx_) + (cx_ - bx) * (ys - cy_)) / det
        l1 = ((cy_ - ay) * (xs - cx_) + (ax - cx_) * (ys - cy_)) / det
        l2 = 1.0 - l0 - l1
        eps = -1e-9
        inside = (l0 >= eps) & (l1 >= eps) & (l2 >= eps)
        if not inside.any():
            continue
        zi = 1.0 / (l0 * inv_z[t, 0] + l1 * inv_z[t, 1] + l2 * inv_z[t, 2])
        sub = depth[y0:y1 + 1, x0:x1 + 1]
        closer = inside & (zi < sub)
        sub[closer] = zi[closer]
        mask[y0:y1 + 1, x0:x1 + 1] |= inside

    return SilhouetteMask(mask, "rendered", depth)


def occlusion_aware_silhouette_loss(rendered: SilhouetteMask,
                                    observed_object: SilhouetteMask,
                                    observed_human: SilhouetteMask) -> float:
    """Per-pixel discrepancy between a rendered object silhouette and the
    observed object mask, excusing rendered pixels hidden by the human.

    Penalized pixels: rendered-but-not-observed outside the human mask, and
    observed-but-not-rendered. Returned as the penalized fraction of the
    image, so the value is 0 exactly when the rendered mask matches the
    observed one outside the human region.
    """
    shapes = {rendered.shape, observed_object.shape, observed_human.shape}
    if len(shapes) != 1:
        raise DimensionMismatch(f"mask shapes differ: {shapes}")
    rend = rendered.mask
    obs = observed_object.mask
    hum = observed_human.mask
    false_pos = rend & ~obs & ~hum
    false_neg = ~rend & obs
    return float((false_pos | false_neg).sum()) / rend.size


# --- PGM io ---------------------------------------------------------------

def save_pgm(mask: SilhouetteMask, path) -> None:
    """Binary P5, 0 = background, 255 = foreground."""
    h, w = mask.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    body = np.where(mask.mask, 255, 0).astype(np.uint8).tobytes()
    Path(path).write_bytes(header + body)


def load_pgm(path, provenance: str = "observed") -> SilhouetteMask:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path} is not a binary PGM (P5) file")
    # header: magic, width, height, maxval, each possibly comment-separated
    tokens = []
    i = 2
    while len(tokens) < 3:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    i += 1  # single whitespace after maxval
    w, h, maxval = int(tokens[0]), int(tokens[1]), int(tokens[2])
    if maxval != 255:
        raise ValueError(f"{path}: expected maxval 255, got {maxval}")
    pixels = np.frombuffer(data[i:i + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ValueError(f"{path}: truncated pixel data")
    return SilhouetteMask(pixels.reshape(h, w) >= 128, provenance)


# --- distance-field relaxation -------------------------------------------

class MaskDistanceField:
    """Pixel distance to the nearest foreground pixel of a mask, bilinearly
    interpolated so that values and gradients are defined at fractional pixel
    coordinates. Used as the differentiable silhouette surrogate."""

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.any():
            # distance from each pixel to the nearest True pixel
            self.field = ndimage.distance_transform_edt(~mask)
        else:
            self.field = np.full(mask.shape, float(max(mask.shape)))
        self.h, self.w = mask.shape

    def sample(self, pix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Value and gradient of the field at pixel coordinates (N, 2).

        Coordinates outside the image are clamped to the border, with the
        clamped offset added back so the field keeps pulling points toward
        the frame.
        """
        pix = np.asarray(pix, dtype=float).reshape(-1, 2)
        cx = np.clip(pix[:, 0], 0.0, self.w - 1.0)
        cy = np.clip(pix[:, 1], 0.0, self.h - 1.0)
        out_dx = pix[:, 0] - cx
        out_dy = pix[:, 1] - cy

        x0 = np.clip(np.floor(cx).astype(int), 0, self.w - 2) if self.w > 1 else np.zeros(len(pix), int)
        y0 = np.clip(np.floor(cy).astype(int), 0, self.h - 2) if self.h > 1 else np.zeros(len(pix), int)
        tx = cx - x0
        ty = cy - y0
        f00 = self.field[y0, x0]
        f01 = self.field[y0, np.minimum(x0 + 1, self.w - 1)]
        f10 = self.field[np.minimum(y0 + 1, self.h - 1), x0]
        f11 = self.field[np.minimum(y0 + 1, self.h - 1), np.minimum(x0 + 1, self.w - 1)]
        val = (f00 * (1 - tx) * (1 - ty) + f01 * tx * (1 - ty)
               + f10 * (1 - tx) * ty + f11 * tx * ty)
        dvdx = ((f01 - f00) * (1 - ty) + (f11 - f10) * ty)
        dvdy = ((f10 - f00) * (1 - tx) + (f11 - f01) * tx)

        # a clamped coordinate stops driving the interior field; the
        # out-of-frame offset contributes its own unit pull instead
        out_norm = np.hypot(out_dx, out_dy)
        val = val + out_norm
        dvdx = np.where(out_dx != 0, 0.0, dvdx)
        dvdy = np.where(out_dy != 0, 0.0, dvdy)
        outside = out_norm > 0
        dvdx[outside] += out_dx[outside] / out_norm[outside]
        dvdy[outside] += out_dy[outside] / out_norm[outside]
        return val, np.stack([dvdx, dvdy], axis=1)
