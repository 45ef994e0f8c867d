"""Loadable field grids: a binary interchange format for externally produced
fields, trilinearly interpolated at query time.

Layout (little-endian):
  magic   4 bytes  b"FGRD"
  version uint32   1
  nx, ny, nz, channels  uint32 each (channels must be 36)
  box_min float64[3], box_max float64[3]
  fixed_depth float64
  data    float32[nx * ny * nz * channels], C order with index (x, y, z, c)
          so z varies fastest among the spatial axes.

Channel order: u_h; grad_u_h (3); u_o; grad_u_o (3); part logits (14);
rotation row-major (9); centers (5).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import MalformedGrid
from .sample import NUM_PART_CHANNELS, FieldOracle, FieldSampleBatch

MAGIC = b"FGRD"
VERSION = 1
NUM_CHANNELS = 36
_HEADER = struct.Struct("<4sI4I3d3dd")

_LOGIT_SLICE = slice(8, 8 + NUM_PART_CHANNELS)


def _pack_batch(batch: FieldSampleBatch) -> np.ndarray:
    n = len(batch)
    out = np.empty((n, NUM_CHANNELS), dtype=np.float32)
    out[:, 0] = batch.u_h
    out[:, 1:4] = batch.grad_u_h
    out[:, 4] = batch.u_o
    out[:, 5:8] = batch.grad_u_o
    out[:, _LOGIT_SLICE] = batch.part_logits
    out[:, 22:31] = batch.rot.reshape(n, 9)
    out[:, 31:36] = batch.centers
    return out


def save_field_grid(oracle: FieldOracle, box_min, box_max, resolution,
                    path, chunk: int = 8192) -> None:
    """Sample an oracle on a regular grid and write the binary file."""
    box_min = np.asarray(box_min, dtype=float).reshape(3)
    box_max = np.asarray(box_max, dtype=float).reshape(3)
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (3,)).copy()
    if np.any(res < 2):
        raise ValueError("grid resolution must be at least 2 per axis")
    axes = [np.linspace(box_min[c], box_max[c], res[c]) for c in range(3)]
    xs, ys, zs = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)

    data = np.empty((len(nodes), NUM_CHANNELS), dtype=np.float32)
    for start in range(0, len(nodes), chunk):
        sl = slice(start, min(start + chunk, len(nodes)))
        data[sl] = _pack_batch(oracle.query(nodes[sl]))

    header = _HEADER.pack(MAGIC, VERSION, *[int(r) for r in res], NUM_CHANNELS,
                          *box_min, *box_max, float(oracle.fixed_depth))
    Path(path).write_bytes(header + data.tobytes())


class GridFieldOracle(FieldOracle):
    """Trilinear interpolation of a stored field grid. Queries outside the
    box are clamped to the boundary and flagged."""

    def __init__(self, data: np.ndarray, box_min: np.ndarray,
                 box_max: np.ndarray, fixed_depth: float):
        self.data = data
        self.box_min = box_min
        self.box_max = box_max
        self.fixed_depth = float(fixed_depth)
        self.resolution = np.array(data.shape[:3])
        self.spacing = (box_max - box_min) / (self.resolution - 1)

    def query(self, points: np.ndarray) -> FieldSampleBatch:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(pts)
        clamped = np.clip(pts, self.box_min, self.box_max)
        out_of_bounds = np.any(clamped != pts, axis=1)

        rel = (clamped - self.box_min) / self.spacing
        idx = np.minimum(rel.astype(int), self.resolution - 2)
        t = rel - idx
        ix, iy, iz = idx[:, 0], idx[:, 1], idx[:, 2]
        tx, ty, tz = t[:, 0:1], t[:, 1:2], t[:, 2:3]

        c = {}
        for dx in (0, 1):
            for dy in (0, 1):
                for dz in (0, 1):
                    c[dx, dy, dz] = self.data[ix + dx, iy + dy, iz + dz].astype(np.float64)

        wx = (1 - tx, tx)
        wy = (1 - ty, ty)
        wz = (1 - tz, tz)
        val = np.zeros((n, NUM_CHANNELS))
        dval = np.zeros((n, 3, NUM_CHANNELS))
        for dx in (0, 1):
            for dy in (0, 1):
                for dz in (0, 1):
                    corner = c[dx, dy, dz]
                    val += wx[dx] * wy[dy] * wz[dz] * corner
                    sx = 1.0 if dx else -1.0
                    sy = 1.0 if dy else -1.0
                    sz = 1.0 if dz else -1.0
                    dval[:, 0] += sx * (wy[dy] * wz[dz]) * corner
                    dval[:, 1] += sy * (wx[dx] * wz[dz]) * corner
                    dval[:, 2] += sz * (wx[dx] * wy[dy]) * corner
        dval /= self.spacing[None, :, None]
        # a clamped coordinate no longer responds to the query point
        if out_of_bounds.any():
            frozen = clamped != pts
            dval[frozen] = 0.0

        logit_grads = dval[:, :, _LOGIT_SLICE].transpose(0, 2, 1)
        return FieldSampleBatch(
            u_h=np.maximum(val[:, 0], 0.0),
            grad_u_h=val[:, 1:4],
            u_o=np.maximum(val[:, 4], 0.0),
            grad_u_o=val[:, 5:8],
            part_logits=val[:, _LOGIT_SLICE],
            rot=val[:, 22:31].reshape(n, 3, 3),
            centers=val[:, 31:36],
            part_logit_grads=logit_grads,
            out_of_bounds=out_of_bounds,
        )


def grid_oracle(path) -> GridFieldOracle:
    """Load a field grid file."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedGrid(f"{path}: file shorter than header")
    fields = _HEADER.unpack_from(raw)
    magic, version = fields[0], fields[1]
    if magic != MAGIC:
        raise MalformedGrid(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise MalformedGrid(f"{path}: unsupported version {version}")
    nx, ny, nz, channels = fields[2:6]
    if channels != NUM_CHANNELS:
        raise MalformedGrid(f"{path}: expected {NUM_CHANNELS} channels, got {channels}")
    box_min = np.array(fields[6:9])
    box_max = np.array(fields[9:12])
    fixed_depth = fields[12]
    if np.any(box_max <= box_min):
        raise MalformedGrid(f"{path}: degenerate bounding box")
    if min(nx, ny, nz) < 2:
        raise MalformedGrid(f"{path}: resolution must be at least 2 per axis")
    expected = nx * ny * nz * channels * 4
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise MalformedGrid(f"{path}: expected {expected} data bytes, got {len(body)}")
    data = np.frombuffer(body, dtype="<f4").reshape(nx, ny, nz, channels)
    return GridFieldOracle(data, box_min, box_max, fixed_depth)
