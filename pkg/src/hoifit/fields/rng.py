"""Counter-based per-point randomness.

Noise channels are keyed on (seed, coordinate bit pattern) through a
SplitMix64-style mixer, so a given point always receives the same noise no
matter the batch it arrives in or the thread that queries it.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        x ^= x >> np.uint64(30)
        x *= _MIX1
        x ^= x >> np.uint64(27)
        x *= _MIX2
        x ^= x >> np.uint64(31)
    return x


def point_keys(seed: int, points: np.ndarray) -> np.ndarray:
    """One 64-bit key per point (N, 3) -> (N,)."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    bits = pts.view(np.uint64)
    with np.errstate(over="ignore"):
        h = np.full(len(pts), np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        for c in range(3):
            h = _mix(h + _GOLDEN) ^ bits[:, c]
        h = _mix(h)
    return h


def uniforms(keys: np.ndarray, stream: int) -> np.ndarray:
    """Deterministic uniforms in (0, 1), one per key, for a channel index."""
    with np.errstate(over="ignore"):
        s = _mix(keys + np.uint64(stream + 1) * _GOLDEN)
    return ((s >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(keys: np.ndarray, stream: int) -> np.ndarray:
    """Deterministic standard normals via Box-Muller, one per key."""
    u1 = uniforms(keys, 2 * stream)
    u2 = uniforms(keys, 2 * stream + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def unit_vectors(keys: np.ndarray, stream: int) -> np.ndarray:
    """Deterministic directions uniform on the sphere, (N, 3)."""
    z = 2.0 * uniforms(keys, 2 * stream + 100) - 1.0
    phi = 2.0 * np.pi * uniforms(keys, 2 * stream + 101)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
