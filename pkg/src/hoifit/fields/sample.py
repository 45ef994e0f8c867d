"""Per-point field sample bundle and the noise model applied to oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_PART_CHANNELS = 14


@dataclass
class FieldSample:
    """One query point's field values: distances to the human and object
    surfaces with their spatial gradients, body-part logits, the object
    rotation field, and the 5-channel center field (human center x, y at the
    oracle's fixed depth, then the object center offset relative to the
    human center)."""

    u_h: float
    grad_u_h: np.ndarray
    u_o: float
    grad_u_o: np.ndarray
    part_logits: np.ndarray
    rot: np.ndarray
    centers: np.ndarray


@dataclass
class FieldSampleBatch:
    """Vectorized samples for N query points. part_logit_grads carries the
    spatial gradient of each logit channel when the oracle can provide it
    (None otherwise, in which case the part term is treated as locally
    constant). out_of_bounds flags clamped grid queries."""

    u_h: np.ndarray                      # (N,)
    grad_u_h: np.ndarray                 # (N, 3)
    u_o: np.ndarray                      # (N,)
    grad_u_o: np.ndarray                 # (N, 3)
    part_logits: np.ndarray              # (N, 14)
    rot: np.ndarray                      # (N, 3, 3)
    centers: np.ndarray                  # (N, 5)
    part_logit_grads: np.ndarray | None = None   # (N, 14, 3)
    out_of_bounds: np.ndarray | None = None      # (N,) bool

    def __len__(self) -> int:
        return len(self.u_h)

    def at(self, i: int) -> FieldSample:
        return FieldSample(float(self.u_h[i]), self.grad_u_h[i], float(self.u_o[i]),
                           self.grad_u_o[i], self.part_logits[i], self.rot[i],
                           self.centers[i])

    def validate(self) -> None:
        """Assert the sample invariants; used by tests."""
        assert np.all(self.u_h >= 0) and np.all(self.u_o >= 0)
        assert np.all(np.linalg.norm(self.grad_u_h, axis=1) <= 1 + 1e-6)
        assert np.all(np.linalg.norm(self.grad_u_o, axis=1) <= 1 + 1e-6)
        for arr in (self.u_h, self.grad_u_h, self.u_o, self.grad_u_o,
                    self.part_logits, self.rot, self.centers):
            assert np.all(np.isfinite(arr))


@dataclass(frozen=True)
class NoiseSpec:
    """Synthetic corruption emulating predictor error.

    sigma_d: distance noise (m); sigma_g: gradient angular noise (rad);
    flip_prob: probability of swapping the best part logit with another part;
    sigma_r: rotation-field angular noise (rad); sigma_c: center noise (m).
    All draws are keyed on (seed, query point), see fields.rng.
    """

    sigma_d: float = 0.0
    sigma_g: float = 0.0
    flip_prob: float = 0.0
    sigma_r: float = 0.0
    sigma_c: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.sigma_d, self.sigma_g, self.sigma_r, self.sigma_c) < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip probability must lie in [0, 1]")

    @property
    def is_zero(self) -> bool:
        return (self.sigma_d == 0 and self.sigma_g == 0 and self.flip_prob == 0
                and self.sigma_r == 0 and self.sigma_c == 0)


class FieldOracle:
    """Query contract shared by all field providers.

    Implementations are immutable after construction, deterministic per
    seed, and safe for concurrent read-only queries. fixed_depth is the
    depth convention of the center field's x, y channels.
    """

    fixed_depth: float = 2.2

    def query(self, points: np.ndarray) -> FieldSampleBatch:
        raise NotImplementedError

    def query_one(self, point) -> FieldSample:
        return self.query(np.asarray(point, dtype=float).reshape(1, 3)).at(0)

    def decode_object_center(self, centers: np.ndarray) -> np.ndarray:
        """3D object center implied by center-field rows (N, 5) under the
        normalized-depth convention (human center at fixed_depth)."""
        centers = np.atleast_2d(centers)
        human = np.concatenate(
            [centers[:, :2], np.full((len(centers), 1), self.fixed_depth)], axis=1)
        return human + centers[:, 2:5]
