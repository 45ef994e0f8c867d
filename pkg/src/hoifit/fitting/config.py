"""Fitting configuration: term weights, thresholds, and optimizer schedule.

All weights default to an order-of-magnitude balance tuned on the synthetic
suite; every field can be overridden from a flat key-value file or the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class FitConfig:
    # term weights
    lambda_h: float = 1.0          # human clamped-distance term
    lambda_part: float = 0.1       # part cross-entropy term
    lambda_o: float = 1.0          # object clamped-distance term
    lambda_occ: float = 0.01       # occlusion-aware silhouette term
    lambda_center: float = 1.0     # squared distance of object centroid to predicted center
    lambda_contact: float = 1.0    # contact chamfer term
    lambda_j2d: float = 1e-4       # keypoint reprojection, per squared pixel
    lambda_prior: float = 0.1      # quadratic pose/shape regularizer

    # thresholds
    clamp_delta: float = 0.1       # distance clamp, meters
    contact_eps: float = 0.02      # contact threshold, meters
    rotation_shell: float = 0.004  # near-surface shell for pose initialization, meters
    huber_pixels: float = 100.0    # keypoint residual where the loss turns linear
    beta_limit: float = 5.0        # shape coefficient box
    scale_min: float = 0.5
    scale_max: float = 2.0

    # optimizer step scales per parameter group
    step_pose: float = 0.03
    step_trans: float = 0.01
    step_betas: float = 0.05
    step_obj_rot: float = 0.03
    step_obj_trans: float = 0.01
    step_obj_scale: float = 0.02

    # schedule
    iters_human: int = 120
    iters_object: int = 120
    iters_joint: int = 160
    contact_cadence: int = 20      # iterations between contact re-detection
    reortho_every: int = 50        # rotation re-orthonormalization cadence
    converge_tol: float = 1e-7     # relative energy decrease considered converged
    converge_patience: int = 5

    # toggles
    use_contacts: bool = True
    use_silhouette: bool = True
    contact_grad_to_body: bool = True  # ablation: propagate contact term into the body too

    def replace(self, **kwargs) -> "FitConfig":
        return replace(self, **kwargs)

    def save(self, path) -> None:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, bool):
                val = "true" if val else "false"
            lines.append(f"{f.name} {val}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "FitConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition(" ")
            if key not in known:
                raise ValueError(f"unknown fit config key {key!r}")
            kwargs[key] = _parse_value(cls, key, raw.strip())
        return cls(**kwargs)


def _parse_value(cls, key: str, raw: str):
    default = getattr(cls(), key)
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"config key {key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    return float(raw)
