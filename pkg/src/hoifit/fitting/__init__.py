"""Joint human/object fitting: energies, contacts, initialization, optimizer."""

from ..so3 import svd_project_so3
from .config import FitConfig
from .contacts import ContactSets, detect_contacts
from .energies import (energy_contact, energy_human, energy_j2d,
                       energy_object, energy_reg)
from .initialize import init_object_pose
from .optimize import FitReport, FitResult, FitScene, joint_fit
from .pose import ObjectPose

__all__ = [
    "ContactSets",
    "FitConfig",
    "FitReport",
    "FitResult",
    "FitScene",
    "ObjectPose",
    "detect_contacts",
    "energy_contact",
    "energy_human",
    "energy_j2d",
    "energy_object",
    "energy_reg",
    "init_object_pose",
    "joint_fit",
    "svd_project_so3",
]
