import numpy as np
import pytest

from hoifit.errors import EmptyShell
from hoifit.fields import NoiseSpec, surface_projection
from hoifit.fitting import init_object_pose
from hoifit.so3 import geodesic_distance

from _scenes import build_contact_scene


@pytest.fixture(scope="module")
def scene():
    return build_contact_scene(seed=61, with_masks=False)


def surface_probes(scene, oracle, n=1000, seed=0):
    rng = np.random.default_rng(seed)
    center = scene.gt_object_mesh.centroid()
    seeds = center + rng.uniform(-0.3, 0.3, size=(n, 3))
    return surface_projection(oracle, "object", seeds, iterations=8,
                              step_clamp=0.5).points


def test_exact_recovery_with_zero_noise(scene):
    oracle = scene.oracle()
    probes = surface_probes(scene, oracle)
    assert len(probes) >= 500
    pose = init_object_pose(oracle, probes, shell=0.004)
    assert geodesic_distance(pose.rotation, scene.gt_pose.rotation) < 1e-6
    # template is origin-centered, so the translation is the object center
    assert np.linalg.norm(pose.translation - scene.gt_object_mesh.centroid()) < 1e-6
    assert pose.scale == 1.0


def test_template_centroid_offset(scene):
    oracle = scene.oracle()
    probes = surface_probes(scene, oracle)
    centroid = np.array([0.05, -0.02, 0.01])
    pose = init_object_pose(oracle, probes, shell=0.004,
                            template_centroid=centroid)
    expected = scene.gt_object_mesh.centroid() - pose.rotation @ centroid
    assert np.linalg.norm(pose.translation - expected) < 1e-6


def test_symmetric_perturbations_average_out(scene):
    # rotation field perturbed by +a and -a about one axis in equal counts
    from hoifit.fields.sample import FieldSampleBatch
    from hoifit.so3 import axis_angle_to_matrix

    class PairedOracle(scene.oracle().__class__.__bases__[0]):  # FieldOracle
        fixed_depth = 2.2

        def __init__(self, base, axis, angle):
            self.base = base
            self.pert = [axis_angle_to_matrix(axis * a) for a in (angle, -angle)]

        def query(self, points):
            batch = self.base.query(points)
            for i in range(len(batch)):
                batch.rot[i] = self.pert[i % 2] @ batch.rot[i]
            return batch

        def decode_object_center(self, centers):
            return self.base.decode_object_center(centers)

    base = scene.oracle()
    axis = np.array([0.0, 1.0, 0.0])
    paired = PairedOracle(base, axis, 0.3)
    probes = surface_probes(scene, base, n=2000)
    probes = probes[:len(probes) // 2 * 2]  # even count pairs up exactly
    pose = init_object_pose(paired, probes, shell=0.004)
    # mean of exp(+a) and exp(-a) about one axis projects back onto the
    # unperturbed rotation
    assert geodesic_distance(pose.rotation, scene.gt_pose.rotation) < 1e-9


def test_noise_suppressed_by_averaging(scene):
    oracle = scene.oracle(NoiseSpec(sigma_r=0.2, seed=3))
    probes = surface_probes(scene, scene.oracle(), n=1500)
    assert len(probes) >= 500
    pose = init_object_pose(oracle, probes, shell=0.004)
    assert geodesic_distance(pose.rotation, scene.gt_pose.rotation) < 0.05


def test_empty_shell_raises(scene):
    oracle = scene.oracle()
    far = np.array([[5.0, 5.0, 5.0], [6.0, 5.0, 5.0]])
    with pytest.raises(EmptyShell):
        init_object_pose(oracle, far, shell=0.004)
