import numpy as np
import pytest
from scipy.spatial import cKDTree

from hoifit.closest_point import ClosestPointQuery
from hoifit.errors import CorrespondenceMismatch
from hoifit.fields import NoiseSpec, mesh_oracle
from hoifit.so3 import geodesic_distance

from _scenes import build_contact_scene


@pytest.fixture(scope="module")
def scene():
    return build_contact_scene(seed=11, with_masks=False)


@pytest.fixture(scope="module")
def exact(scene):
    return scene.oracle()


def far_samples(scene, rng, n, min_dist=0.08):
    """Query points at least min_dist from both surfaces (noise tests that
    must not hit the zero clamp)."""
    lo, hi = scene.gt_mesh.bounds()
    pts = rng.uniform(lo - 0.5, hi + 0.5, size=(4 * n, 3))
    batch = scene.oracle().query(pts)
    keep = (batch.u_h > min_dist) & (batch.u_o > min_dist)
    return pts[keep][:n]


def test_exact_on_object_surface(scene, exact):
    idx = [0, 7, 31, 100]
    pts = scene.gt_object_mesh.vertices[idx]
    batch = exact.query(pts)
    assert np.abs(batch.u_o).max() < 1e-12
    # part prediction equals the nearest human vertex's label
    _, nearest = cKDTree(scene.gt_mesh.vertices).query(pts)
    expected = scene.rig.part_labels[nearest]
    assert np.array_equal(np.argmax(batch.part_logits, axis=1) + 1, expected)


def test_rotation_field_is_ground_truth_everywhere(scene, exact, rng):
    pts = rng.uniform(-1, 1, size=(20, 3)) + [0, 0, 2.2]
    batch = exact.query(pts)
    for rot in batch.rot:
        assert np.abs(rot - scene.gt_pose.rotation).max() == 0.0


def test_u_fields_match_closest_point_query(scene, exact, rng):
    pts = rng.uniform(-1, 1, size=(200, 3)) + [0, 0, 2.2]
    batch = exact.query(pts)
    res_h = ClosestPointQuery(scene.gt_mesh).query(pts)
    res_o = ClosestPointQuery(scene.gt_object_mesh).query(pts)
    assert np.array_equal(batch.u_h, res_h.distance)
    assert np.array_equal(batch.u_o, res_o.distance)
    assert np.array_equal(batch.grad_u_h, res_h.gradient)


def test_batch_invariants_hold_with_noise(scene, rng):
    noisy = scene.oracle(NoiseSpec(0.02, 0.1, 0.2, 0.3, 0.05, seed=4))
    pts = rng.uniform(-1, 1, size=(500, 3)) + [0, 0, 2.2]
    batch = noisy.query(pts)
    batch.validate()


def test_distance_noise_half_normal_mean(scene, rng):
    sigma = 0.01
    noisy = scene.oracle(NoiseSpec(sigma_d=sigma, seed=9))
    pts = far_samples(scene, rng, 10000, min_dist=5 * sigma)
    assert len(pts) > 5000
    exact_u = scene.oracle().query(pts).u_h
    noisy_u = noisy.query(pts).u_h
    mean_abs = np.abs(noisy_u - exact_u).mean()
    expected = sigma * np.sqrt(2 / np.pi)
    assert abs(mean_abs - expected) / expected < 0.05


def test_gradient_noise_preserves_norm_and_angle(scene, rng):
    sigma = 0.2
    noisy = scene.oracle(NoiseSpec(sigma_g=sigma, seed=2))
    pts = far_samples(scene, rng, 4000)
    b0 = scene.oracle().query(pts)
    b1 = noisy.query(pts)
    norms = np.linalg.norm(b1.grad_u_h, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-9
    cos = np.clip(np.einsum("ij,ij->i", b0.grad_u_h, b1.grad_u_h), -1, 1)
    mean_angle = np.arccos(cos).mean()
    expected = sigma * np.sqrt(2 / np.pi)
    assert abs(mean_angle - expected) / expected < 0.06


def test_part_flip_rate(scene, rng):
    rho = 0.1
    noisy = scene.oracle(NoiseSpec(flip_prob=rho, seed=7))
    pts = rng.uniform(-0.8, 0.8, size=(20000, 3)) + [0, 0, 2.2]
    clean = np.argmax(scene.oracle().query(pts).part_logits, axis=1)
    flipped = np.argmax(noisy.query(pts).part_logits, axis=1)
    rate = (clean != flipped).mean()
    assert abs(rate - rho) < 0.01


def test_rotation_noise_mean_angle(scene, rng):
    sigma = 0.1
    noisy = scene.oracle(NoiseSpec(sigma_r=sigma, seed=3))
    pts = rng.uniform(-0.5, 0.5, size=(4000, 3)) + [0, 0, 2.2]
    batch = noisy.query(pts)
    angles = [geodesic_distance(r, scene.gt_pose.rotation) for r in batch.rot]
    expected = sigma * np.sqrt(2 / np.pi)
    assert abs(np.mean(angles) - expected) / expected < 0.05


def test_center_noise(scene, rng):
    sigma = 0.05
    noisy = scene.oracle(NoiseSpec(sigma_c=sigma, seed=5))
    pts = rng.uniform(-0.5, 0.5, size=(3000, 3)) + [0, 0, 2.2]
    err = noisy.query(pts).centers - scene.oracle().gt_centers
    assert abs(err.std() - sigma) / sigma < 0.05


def test_determinism_and_order_independence(scene, rng):
    noisy = scene.oracle(NoiseSpec(0.01, 0.05, 0.1, 0.1, 0.01, seed=12))
    pts = rng.uniform(-1, 1, size=(300, 3)) + [0, 0, 2.2]
    a = noisy.query(pts)
    b = noisy.query(pts[::-1])
    assert np.array_equal(a.u_h, b.u_h[::-1])
    assert np.array_equal(a.part_logits, b.part_logits[::-1])
    assert np.array_equal(a.rot, b.rot[::-1])
    # same spec, fresh oracle: identical stream
    again = scene.oracle(NoiseSpec(0.01, 0.05, 0.1, 0.1, 0.01, seed=12)).query(pts)
    assert np.array_equal(a.u_h, again.u_h)
    # different seed: different stream
    other = scene.oracle(NoiseSpec(0.01, 0.05, 0.1, 0.1, 0.01, seed=13)).query(pts)
    assert not np.array_equal(a.u_h, other.u_h)


def test_correspondence_mismatch(scene):
    bad = scene.gt_mesh.copy()
    bad.vertices = bad.vertices[:-3]
    bad.faces = bad.faces[(bad.faces < len(bad.vertices)).all(axis=1)]
    with pytest.raises(CorrespondenceMismatch):
        mesh_oracle(bad, scene.gt_object_mesh, scene.rig, scene.gt_pose.rotation)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(sigma_d=-0.1)
    with pytest.raises(ValueError):
        NoiseSpec(flip_prob=1.5)
    assert NoiseSpec().is_zero
