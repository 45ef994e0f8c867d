import numpy as np
import pytest

from hoifit.errors import SingularMatrix
from hoifit.so3 import (axis_angle_jacobian, axis_angle_to_matrix,
                        geodesic_distance, random_rotation, svd_project_so3)

from _oracles import fd_gradient, grad_close, rotation_search_distance


def test_axis_angle_known_values():
    rot = axis_angle_to_matrix(np.array([0.0, 0.0, np.pi / 2]))
    assert np.allclose(rot @ [1, 0, 0], [0, 1, 0], atol=1e-12)
    assert np.allclose(axis_angle_to_matrix(np.zeros(3)), np.eye(3))


def test_axis_angle_batch(rng):
    vecs = rng.normal(size=(10, 3))
    batch = axis_angle_to_matrix(vecs)
    for i in range(10):
        assert np.allclose(batch[i], axis_angle_to_matrix(vecs[i]))


def test_axis_angle_jacobian_matches_fd(rng):
    for r in [np.zeros(3), *rng.normal(0, 1.0, size=(20, 3))]:
        jac = axis_angle_jacobian(r)
        for c in range(3):
            fd = np.zeros((3, 3))
            h = 1e-7
            for sign in (1, -1):
                rp = r.copy()
                rp[c] += sign * h
                fd += sign * axis_angle_to_matrix(rp) / (2 * h)
            assert grad_close(jac[c], fd, tol=1e-5)


def test_svd_projection_identity():
    assert np.allclose(svd_project_so3(np.eye(3)), np.eye(3))


def test_svd_projection_idempotent_and_scale_invariant(rng):
    for _ in range(200):
        rot = random_rotation(rng)
        assert np.abs(svd_project_so3(rot) - rot).max() < 1e-9
        for c in (0.1, 2.0, 173.0):
            assert np.abs(svd_project_so3(c * rot) - rot).max() < 1e-9


def test_svd_projection_negative_det():
    m = np.diag([1.0, 1.0, -1.0])
    rot = svd_project_so3(m)
    assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(rot.T @ rot - np.eye(3)).max() < 1e-12
    # at least as close as the best of a large random rotation search
    assert np.linalg.norm(m - rot) <= rotation_search_distance(m, 20000) + 1e-9


def test_svd_projection_noisy_matrix(rng):
    base = random_rotation(rng)
    noisy = base + rng.normal(0, 0.05, (3, 3))
    rot = svd_project_so3(noisy)
    assert np.linalg.norm(noisy - rot) <= rotation_search_distance(noisy, 20000, seed=5) + 1e-9


def test_svd_projection_singular_raises():
    with pytest.raises(SingularMatrix):
        svd_project_so3(np.outer([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]))


def test_geodesic_distance(rng):
    rot = random_rotation(rng)
    assert geodesic_distance(rot, rot) == pytest.approx(0.0, abs=1e-7)
    axis = np.array([0.0, 1.0, 0.0])
    for angle in (0.1, 0.5, 2.0):
        other = axis_angle_to_matrix(axis * angle) @ rot
        assert geodesic_distance(other, rot) == pytest.approx(angle, abs=1e-9)
