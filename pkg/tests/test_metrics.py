import numpy as np
import pytest

from hoifit.errors import DegenerateConfiguration, EmptySet, TopologyMismatch
from hoifit.metrics import chamfer_distance, procrustes_align, v2v_distance
from hoifit.so3 import random_rotation

from _oracles import chamfer_ref


def test_chamfer_identical_sets(rng):
    pts = rng.normal(size=(50, 3))
    assert chamfer_distance(pts, pts) == 0.0


def test_chamfer_single_pair():
    assert chamfer_distance([[0, 0, 0]], [[1, 0, 0]]) == pytest.approx(1.0)


def test_chamfer_matches_brute_force(rng):
    a = rng.normal(size=(100, 3))
    b = rng.normal(size=(100, 3))
    assert abs(chamfer_distance(a, b) - chamfer_ref(a, b)) < 1e-12


def test_chamfer_symmetry(rng):
    a = rng.normal(size=(40, 3))
    b = rng.normal(size=(60, 3))
    assert chamfer_distance(a, b) == pytest.approx(chamfer_distance(b, a), abs=1e-15)


def test_chamfer_translation_bound(rng):
    a = rng.normal(size=(40, 3))
    b = rng.normal(size=(40, 3))
    base = chamfer_distance(a, b)
    for delta in (0.01, 0.1, 0.5):
        moved = chamfer_distance(a, b + [delta, 0, 0])
        assert abs(moved - base) <= delta + 1e-12


def test_chamfer_empty_raises(rng):
    with pytest.raises(EmptySet):
        chamfer_distance(np.zeros((0, 3)), rng.normal(size=(5, 3)))


def test_procrustes_identity(rng):
    pts = rng.normal(size=(30, 3))
    t = procrustes_align(pts, pts)
    assert np.allclose(t.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(t.translation, 0, atol=1e-12)
    assert t.scale == pytest.approx(1.0)


def test_procrustes_recovers_similarity(rng):
    src = rng.normal(size=(50, 3))
    rot = random_rotation(rng)
    scale = 1.7
    trans = np.array([0.3, -0.2, 1.1])
    tgt = scale * src @ rot.T + trans
    t = procrustes_align(src, tgt, with_scale=True)
    assert np.abs(t.rotation - rot).max() < 1e-9
    assert np.abs(t.translation - trans).max() < 1e-9
    assert abs(t.scale - scale) < 1e-9
    assert np.abs(t.apply(src) - tgt).max() < 1e-9
    # orthonormality and orientation
    assert np.abs(t.rotation.T @ t.rotation - np.eye(3)).max() < 1e-9
    assert np.linalg.det(t.rotation) == pytest.approx(1.0, abs=1e-9)


def test_procrustes_rigid_only(rng):
    src = rng.normal(size=(50, 3))
    rot = random_rotation(rng)
    tgt = src @ rot.T + [0.1, 0.2, 0.3]
    t = procrustes_align(src, tgt, with_scale=False)
    assert t.scale == 1.0
    assert np.abs(t.apply(src) - tgt).max() < 1e-9


def test_procrustes_collinear_raises():
    src = np.outer(np.linspace(0, 1, 10), [1.0, 2.0, 3.0])
    tgt = src + 0.5
    with pytest.raises(DegenerateConfiguration):
        procrustes_align(src, tgt)


def test_procrustes_too_few_points():
    with pytest.raises(DegenerateConfiguration):
        procrustes_align(np.zeros((2, 3)), np.zeros((2, 3)))


def test_v2v(rng):
    a = rng.normal(size=(20, 3))
    assert v2v_distance(a, a) == 0.0
    assert v2v_distance(a, a + [0.05, 0, 0]) == pytest.approx(0.05)
    with pytest.raises(TopologyMismatch):
        v2v_distance(a, rng.normal(size=(21, 3)))
