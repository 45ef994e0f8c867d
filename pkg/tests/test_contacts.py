import numpy as np
import pytest

from hoifit.fitting import detect_contacts
from hoifit.fitting.contacts import ContactSets
from hoifit.mesh import TriangleMesh
from hoifit.toyrig import part_id

from _scenes import build_contact_scene


@pytest.fixture(scope="module")
def scene():
    return build_contact_scene(seed=51, contact_part="left_hand",
                               gap=0.002, with_masks=False)


def test_far_object_has_no_contacts(scene):
    oracle = scene.oracle()
    far_obj = TriangleMesh(scene.gt_object_mesh.vertices + [0, 0, 1.0],
                           scene.gt_object_mesh.faces)
    sets = detect_contacts(scene.gt_mesh, far_obj, scene.rig, oracle, eps=0.02)
    assert sets.num_body == 0
    # the oracle's object field still sees the true object, so only the
    # body side depends on where we moved the probe mesh
    assert sets.active_parts() == []


def test_touching_scene_contacts_only_on_contact_part(scene):
    oracle = scene.oracle()
    sets = detect_contacts(scene.gt_mesh, scene.gt_object_mesh, scene.rig,
                           oracle, eps=0.02)
    hand = part_id("left_hand") - 1
    assert len(sets.body_indices[hand]) > 0
    assert len(sets.object_indices[hand]) > 0
    assert hand in sets.active_parts()
    # hand vertices dominate; distant parts stay silent
    for j in (part_id("head") - 1, part_id("right_foot") - 1):
        assert len(sets.body_indices[j]) == 0
    # detected body vertices really are on the labeled part
    assert np.all(scene.rig.part_labels[np.concatenate(
        [idx for idx in sets.body_indices if len(idx)])] > 0)


def test_infinite_threshold_recovers_partitions(scene):
    oracle = scene.oracle()
    sets = detect_contacts(scene.gt_mesh, scene.gt_object_mesh, scene.rig,
                           oracle, eps=np.inf)
    total_body = sum(len(idx) for idx in sets.body_indices)
    total_obj = sum(len(idx) for idx in sets.object_indices)
    assert total_body == scene.rig.num_vertices
    assert total_obj == scene.gt_object_mesh.num_vertices
    for j in range(14):
        expected = np.flatnonzero(scene.rig.part_labels == j + 1)
        assert np.array_equal(sets.body_indices[j], expected)


def test_monotone_in_eps(scene):
    oracle = scene.oracle()
    previous = None
    for eps in (0.005, 0.02, 0.1, 1.0):
        sets = detect_contacts(scene.gt_mesh, scene.gt_object_mesh, scene.rig,
                               oracle, eps=eps)
        if previous is not None:
            for j in range(14):
                assert set(previous.body_indices[j]) <= set(sets.body_indices[j])
                assert set(previous.object_indices[j]) <= set(sets.object_indices[j])
        previous = sets


def test_eps_validation(scene):
    with pytest.raises(ValueError):
        detect_contacts(scene.gt_mesh, scene.gt_object_mesh, scene.rig,
                        scene.oracle(), eps=0.0)


def test_contact_sets_roundtrip(tmp_path, scene):
    oracle = scene.oracle()
    sets = detect_contacts(scene.gt_mesh, scene.gt_object_mesh, scene.rig,
                           oracle, eps=0.02)
    path = tmp_path / "contacts.txt"
    sets.save(path)
    loaded = ContactSets.load(path)
    assert loaded.eps == pytest.approx(sets.eps)
    for j in range(14):
        assert np.array_equal(loaded.body_indices[j], sets.body_indices[j])
        assert np.array_equal(loaded.object_indices[j], sets.object_indices[j])
