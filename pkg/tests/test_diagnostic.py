import numpy as np
import pytest

from hoifit.fields import NoiseSpec, field_diagnostic

from _scenes import build_contact_scene


@pytest.fixture(scope="module")
def scene():
    return build_contact_scene(seed=31, with_masks=False)


def test_zero_noise_scores_perfect(scene):
    oracle = scene.oracle()
    report = field_diagnostic(oracle, scene.gt_mesh, scene.gt_object_mesh,
                              samples=4000, body_model=scene.rig,
                              gt_rotation=scene.gt_pose.rotation,
                              gt_centers=oracle.gt_centers)
    assert report.udf_error_h == 0.0
    assert report.udf_error_o == 0.0
    assert report.part_accuracy == 1.0
    assert report.rotation_error < 1e-9
    assert report.center_error == 0.0


def test_part_flip_accuracy(scene):
    oracle = scene.oracle(NoiseSpec(flip_prob=0.1, seed=2))
    report = field_diagnostic(oracle, scene.gt_mesh, scene.gt_object_mesh,
                              samples=100000, body_model=scene.rig)
    assert report.part_accuracy == pytest.approx(0.9, abs=0.01)


def test_rotation_noise_expected_error(scene):
    sigma = 0.1
    oracle = scene.oracle(NoiseSpec(sigma_r=sigma, seed=3))
    report = field_diagnostic(oracle, scene.gt_mesh, scene.gt_object_mesh,
                              samples=4000, gt_rotation=scene.gt_pose.rotation)
    expected = sigma * np.sqrt(2 / np.pi)  # half-normal mean of the sampler
    assert report.rotation_error == pytest.approx(expected, rel=0.05)


def test_udf_error_monotone_in_noise(scene):
    errors = []
    for sigma in (0.0, 0.002, 0.005, 0.01, 0.02):
        oracle = scene.oracle(NoiseSpec(sigma_d=sigma, seed=8))
        report = field_diagnostic(oracle, scene.gt_mesh, scene.gt_object_mesh,
                                  samples=4000)
        errors.append(report.udf_error_h)
    assert all(a <= b + 1e-12 for a, b in zip(errors, errors[1:]))
    assert errors[0] == 0.0 and errors[-1] > 0.0


def test_missing_references_reported_as_nan(scene):
    report = field_diagnostic(scene.oracle(), scene.gt_mesh,
                              scene.gt_object_mesh, samples=500)
    assert np.isnan(report.part_accuracy)
    assert np.isnan(report.rotation_error)
    assert np.isnan(report.center_error)
    lines = report.to_lines()
    assert any(line.startswith("udf_error_h") for line in lines)
    assert any("nan" in line for line in lines)


def test_delta_must_be_positive(scene):
    with pytest.raises(ValueError):
        field_diagnostic(scene.oracle(), scene.gt_mesh, scene.gt_object_mesh,
                         samples=10, delta=0.0)
