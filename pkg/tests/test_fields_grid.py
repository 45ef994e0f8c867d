import numpy as np
import pytest

from hoifit.errors import MalformedGrid
from hoifit.fields import grid_oracle, save_field_grid
from hoifit.fields.grid import NUM_CHANNELS
from hoifit.fields.sample import FieldOracle, FieldSampleBatch

from _oracles import fd_gradient, grad_close
from _scenes import build_contact_scene


class SphereFieldOracle(FieldOracle):
    """Analytic unit-sphere distance field in both u channels."""

    def __init__(self, center=(0.0, 0.0, 0.0), radius=1.0):
        self.center = np.asarray(center, dtype=float)
        self.radius = radius
        self.fixed_depth = 2.2

    def query(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = pts - self.center
        r = np.linalg.norm(rel, axis=1)
        u = np.abs(r - self.radius)
        grad = np.zeros_like(pts)
        ok = r > 1e-12
        sign = np.sign(r - self.radius)
        grad[ok] = sign[ok, None] * rel[ok] / r[ok, None]
        n = len(pts)
        return FieldSampleBatch(
            u_h=u, grad_u_h=grad, u_o=u.copy(), grad_u_o=grad.copy(),
            part_logits=np.tile(np.linspace(0, 1, 14), (n, 1)),
            rot=np.broadcast_to(np.eye(3), (n, 3, 3)).copy(),
            centers=np.zeros((n, 5)),
            part_logit_grads=np.zeros((n, 14, 3)))


@pytest.fixture(scope="module")
def grid_from_scene(tmp_path_factory):
    scene = build_contact_scene(seed=21, with_masks=False)
    oracle = scene.oracle()
    lo, hi = scene.gt_mesh.bounds()
    lo, hi = lo - 0.2, hi + 0.2
    path = tmp_path_factory.mktemp("grid") / "scene.grid"
    save_field_grid(oracle, lo, hi, (24, 28, 20), path)
    return scene, oracle, grid_oracle(path), lo, hi, (24, 28, 20)


def _nodes(lo, hi, res):
    axes = [np.linspace(lo[c], hi[c], res[c]) for c in range(3)]
    return axes


def test_exact_at_nodes(grid_from_scene, rng):
    scene, oracle, grid, lo, hi, res = grid_from_scene
    axes = _nodes(lo, hi, res)
    idx = rng.integers(0, res, size=(60, 3))
    pts = np.stack([axes[c][idx[:, c]] for c in range(3)], axis=1)
    got = grid.query(pts)
    want = oracle.query(pts)
    # stored as float32: node values match to float32 rounding
    assert np.abs(got.u_h - want.u_h.astype(np.float32)).max() < 1e-6
    assert np.abs(got.part_logits
                  - want.part_logits.astype(np.float32)).max() < 2e-5
    assert np.abs(got.rot - want.rot.astype(np.float32)).max() < 1e-6


def test_cell_center_is_corner_average(grid_from_scene):
    scene, oracle, grid, lo, hi, res = grid_from_scene
    axes = _nodes(lo, hi, res)
    i, j, k = 5, 7, 9
    center = np.array([(axes[0][i] + axes[0][i + 1]) / 2,
                       (axes[1][j] + axes[1][j + 1]) / 2,
                       (axes[2][k] + axes[2][k + 1]) / 2])
    corners = np.array([[axes[0][i + a], axes[1][j + b], axes[2][k + c]]
                        for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    got = grid.query(center[None])
    mean = grid.query(corners)
    assert abs(got.u_h[0] - mean.u_h.mean()) < 1e-9
    assert np.abs(got.centers[0] - mean.centers.mean(axis=0)).max() < 1e-9


def test_sphere_grid_error_bound(tmp_path):
    oracle = SphereFieldOracle()
    lo = np.array([-1.0, -1.0, -1.0])
    hi = np.array([1.0, 1.0, 1.0])
    res = 64
    path = tmp_path / "sphere.grid"
    save_field_grid(oracle, lo, hi, res, path)
    grid = grid_oracle(path)
    rng = np.random.default_rng(0)
    pts = rng.uniform(lo, hi, size=(20000, 3))
    got = grid.query(pts).u_h
    exact = oracle.query(pts).u_h
    spacing = (hi - lo) / (res - 1)
    half_diagonal = 0.5 * np.linalg.norm(spacing)
    assert np.abs(got - exact).max() < half_diagonal


def test_out_of_bounds_clamped_and_flagged(grid_from_scene):
    scene, oracle, grid, lo, hi, res = grid_from_scene
    inside = (lo + hi) / 2
    outside = hi + 1.0
    batch = grid.query(np.vstack([inside, outside]))
    assert not batch.out_of_bounds[0]
    assert batch.out_of_bounds[1]
    clamped = grid.query(hi[None])
    assert abs(batch.u_h[1] - clamped.u_h[0]) < 1e-12


def test_logit_gradients_match_interpolant_fd(grid_from_scene, rng):
    scene, oracle, grid, lo, hi, res = grid_from_scene
    pts = rng.uniform(lo + 0.05, hi - 0.05, size=(25, 3))
    # keep away from cell boundaries so finite differences stay in one cell
    spacing = (np.asarray(hi) - lo) / (np.asarray(res) - 1)
    rel = (pts - lo) / spacing
    pts = pts[np.all(np.abs(rel - np.round(rel)) > 1e-3, axis=1)]
    batch = grid.query(pts)
    for i in range(len(pts)):
        for ch in (0, 5, 13):
            fd = fd_gradient(
                lambda x: grid.query(x.reshape(1, 3)).part_logits[0, ch], pts[i])
            assert grad_close(batch.part_logit_grads[i, ch], fd, tol=1e-3)


def test_lipschitz_between_nodes(grid_from_scene, rng):
    scene, oracle, grid, lo, hi, res = grid_from_scene
    data = grid.data[..., 0]  # u_h channel
    bound = 0.0
    for axis in range(3):
        diffs = np.abs(np.diff(data, axis=axis)).max()
        bound += (diffs / grid.spacing[axis])**2
    lipschitz = float(np.sqrt(bound))
    a = rng.uniform(lo, hi, size=(500, 3))
    b = a + rng.normal(0, 0.01, size=a.shape)
    b = np.clip(b, lo, hi)
    ua = grid.query(a).u_h
    ub = grid.query(b).u_h
    dist = np.linalg.norm(a - b, axis=1)
    assert np.all(np.abs(ua - ub) <= lipschitz * dist + 1e-9)


def test_malformed_grid_errors(tmp_path):
    path = tmp_path / "bad.grid"
    path.write_bytes(b"NOPE" + b"\x00" * 100)
    with pytest.raises(MalformedGrid):
        grid_oracle(path)
    path.write_bytes(b"FG")
    with pytest.raises(MalformedGrid):
        grid_oracle(path)
    # valid header, truncated payload
    import struct
    from hoifit.fields.grid import _HEADER, MAGIC, VERSION
    header = _HEADER.pack(MAGIC, VERSION, 4, 4, 4, NUM_CHANNELS,
                          0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.2)
    path.write_bytes(header + b"\x00" * 10)
    with pytest.raises(MalformedGrid):
        grid_oracle(path)
