import numpy as np
import pytest

from hoifit.mesh import (TriangleMesh, concatenate_meshes, load_mesh,
                         load_obj, load_ply, save_obj, save_ply)
from hoifit.primitives import box_mesh, cylinder_mesh, icosphere


def test_face_index_validation():
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), [[0, 1, 3]])
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), [[-1, 1, 2]])


def test_nonfinite_vertices_rejected():
    verts = np.zeros((3, 3))
    verts[1, 2] = np.nan
    with pytest.raises(ValueError):
        TriangleMesh(verts, [[0, 1, 2]])


def test_degenerate_faces_flagged():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0]]
    faces = [[0, 1, 2], [0, 1, 3]]  # second face is collinear
    mesh = TriangleMesh(verts, faces).without_degenerate_faces()
    assert mesh.num_faces == 1
    assert mesh.dropped_degenerate == 1


@pytest.mark.parametrize("save,load", [(save_obj, load_obj), (save_ply, load_ply)])
def test_roundtrip(tmp_path, rng, save, load):
    mesh = icosphere(2, radius=0.37)
    mesh = TriangleMesh(mesh.vertices + rng.normal(0, 0.01, mesh.vertices.shape),
                        mesh.faces)
    path = tmp_path / ("m.obj" if save is save_obj else "m.ply")
    save(mesh, path)
    loaded = load(path)
    assert np.allclose(loaded.vertices, mesh.vertices, atol=1e-8)
    assert np.array_equal(loaded.faces, mesh.faces)


def test_obj_quads_triangulated(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    mesh = load_obj(path)
    assert mesh.num_faces == 2


def test_obj_face_with_slashes(tmp_path):
    path = tmp_path / "slash.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n")
    assert load_obj(path).num_faces == 1


def test_load_dispatch(tmp_path):
    mesh = box_mesh(0.1, segments=1)
    save_obj(mesh, tmp_path / "a.obj")
    save_ply(mesh, tmp_path / "a.ply")
    assert load_mesh(tmp_path / "a.obj").num_faces == mesh.num_faces
    assert load_mesh(tmp_path / "a.ply").num_faces == mesh.num_faces
    with pytest.raises(ValueError):
        load_mesh(tmp_path / "a.stl")


def test_concatenate():
    a = box_mesh(0.1, segments=1)
    b = cylinder_mesh(0.05, 0.2, sides=8, rings=2)
    both = concatenate_meshes(a, b)
    assert both.num_vertices == a.num_vertices + b.num_vertices
    assert both.num_faces == a.num_faces + b.num_faces
    assert both.faces.max() < both.num_vertices


def test_binary_ply_rejected(tmp_path):
    path = tmp_path / "b.ply"
    path.write_bytes(b"ply\nformat binary_little_endian 1.0\nend_header\n\x00\x01")
    with pytest.raises(ValueError):
        load_ply(path)
