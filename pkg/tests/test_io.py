import struct

import numpy as np
import pytest

from curvrec.errors import ParseError, UnsupportedFormat
from curvrec.io import (CloudFileFormat, read_mesh, read_point_cloud, write_mesh,
                        write_point_cloud)
from curvrec.model import PointCloud, TriangleMesh


def test_xyz_basic(tmp_path):
    p = tmp_path / "a.xyz"
    p.write_text("0 0 0\n1 2 3\n")
    cloud = read_point_cloud(p)
    assert len(cloud) == 2
    assert np.allclose(cloud.points[1], [1, 2, 3])
    assert not cloud.has_normals


def test_xyz_with_normals_and_errors(tmp_path):
    p = tmp_path / "b.xyz"
    p.write_text("0 0 0 0 0 1\n1 0 0 1 0 0\n")
    cloud = read_point_cloud(p)
    assert cloud.has_normals
    assert np.allclose(cloud.normals[0], [0, 0, 1])

    bad = tmp_path / "c.xyz"
    bad.write_text("1 2\n")
    with pytest.raises(ParseError):
        read_point_cloud(bad)
    mixed = tmp_path / "d.xyz"
    mixed.write_text("0 0 0\n1 2 3 4 5 6\n")
    with pytest.raises(ParseError):
        read_point_cloud(mixed)
    nonnum = tmp_path / "e.xyz"
    nonnum.write_text("a b c\n")
    with pytest.raises(ParseError):
        read_point_cloud(nonnum)


def test_ply_ascii_with_normals(tmp_path):
    p = tmp_path / "one.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "property float nx\nproperty float ny\nproperty float nz\n"
                 "end_header\n0 0 1 0 0 1\n")
    cloud = read_point_cloud(p)
    assert len(cloud) == 1
    assert np.allclose(cloud.points[0], [0, 0, 1])
    assert np.allclose(cloud.normals[0], [0, 0, 1])


def test_ply_truncated(tmp_path):
    p = tmp_path / "trunc.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 10\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "end_header\n0 0 0\n1 1 1\n2 2 2\n")
    with pytest.raises(ParseError):
        read_point_cloud(p)


def test_ply_binary_le_roundtrip(tmp_path):
    pts = np.array([[0.25, -1.5, 3.0], [7.0, 0.125, -2.0]], dtype=np.float32)
    p = tmp_path / "bin.ply"
    header = ("ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
              "property float x\nproperty float y\nproperty float z\nend_header\n")
    p.write_bytes(header.encode() + pts.tobytes())
    cloud = read_point_cloud(p)
    assert cloud.points.shape == (2, 3)
    assert np.allclose(cloud.points, pts)

    trunc = tmp_path / "bin_trunc.ply"
    trunc.write_bytes(header.encode() + pts.tobytes()[:-4])
    with pytest.raises(ParseError):
        read_point_cloud(trunc)


def test_ply_binary_double_and_extra_float_props(tmp_path):
    p = tmp_path / "d.ply"
    header = ("ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
              "property double x\nproperty double y\nproperty double z\n"
              "property double quality\nend_header\n")
    p.write_bytes(header.encode() + struct.pack("<dddd", 1.0, 2.0, 3.0, 9.0))
    cloud = read_point_cloud(p)
    assert np.allclose(cloud.points, [[1, 2, 3]])


def test_ply_rejects_nonfloat_vertex_props(tmp_path):
    p = tmp_path / "u.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "property uchar red\nend_header\n0 0 0 255\n")
    with pytest.raises(UnsupportedFormat):
        read_point_cloud(p)


def test_obj_points(tmp_path):
    p = tmp_path / "pts.obj"
    p.write_text("# comment\nv 1 2 3\nv 4 5 6\nf 1 2 1\n")
    cloud = read_point_cloud(p)
    assert len(cloud) == 2


def test_format_detection(tmp_path):
    with pytest.raises(UnsupportedFormat):
        read_point_cloud(tmp_path / "x.unknown")
    p = tmp_path / "f.xyz"
    p.write_text("0 0 0\n")
    assert len(read_point_cloud(p, CloudFileFormat.XYZ_ASCII)) == 1


def test_write_mesh_single_triangle(tmp_path):
    mesh = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float),
                        np.array([[0, 1, 2]]))
    p = tmp_path / "tri.obj"
    write_mesh(mesh, p)
    lines = p.read_text().splitlines()
    assert len([l for l in lines if l.startswith("v ")]) == 3
    assert lines[-1] == "f 1 2 3"


def test_write_mesh_empty(tmp_path):
    p = tmp_path / "empty.obj"
    write_mesh(TriangleMesh(), p)
    assert p.read_text() == ""
    back = read_mesh(p)
    assert back.num_vertices == 0 and back.num_faces == 0


def test_mesh_roundtrip_random(tmp_path):
    rng = np.random.default_rng(9)
    verts = rng.normal(size=(40, 3)) * 1.7
    faces = rng.integers(0, 40, size=(60, 3))
    faces = faces[~((faces[:, 0] == faces[:, 1]) & (faces[:, 1] == faces[:, 2]))]
    mesh = TriangleMesh(verts, faces)
    p = tmp_path / "rt.obj"
    write_mesh(mesh, p)
    back = read_mesh(p)
    assert np.array_equal(back.faces, mesh.faces)
    # shortest-repr floats survive the text round trip exactly
    assert np.array_equal(back.vertices, mesh.vertices)


def test_cloud_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    nrm = rng.normal(size=(30, 3))
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    cloud = PointCloud(rng.normal(size=(30, 3)), nrm)
    p = tmp_path / "c.xyz"
    write_point_cloud(cloud, p)
    back = read_point_cloud(p)
    assert np.array_equal(back.points, cloud.points)
    assert np.abs(back.normals - cloud.normals).max() < 1e-12
