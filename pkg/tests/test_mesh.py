import math
from fractions import Fraction

import numpy as np
import pytest

from nashforge.mesh import (
    GlueKey,
    MeshError,
    TriangleMesh,
    build_surface_mesh,
    export_mesh,
    mesh_euler,
    triangulate_polygon,
)
from nashforge.region import (
    EdgePartition,
    InvalidPartitionError,
    enumerate_valid_partitions,
    regular_polygon,
)
from nashforge.topology import cw_counts, euler_char, genus

from oracles import euler_from_faces, parse_obj, parse_ply


def first_partition(n: int, s: int) -> EdgePartition:
    parts = enumerate_valid_partitions(regular_polygon(n), s, limit=1)
    assert parts, f"no valid partition for n={n}, s={s}"
    return parts[0]


def test_triangulate_square_res1():
    poly = regular_polygon(4)
    planar = triangulate_polygon(poly, 1)
    assert len(planar.vertices) == 5
    assert len(planar.faces) == 4
    assert planar.active_edges[0] == frozenset()
    corner_tags = sorted(planar.active_edges[1:], key=sorted)
    assert corner_tags == [
        frozenset({0, 1}),
        frozenset({0, 3}),
        frozenset({1, 2}),
        frozenset({2, 3}),
    ]
    v, e, f, chi, comps = euler_from_faces(planar.faces)
    assert (v, f, chi, comps) == (5, 4, 1, 1)


def test_triangulate_subdivision_exact_incidence():
    poly = regular_polygon(6)
    res = 3
    planar = triangulate_polygon(poly, res)
    assert len(planar.vertices) == 1 + 6 * res
    assert len(planar.faces) == 6 * res
    for vid, tags in enumerate(planar.active_edges):
        pt = planar.vertices[vid]
        for j in range(6):
            val = poly.edges[j].eval_exact(pt)
            assert (val == 0) == (j in tags)
            assert val >= 0
    n_corner = sum(1 for t in planar.active_edges if len(t) == 2)
    n_mid = sum(1 for t in planar.active_edges if len(t) == 1)
    assert (n_corner, n_mid) == (6, 6 * (res - 1))


def test_triangulate_rejects_zero_resolution():
    with pytest.raises(ValueError):
        triangulate_polygon(regular_polygon(4), 0)


@pytest.mark.parametrize("n,s", [(4, 2), (3, 3), (6, 3), (5, 3), (6, 4)])
@pytest.mark.parametrize("res", [2, 3, 4])
def test_surface_counts_and_euler(n, s, res):
    poly = regular_polygon(n)
    part = first_partition(n, s)
    mesh = build_surface_mesh(poly, part, resolution=res)
    v, e, f, chi, comps = mesh_euler(mesh)
    assert f == (2**s) * n * res
    assert e == 3 * f // 2
    assert v == 2**s + n * 2 ** (s - 2) + n * (res - 1) * 2 ** (s - 1)
    assert chi == euler_char(n, s)
    assert comps == 1
    g = genus(n, s)
    assert g is not None and chi == 2 - 2 * g


def test_refinement_matches_coarse_cells():
    # res=2 vertex census lines up with the unrefined cell counts: corners,
    # one midpoint per cell edge, one fan center per cell
    n, s = 4, 2
    mesh = build_surface_mesh(regular_polygon(n), first_partition(n, s), resolution=2)
    cw = cw_counts(n, s)
    v, e, f, chi, comps = mesh_euler(mesh)
    assert v == cw.v + cw.e + cw.f
    assert f == 4 * cw.e
    assert chi == cw.chi


def test_surface_rejects_resolution_one():
    with pytest.raises(ValueError):
        build_surface_mesh(regular_polygon(4), first_partition(4, 2), resolution=1)


def test_boundary_fibers_pinned_and_signed():
    poly = regular_polygon(6)
    part = first_partition(6, 3)
    mesh = build_surface_mesh(poly, part, resolution=2)
    planar = triangulate_polygon(poly, 2)
    by_planar: dict[int, list[GlueKey]] = {}
    for key in mesh.keys:
        by_planar.setdefault(key.vertex, []).append(key)
    for vid, tags in enumerate(planar.active_edges):
        active_cls = {part.class_of(j) for j in tags}
        expected = 2 ** (part.s - len(active_cls))
        assert len(by_planar[vid]) == expected
    index = {key: i for i, key in enumerate(mesh.keys)}
    for key, i in index.items():
        row = mesh.vertices[i]
        for k in range(part.s):
            if key.signs[k] == 0:
                assert row[2 + k] == 0.0
            else:
                assert key.signs[k] * row[2 + k] > 0
    # mirrored keys carry mirrored heights
    for key, i in index.items():
        mirror = GlueKey(key.vertex, tuple(-x for x in key.signs))
        j = index[mirror]
        assert np.array_equal(mesh.vertices[i, 2:], -mesh.vertices[j, 2:])


def test_build_is_deterministic():
    poly = regular_polygon(5)
    part = first_partition(5, 3)
    m1 = build_surface_mesh(poly, part, resolution=3)
    m2 = build_surface_mesh(poly, part, resolution=3)
    assert m1.keys == m2.keys
    assert m1.faces == m2.faces
    assert np.array_equal(m1.vertices, m2.vertices)


def test_invalid_partition_rejected():
    poly = regular_polygon(4)
    bad = EdgePartition(({0, 1}, {2, 3}))
    with pytest.raises(InvalidPartitionError):
        build_surface_mesh(poly, bad, resolution=2)


def test_adjacent_classes_pinch_the_double():
    # with validation off the mesh still closes up, but the shared corners
    # each split into two vertices and the characteristic drifts off formula
    poly = regular_polygon(4)
    bad = EdgePartition(({0, 1}, {2, 3}))
    mesh = build_surface_mesh(poly, bad, resolution=2, validate=False)
    v, e, f, chi, comps = mesh_euler(mesh)
    assert f == 32 and e == 48
    assert v == 18
    assert chi == 2
    assert chi != euler_char(4, 2)
    assert comps == 1


def test_mesh_euler_rejects_open_mesh():
    part = EdgePartition(({0, 2}, {1, 3}))
    verts = np.zeros((3, 4))
    open_mesh = TriangleMesh(
        n=4,
        s=2,
        partition=part,
        resolution=1,
        vertices=verts,
        faces=((0, 1, 2),),
        keys=(GlueKey(0, (1, 1)), GlueKey(1, (1, 1)), GlueKey(2, (1, 1))),
    )
    with pytest.raises(MeshError):
        mesh_euler(open_mesh)


def test_export_obj_roundtrip(tmp_path):
    mesh = build_surface_mesh(regular_polygon(4), first_partition(4, 2), resolution=2)
    path = tmp_path / "double.obj"
    pts = export_mesh(mesh, path, fmt="obj", projection="first3")
    verts, faces = parse_obj(path.read_text())
    assert len(verts) == mesh.vertices.shape[0]
    assert all(len(row) == 3 for row in verts)
    assert np.allclose(np.array(verts), pts)
    assert np.array_equal(pts, mesh.vertices[:, :3])
    assert [tuple(fc) for fc in faces] == list(mesh.faces)
    assert euler_from_faces(faces)[:4] == mesh_euler(mesh)[:4]


def test_export_ply_roundtrip(tmp_path):
    mesh = build_surface_mesh(regular_polygon(6), first_partition(6, 3), resolution=2)
    path = tmp_path / "double.ply"
    pts = export_mesh(mesh, path, fmt="ply", projection="pca")
    text = path.read_text()
    assert text.startswith("ply\nformat ascii 1.0\n")
    verts, faces = parse_ply(text)
    assert len(verts) == mesh.vertices.shape[0]
    assert np.allclose(np.array(verts), pts)
    assert [tuple(fc) for fc in faces] == list(mesh.faces)
    assert euler_from_faces(faces)[3] == euler_char(6, 3)


def test_export_bytes_deterministic(tmp_path):
    mesh = build_surface_mesh(regular_polygon(5), first_partition(5, 3), resolution=2)
    blobs = {}
    for fmt in ("obj", "ply"):
        for proj in ("first3", "pca"):
            p1 = tmp_path / f"a.{proj}.{fmt}"
            p2 = tmp_path / f"b.{proj}.{fmt}"
            export_mesh(mesh, p1, fmt=fmt, projection=proj)
            export_mesh(
                build_surface_mesh(
                    regular_polygon(5), first_partition(5, 3), resolution=2
                ),
                p2,
                fmt=fmt,
                projection=proj,
            )
            b1, b2 = p1.read_bytes(), p2.read_bytes()
            assert b1 == b2
            blobs[(fmt, proj)] = b1
    assert blobs[("obj", "first3")] != blobs[("obj", "pca")]


def test_pca_projection_properties():
    mesh = build_surface_mesh(regular_polygon(6), first_partition(6, 3), resolution=2)
    from nashforge.mesh import _project

    pts = _project(mesh, "pca")
    assert pts.shape == (mesh.vertices.shape[0], 3)
    # centered data: projection preserves the top singular directions' energy
    centered = mesh.vertices - mesh.vertices.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    energy = np.linalg.norm(pts) ** 2
    assert energy == pytest.approx(float(np.sum(sv[:3] ** 2)), rel=1e-12)
    with pytest.raises(ValueError):
        _project(mesh, "isometric")


def test_export_rejects_unknown_format(tmp_path):
    mesh = build_surface_mesh(regular_polygon(4), first_partition(4, 2), resolution=2)
    with pytest.raises(ValueError):
        export_mesh(mesh, tmp_path / "x.stl", fmt="stl")
