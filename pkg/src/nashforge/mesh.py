"""Triangle meshes of doubled polygon surfaces.

The planar polygon is fanned from its exact centroid with subdivided
boundary edges; every sheet of the double reuses that planar mesh, and
sheets are merged along the boundary by gluing keys: a planar vertex id
plus the sign vector masked to zero on every class active there.  All
boundary incidence comes from exact rational arithmetic, so the merge is
combinatorial and the refined mesh keeps the Euler characteristic of the
coarse cell structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from nashforge.region import (
    ConvexPolygon,
    EdgePartition,
    InvalidPartitionError,
    validate_partition,
)


class MeshError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class GlueKey:
    """Identity of a surface vertex: planar vertex id + masked sign vector."""

    vertex: int
    signs: tuple[int, ...]


@dataclass(frozen=True)
class PlanarMesh:
    vertices: tuple[tuple[Fraction, Fraction], ...]
    faces: tuple[tuple[int, int, int], ...]
    active_edges: tuple[frozenset[int], ...]


def triangulate_polygon(polygon: ConvexPolygon, resolution: int = 1) -> PlanarMesh:
    """Fan triangulation with each boundary edge split into `resolution` parts.

    Subdivision points are exact rational combinations of the exact
    vertices, so every boundary point knows exactly which edges it sits on.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    n = polygon.n
    verts: list[tuple[Fraction, Fraction]] = []
    actives: list[frozenset[int]] = []
    center = polygon.interior_witness()
    verts.append(center)
    actives.append(frozenset())
    boundary_ids = []
    for j in range(n):
        va, vb = polygon.edge_vertices(j)
        a, b = polygon.vertices[va], polygon.vertices[vb]
        # corner first: starts edge j, still touches edge j-1 wrapping behind it
        boundary_ids.append(len(verts))
        verts.append(a)
        actives.append(frozenset(polygon.vertex_edges(va)))
        for q in range(1, resolution):
            t = Fraction(q, resolution)
            boundary_ids.append(len(verts))
            verts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
            actives.append(frozenset((j,)))
    faces = []
    m = len(boundary_ids)
    for i in range(m):
        faces.append((0, boundary_ids[i], boundary_ids[(i + 1) % m]))
    return PlanarMesh(tuple(verts), tuple(faces), tuple(actives))


@dataclass(frozen=True)
class TriangleMesh:
    n: int
    s: int
    partition: EdgePartition
    resolution: int
    vertices: np.ndarray  # (V, 2 + s) float
    faces: tuple[tuple[int, int, int], ...]
    keys: tuple[GlueKey, ...]


def build_surface_mesh(
    polygon: ConvexPolygon,
    partition: EdgePartition,
    resolution: int = 4,
    validate: bool = True,
) -> TriangleMesh:
    """Mesh the double: one planar sheet per sign vector, glued on the boundary.

    Needs resolution >= 2: a corner-to-corner arc has both endpoints pinned
    on two classes each, so sheet copies of the arc would share endpoints and
    collapse onto a single mesh edge.  An interior arc vertex pinned only on
    the arc's own class keeps the copies apart.
    """
    if resolution < 2:
        raise ValueError("surface meshing needs resolution >= 2")
    if validate:
        ok, bad = validate_partition(polygon, partition)
        if not ok:
            raise InvalidPartitionError(f"partition violates edge separation: {bad}")
    planar = triangulate_polygon(polygon, resolution)
    s = partition.s
    n = polygon.n

    cls_factors = [
        [polygon.edges[i] for i in cls] for cls in partition.classes
    ]
    # exact class values and active classes per planar vertex
    h_exact: list[tuple[Fraction, ...]] = []
    active_cls: list[frozenset[int]] = []
    for vid, v in enumerate(planar.vertices):
        vals = []
        for forms in cls_factors:
            acc = Fraction(1)
            for form in forms:
                acc *= form.eval_exact(v)
            vals.append(acc)
        h_exact.append(tuple(vals))
        act = frozenset(
            k
            for k in range(s)
            if any(e in partition.classes[k] for e in planar.active_edges[vid])
        )
        for k in range(s):
            if (vals[k] == 0) != (k in act):
                raise MeshError("exact zero set disagrees with incidence tags")
            if vals[k] < 0:
                raise MeshError("class value negative inside the polygon")
        active_cls.append(act)

    key_set = set()
    for eps in product((-1, 1), repeat=s):
        for vid in range(len(planar.vertices)):
            signs = tuple(
                0 if k in active_cls[vid] else eps[k] for k in range(s)
            )
            key_set.add(GlueKey(vid, signs))
    keys = tuple(sorted(key_set))
    index = {key: i for i, key in enumerate(keys)}

    coords = np.zeros((len(keys), 2 + s))
    for key, i in index.items():
        vx, vy = planar.vertices[key.vertex]
        coords[i, 0] = float(vx)
        coords[i, 1] = float(vy)
        for k in range(s):
            hv = float(h_exact[key.vertex][k])
            coords[i, 2 + k] = key.signs[k] * math.sqrt(hv)

    faces = []
    for eps in product((-1, 1), repeat=s):
        for a, b, c in planar.faces:
            tri = tuple(
                index[
                    GlueKey(
                        vid,
                        tuple(0 if k in active_cls[vid] else eps[k] for k in range(s)),
                    )
                ]
                for vid in (a, b, c)
            )
            faces.append(tri)

    mesh = TriangleMesh(
        n=n,
        s=s,
        partition=partition,
        resolution=resolution,
        vertices=coords,
        faces=tuple(faces),
        keys=keys,
    )
    # a double of a closed polygon must come out watertight
    mesh_euler(mesh)
    return mesh


def mesh_euler(mesh: TriangleMesh) -> tuple[int, int, int, int, int]:
    """(V, E, F, chi, components); raises MeshError if any edge is not shared
    by exactly two faces."""
    edge_count: dict[frozenset[int], int] = {}
    for tri in mesh.faces:
        for i in range(3):
            e = frozenset((tri[i], tri[(i + 1) % 3]))
            if len(e) != 2:
                raise MeshError("degenerate face")
            edge_count[e] = edge_count.get(e, 0) + 1
    bad = {e: c for e, c in edge_count.items() if c != 2}
    if bad:
        raise MeshError(f"mesh is not closed: {len(bad)} edges with count != 2")
    nv = mesh.vertices.shape[0]
    parent = list(range(nv))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for tri in mesh.faces:
        r = find(tri[0])
        for other in tri[1:]:
            ro = find(other)
            if ro != r:
                parent[ro] = r
    comps = len({find(i) for i in range(nv)})
    ne = len(edge_count)
    nf = len(mesh.faces)
    return (nv, ne, nf, nv - ne + nf, comps)


def _project(mesh: TriangleMesh, projection: str) -> np.ndarray:
    if projection == "first3":
        return mesh.vertices[:, :3].copy()
    if projection == "pca":
        centered = mesh.vertices - mesh.vertices.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        basis = vt[:3].copy()
        for i in range(3):
            j = int(np.argmax(np.abs(basis[i])))
            if basis[i, j] < 0:
                basis[i] = -basis[i]
        return centered @ basis.T
    raise ValueError(f"unknown projection {projection!r}")


def export_mesh(
    mesh: TriangleMesh, path, fmt: str = "obj", projection: str = "first3"
) -> np.ndarray:
    """Write the projected mesh; returns the (V, 3) coordinates used.

    Output is plain text with %.17g coordinates and no timestamps, so a
    given mesh always serializes to identical bytes.
    """
    pts = _project(mesh, projection)
    lines = []
    if fmt == "obj":
        for row in pts:
            lines.append("v " + " ".join("%.17g" % c for c in row))
        for a, b, c in mesh.faces:
            lines.append(f"f {a + 1} {b + 1} {c + 1}")
    elif fmt == "ply":
        lines.append("ply")
        lines.append("format ascii 1.0")
        lines.append(f"element vertex {pts.shape[0]}")
        lines.append("property double x")
        lines.append("property double y")
        lines.append("property double z")
        lines.append(f"element face {len(mesh.faces)}")
        lines.append("property list uchar int vertex_indices")
        lines.append("end_header")
        for row in pts:
            lines.append(" ".join("%.17g" % c for c in row))
        for a, b, c in mesh.faces:
            lines.append(f"3 {a} {b} {c}")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return pts
