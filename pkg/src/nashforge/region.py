"""Convex polygons cut out by exact linear inequalities, and edge partitions.

A polygon is stored as inward linear forms; vertices are recomputed as
exact rational intersections of consecutive edge lines, so boundary
incidence questions have exact answers.  Edge partitions group edges into
classes whose products become the inequalities of a corner region; a
partition is usable only when no class holds two edges meeting inside the
polygon, which for convex polygons means no two cyclically adjacent edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from nashforge.poly import MultiPoly

SNAP_DENOM = 1 << 48


class InvalidPartitionError(ValueError):
    pass


@dataclass(frozen=True)
class LinearForm:
    """a*x + b*y + c, kept exact; the region side is where the form is >= 0."""

    a: Fraction
    b: Fraction
    c: Fraction

    def eval(self, pt: Sequence[float]) -> float:
        return float(self.a) * pt[0] + float(self.b) * pt[1] + float(self.c)

    def eval_exact(self, pt: Sequence) -> Fraction:
        return self.a * Fraction(pt[0]) + self.b * Fraction(pt[1]) + self.c

    def to_multipoly(self) -> MultiPoly:
        return MultiPoly(
            2, {(1, 0): self.a, (0, 1): self.b, (0, 0): self.c}
        )

    @property
    def normal(self) -> tuple[Fraction, Fraction]:
        return (self.a, self.b)


def _snap(v: float) -> Fraction:
    return Fraction(round(v * SNAP_DENOM), SNAP_DENOM)


def _intersect(e1: LinearForm, e2: LinearForm) -> Optional[tuple[Fraction, Fraction]]:
    det = e1.a * e2.b - e2.a * e1.b
    if det == 0:
        return None
    x = (e1.b * e2.c - e2.b * e1.c) / det
    y = (e2.a * e1.c - e1.a * e2.c) / det
    return (x, y)


class ConvexPolygon:
    """Bounded convex polygon from n inward edge forms in cyclic order.

    Vertex j is the exact intersection of edge lines j and j+1 (mod n),
    so vertex j lies on edges j and j+1, and edge j runs from vertex j-1
    to vertex j.
    """

    __slots__ = ("n", "edges", "vertices")

    def __init__(self, edges: Sequence[LinearForm]):
        n = len(edges)
        if n < 3:
            raise ValueError("a polygon needs at least 3 edges")
        verts = []
        for j in range(n):
            p = _intersect(edges[j], edges[(j + 1) % n])
            if p is None:
                raise ValueError(f"edge lines {j} and {(j + 1) % n} are parallel")
            verts.append(p)
        # consistent turning direction, wraparound included
        sign = 0
        for j in range(n):
            e1, e2 = edges[j], edges[(j + 1) % n]
            cross = e1.a * e2.b - e2.a * e1.b
            s = (cross > 0) - (cross < 0)
            if s == 0:
                raise ValueError("consecutive edges share a direction")
            if sign == 0:
                sign = s
            elif s != sign:
                raise ValueError("edge normals do not turn consistently; not convex")
        # every vertex strictly inside all non-incident half-planes
        for j, v in enumerate(verts):
            incident = {j, (j + 1) % n}
            for i, e in enumerate(edges):
                val = e.eval_exact(v)
                if i in incident:
                    if val != 0:
                        raise ValueError("vertex drifted off its own edge line")
                elif val <= 0:
                    raise ValueError(
                        f"vertex {j} violates edge {i}; region unbounded or not convex"
                    )
        self.n = n
        self.edges = tuple(edges)
        self.vertices = tuple(verts)

    def vertex_edges(self, j: int) -> tuple[int, int]:
        """Indices of the two edges meeting at vertex j."""
        return (j % self.n, (j + 1) % self.n)

    def edge_vertices(self, j: int) -> tuple[int, int]:
        """Endpoint vertex indices of edge j."""
        return ((j - 1) % self.n, j % self.n)

    def interior_witness(self) -> tuple[Fraction, Fraction]:
        xs = sum(v[0] for v in self.vertices)
        ys = sum(v[1] for v in self.vertices)
        return (xs / self.n, ys / self.n)

    def contains(self, pt, strict: bool = False) -> bool:
        for e in self.edges:
            val = e.eval_exact(pt)
            if val < 0 or (strict and val == 0):
                return False
        return True

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [float(v[0]) for v in self.vertices]
        ys = [float(v[1]) for v in self.vertices]
        return (min(xs), max(xs), min(ys), max(ys))

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolygon) and self.edges == other.edges

    def __hash__(self):
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"ConvexPolygon(n={self.n})"


def regular_polygon(n: int, radius=1) -> ConvexPolygon:
    """Regular n-gon around the origin with unit-length inward normals.

    Normals are snapped to the 2**-48 grid so downstream arithmetic is
    exact; vertices then come out of exact line intersections.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    raw = [
        (r * math.cos(2 * math.pi * j / n), r * math.sin(2 * math.pi * j / n))
        for j in range(n)
    ]
    edges = []
    for j in range(n):
        px, py = raw[(j - 1) % n]
        qx, qy = raw[j]
        dx, dy = qx - px, qy - py
        norm = math.hypot(dx, dy)
        # inward normal for counterclockwise vertex order
        nx, ny = -dy / norm, dx / norm
        c = -(nx * px + ny * py)
        edges.append(LinearForm(_snap(nx), _snap(ny), _snap(c)))
    return ConvexPolygon(edges)


class EdgePartition:
    """Partition of edge indices into classes, canonically ordered."""

    __slots__ = ("classes",)

    def __init__(self, classes):
        norm = tuple(sorted((tuple(sorted(set(c))) for c in classes), key=lambda c: c[0]))
        if any(not c for c in norm):
            raise ValueError("empty class")
        self.classes = norm

    @property
    def s(self) -> int:
        return len(self.classes)

    def covered(self) -> set[int]:
        out: set[int] = set()
        for c in self.classes:
            out.update(c)
        return out

    def class_of(self, edge: int) -> int:
        for k, c in enumerate(self.classes):
            if edge in c:
                return k
        raise ValueError(f"edge {edge} not in any class")

    def __eq__(self, other) -> bool:
        return isinstance(other, EdgePartition) and self.classes == other.classes

    def __hash__(self):
        return hash(self.classes)

    def __repr__(self) -> str:
        return f"EdgePartition({[list(c) for c in self.classes]})"


def feasible_s_range(n: int) -> tuple[int, int]:
    """Smallest and largest class counts an n-gon admits: parity floor to n."""
    if n < 3:
        raise ValueError("n must be at least 3")
    s_min = 2 + (1 - (-1) ** n) // 2
    return (s_min, n)


def _check_cover(n: int, partition: EdgePartition):
    if partition.covered() != set(range(n)):
        raise ValueError("classes are not a partition of the edge index set")
    total = sum(len(c) for c in partition.classes)
    if total != n:
        raise ValueError("classes overlap")


def validate_partition(
    polygon: ConvexPolygon, partition: EdgePartition
) -> tuple[bool, list[tuple[int, int, int]]]:
    """Check the separation rule; returns (ok, [(class, edge_i, edge_j), ...]).

    Two routes must agree: the cyclic-adjacency rule, and an exact
    geometric check that same-class edge lines never meet inside the
    closed polygon.
    """
    n = polygon.n
    _check_cover(n, partition)
    violations: set[tuple[int, int, int]] = set()
    for k, cls in enumerate(partition.classes):
        for ai in range(len(cls)):
            for bi in range(ai + 1, len(cls)):
                i, j = cls[ai], cls[bi]
                if (i + 1) % n == j or (j + 1) % n == i:
                    violations.add((k, i, j))
                    continue
                p = _intersect(polygon.edges[i], polygon.edges[j])
                if p is None:
                    if polygon.edges[i] == polygon.edges[j]:
                        violations.add((k, i, j))
                    continue
                if polygon.contains(p):
                    violations.add((k, i, j))
    return (not violations, sorted(violations))


def class_polynomials(
    polygon: ConvexPolygon, partition: EdgePartition, validate: bool = True
) -> list[MultiPoly]:
    """Per-class products of edge forms; degree equals the class size.

    validate=False skips the separation check; the only legitimate use is
    building deliberately broken varieties for negative tests.
    """
    if validate:
        ok, bad = validate_partition(polygon, partition)
        if not ok:
            raise InvalidPartitionError(f"partition violates edge separation: {bad}")
    else:
        _check_cover(polygon.n, partition)
    out = []
    for cls in partition.classes:
        p = MultiPoly.constant(2, 1)
        for i in cls:
            p = p * polygon.edges[i].to_multipoly()
        out.append(p)
    return out


def enumerate_valid_partitions(
    polygon: ConvexPolygon, s: int, limit: Optional[int] = None
) -> list[EdgePartition]:
    """Valid partitions into exactly s classes, lexicographic on assignment.

    Assignment vectors are restricted-growth strings, so each partition
    appears once; empty result means the (n, s) pair admits none.
    """
    n = polygon.n
    if s < 1 or s > n:
        return []
    results: list[EdgePartition] = []
    assign = [0] * n

    def rec(i: int, used: int):
        if limit is not None and len(results) >= limit:
            return
        if i == n:
            if used != s:
                return
            blocks: list[list[int]] = [[] for _ in range(used)]
            for e, k in enumerate(assign):
                blocks[k].append(e)
            part = EdgePartition(blocks)
            ok, _ = validate_partition(polygon, part)
            if ok:
                results.append(part)
            return
        top = min(used, s - 1)
        for k in range(top + 1):
            if i > 0 and assign[i - 1] == k:
                continue
            if i == n - 1 and assign[0] == k:
                continue
            # still enough indices left to open the remaining classes
            nused = max(used, k + 1)
            if nused + (n - i - 1) < s:
                continue
            assign[i] = k
            rec(i + 1, nused)
            if limit is not None and len(results) >= limit:
                return
        return

    rec(0, 0)
    return results


@lru_cache(maxsize=None)
def partition_exists(n: int, s: int) -> bool:
    """Backtracking existence of a cycle coloring with exactly s classes."""
    if n < 3 or s < 1 or s > n:
        return False

    assign = [0] * n

    def rec(i: int, used: int) -> bool:
        if i == n:
            return used == s
        top = min(used, s - 1)
        for k in range(top + 1):
            if i > 0 and assign[i - 1] == k:
                continue
            if i == n - 1 and assign[0] == k:
                continue
            nused = max(used, k + 1)
            if nused + (n - i - 1) < s:
                continue
            assign[i] = k
            if rec(i + 1, nused):
                return True
        return False

    return rec(0, 0)


@dataclass(frozen=True)
class CornerRegion:
    """Region {h_1 >= 0, ..., h_l >= 0} in R^d with a strict interior witness."""

    d: int
    ineqs: tuple[MultiPoly, ...]
    witness: tuple

    def __post_init__(self):
        for h in self.ineqs:
            if h.nvars != self.d:
                raise ValueError("inequality arity does not match ambient dimension")
        if len(self.witness) != self.d:
            raise ValueError("witness has wrong dimension")
        for h in self.ineqs:
            if h.eval([float(w) for w in self.witness]) <= 0:
                raise ValueError("witness is not strictly interior")

    @property
    def ell(self) -> int:
        return len(self.ineqs)

    @classmethod
    def from_polygon(
        cls, polygon: ConvexPolygon, partition: EdgePartition, validate: bool = True
    ) -> "CornerRegion":
        polys = class_polynomials(polygon, partition, validate=validate)
        w = polygon.interior_witness()
        return cls(2, tuple(polys), (w[0], w[1]))


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def region_to_json(
    polygon: ConvexPolygon, partition: Optional[EdgePartition] = None
) -> dict:
    doc: dict = {
        "n": polygon.n,
        "edges": [
            [_frac_str(e.a), _frac_str(e.b), _frac_str(e.c)] for e in polygon.edges
        ],
    }
    if partition is not None:
        doc["classes"] = [list(c) for c in partition.classes]
    return doc


def region_from_json(doc: dict) -> tuple[ConvexPolygon, Optional[EdgePartition]]:
    edges = [LinearForm(*(Fraction(v) for v in row)) for row in doc["edges"]]
    polygon = ConvexPolygon(edges)
    if polygon.n != doc["n"]:
        raise ValueError("edge count does not match n")
    partition = None
    if "classes" in doc:
        partition = EdgePartition(doc["classes"])
    return polygon, partition
