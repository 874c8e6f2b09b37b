"""Cell counts and genus of doubled polygon surfaces.

Doubling an n-gon across s edge classes produces a closed surface built
from 2**s mirrored polygon sheets.  Closed-form cell counts and genus
live here next to an independent gluing construction that assembles the
quotient complex cell by cell, so the formulas can be checked against an
explicit union-find computation instead of themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from nashforge.region import (
    ConvexPolygon,
    EdgePartition,
    InvalidPartitionError,
    feasible_s_range,
    partition_exists,
    validate_partition,
)


@dataclass(frozen=True)
class CWCounts:
    v: int
    e: int
    f: int

    @property
    def chi(self) -> int:
        return self.v - self.e + self.f


def cw_counts(n: int, s: int) -> CWCounts:
    """Vertex, edge, face counts of the doubled n-gon with s classes."""
    if n < 3:
        raise ValueError("n must be at least 3")
    if s < 2:
        raise ValueError("s must be at least 2")
    return CWCounts(2 ** (s - 2) * n, 2 ** (s - 1) * n, 2**s)


def euler_char(n: int, s: int) -> int:
    if n < 3:
        raise ValueError("n must be at least 3")
    if s < 2:
        raise ValueError("s must be at least 2")
    return 2 ** (s - 2) * (4 - n)


def genus(n: int, s: int) -> Optional[int]:
    """Genus of the doubled surface, or None when (n, s) is infeasible.

    Three independent gates: the parity window on s, existence of an edge
    partition with no same-class adjacent pair, and integrality plus
    non-negativity of the closed form itself.
    """
    if n < 3:
        return None
    s_min, s_max = feasible_s_range(n)
    if not s_min <= s <= s_max:
        return None
    if not partition_exists(n, s):
        return None
    g = Fraction(2) ** (s - 3) * (n - 4) + 1
    if g.denominator != 1 or g < 0:
        return None
    return int(g)


@dataclass(frozen=True)
class GenusTable:
    n_values: tuple[int, ...]
    s_values: tuple[int, ...]
    cells: dict

    def cell(self, n: int, s: int) -> Optional[int]:
        return self.cells[(n, s)]

    def to_csv(self) -> str:
        header = "n," + ",".join(f"s={s}" for s in self.s_values)
        lines = [header]
        for n in self.n_values:
            row = [str(n)]
            for s in self.s_values:
                g = self.cells[(n, s)]
                row.append("--" if g is None else str(g))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        head = "| n\\s | " + " | ".join(str(s) for s in self.s_values) + " |"
        sep = "|" + "---|" * (len(self.s_values) + 1)
        lines = [head, sep]
        for n in self.n_values:
            cells = [
                "--" if self.cells[(n, s)] is None else str(self.cells[(n, s)])
                for s in self.s_values
            ]
            lines.append(f"| {n} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def genus_table(n_max: int = 7, s_max: int = 7) -> GenusTable:
    if n_max < 3 or s_max < 2:
        raise ValueError("need n_max >= 3 and s_max >= 2")
    ns = tuple(range(3, n_max + 1))
    ss = tuple(range(2, s_max + 1))
    cells = {(n, s): genus(n, s) for n in ns for s in ss}
    return GenusTable(ns, ss, cells)


def _mask(eps: tuple[int, ...], active: frozenset[int]) -> tuple[int, ...]:
    return tuple(0 if k in active else e for k, e in enumerate(eps))


@dataclass(frozen=True)
class GluedComplex:
    counts: CWCounts
    components: int
    vertex_face: dict
    edge_face: dict

    @property
    def chi(self) -> int:
        return self.counts.chi


def glue_complex(polygon: ConvexPolygon, partition: EdgePartition) -> GluedComplex:
    """Assemble the quotient cell complex of the doubled polygon explicitly.

    One polygon sheet per sign vector; a boundary cell of sheet eps is
    identified with the same cell of eps' when the two vectors agree off
    the classes active at that cell.  Counts come from the quotient cells
    themselves, not from any closed form.
    """
    ok, bad = validate_partition(polygon, partition)
    if not ok:
        raise InvalidPartitionError(f"cannot glue an invalid partition: {bad}")
    n = polygon.n
    s = partition.s
    cls_of = {i: partition.class_of(i) for i in range(n)}

    faces = list(product((-1, 1), repeat=s))
    vertex_cells = set()
    edge_cells = set()
    vertex_face: dict = {}
    edge_face: dict = {}
    for eps in faces:
        for j in range(n):
            e1, e2 = polygon.vertex_edges(j)
            vkey = (j, _mask(eps, frozenset((cls_of[e1], cls_of[e2]))))
            vertex_cells.add(vkey)
            vertex_face[vkey] = vertex_face.get(vkey, 0) + 1
            ekey = (j, _mask(eps, frozenset((cls_of[j],))))
            edge_cells.add(ekey)
            edge_face[ekey] = edge_face.get(ekey, 0) + 1

    # connectivity of the face sheets through shared edge cells
    parent = {eps: eps for eps in faces}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for eps in faces:
        for j in range(n):
            k = cls_of[j]
            flipped = tuple(-e if m == k else e for m, e in enumerate(eps))
            ra, rb = find(eps), find(flipped)
            if ra != rb:
                parent[ra] = rb
    components = len({find(eps) for eps in faces})

    counts = CWCounts(len(vertex_cells), len(edge_cells), len(faces))
    return GluedComplex(counts, components, vertex_face, edge_face)
