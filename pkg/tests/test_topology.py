"""Closed-form surface invariants against the explicit gluing construction."""

import pytest

from nashforge.region import (
    EdgePartition,
    InvalidPartitionError,
    enumerate_valid_partitions,
    feasible_s_range,
    regular_polygon,
)
from nashforge.topology import (
    CWCounts,
    GluedComplex,
    cw_counts,
    euler_char,
    genus,
    genus_table,
    glue_complex,
)


def test_cw_counts_hexagon_three_classes():
    c = cw_counts(6, 3)
    assert (c.v, c.e, c.f) == (12, 24, 8)
    assert c.chi == -4


def test_cw_counts_square_two_classes_torus():
    c = cw_counts(4, 2)
    assert (c.v, c.e, c.f) == (4, 8, 4)
    assert c.chi == 0
    assert genus(4, 2) == 1


def test_euler_matches_alternating_sum():
    for n in range(3, 10):
        for s in range(2, 10):
            assert euler_char(n, s) == cw_counts(n, s).chi


def test_genus_gates():
    assert genus(3, 2) is None  # odd n cannot use two classes
    assert genus(5, 2) is None
    assert genus(4, 5) is None  # more classes than edges
    assert genus(3, 4) is None
    assert genus(3, 3) == 0
    assert genus(6, 2) == 2
    assert genus(7, 3) == 4
    assert genus(7, 7) == 49
    assert genus(2, 2) is None


def test_genus_consistent_with_euler():
    for n in range(3, 11):
        for s in range(2, 11):
            g = genus(n, s)
            if g is not None:
                assert 2 - 2 * g == euler_char(n, s), (n, s)


def test_guards():
    with pytest.raises(ValueError):
        cw_counts(2, 3)
    with pytest.raises(ValueError):
        cw_counts(4, 1)
    with pytest.raises(ValueError):
        euler_char(4, 0)


def test_glue_matches_formulas_spot():
    poly = regular_polygon(6)
    part = EdgePartition([[0, 3], [1, 4], [2, 5]])
    glued = glue_complex(poly, part)
    assert glued.counts == cw_counts(6, 3)
    assert glued.components == 1
    assert set(glued.vertex_face.values()) == {4}
    assert set(glued.edge_face.values()) == {2}


def test_glue_matches_formulas_all_feasible_small():
    for n in range(3, 8):
        poly = regular_polygon(n)
        s_min, s_max = feasible_s_range(n)
        for s in range(s_min, s_max + 1):
            parts = enumerate_valid_partitions(poly, s, limit=1)
            if not parts:
                continue
            glued = glue_complex(poly, parts[0])
            assert glued.counts == cw_counts(n, s), (n, s)
            assert glued.chi == euler_char(n, s), (n, s)
            assert glued.components == 1
            g = genus(n, s)
            assert g is not None
            assert 2 - 2 * g == glued.chi


def test_glue_rejects_invalid_partition():
    poly = regular_polygon(4)
    with pytest.raises(InvalidPartitionError):
        glue_complex(poly, EdgePartition([[0, 1], [2, 3]]))


def test_glue_independent_of_partition_choice():
    poly = regular_polygon(7)
    parts = enumerate_valid_partitions(poly, 3, limit=5)
    assert len(parts) >= 2
    results = {glue_complex(poly, p).counts for p in parts}
    assert len(results) == 1


def test_genus_table_formats():
    table = genus_table(7, 7)
    assert table.cell(3, 3) == 0
    assert table.cell(6, 4) == 5
    assert table.cell(4, 5) is None
    csv = table.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "n,s=2,s=3,s=4,s=5,s=6,s=7"
    assert lines[1] == "3,--,0,--,--,--,--"
    assert lines[3] == "5,--,2,3,5,--,--"
    md = table.to_markdown()
    assert md.startswith("| n\\s | 2 | 3 | 4 | 5 | 6 | 7 |")
    assert "| 7 | -- | 4 | 7 | 13 | 25 | 49 |" in md
    # byte determinism on repeat
    again = genus_table(7, 7)
    assert again.to_csv() == csv and again.to_markdown() == md
