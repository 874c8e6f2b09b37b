"""Doubled-variety lifts, Jacobian rank certificates, and chart round-trips."""

import json
import math
import os
from fractions import Fraction

import numpy as np
import pytest

from nashforge.doubling import (
    ChartSpec,
    OutsideRegionError,
    SheetPoint,
    build_double,
    chart_roundtrip,
    compatible_sheets,
    facet_chart,
    halfline_region,
    jacobian_at,
    lift,
    min_rank_sigma,
    parabola_chart,
    polygon_double,
    project,
    quadrant_chart,
    quadrant_region,
    residuals,
    verify_smooth,
)
from nashforge.poly import MultiPoly
from nashforge.region import EdgePartition, regular_polygon

from oracles import jacobi_singular_values


def _hexagon_double():
    poly = regular_polygon(6)
    part = EdgePartition([[0, 3], [1, 4], [2, 5]])
    return polygon_double(poly, part)


def test_build_double_equations():
    v = build_double(halfline_region())
    assert v.ambient_dim == 2 and v.ell == 1
    # t**2 - x vanishes on lifted points and nowhere nearby
    eq = v.equations[0]
    assert eq.eval((0.25, 0.5)) == 0.0
    assert eq.eval((0.25, 0.6)) != 0.0
    q = build_double(quadrant_region())
    assert len(q.equations) == 2 and q.ambient_dim == 4


def test_lift_project_roundtrip_interior():
    v = _hexagon_double()
    x = (0.1, -0.2)
    for eps in ((1, 1, 1), (-1, 1, -1), (-1, -1, -1)):
        p = lift(v, x, eps)
        assert project(v, p) == x
        assert p.signs == eps
        assert max(residuals(v, p)) <= 1e-10
        for k in range(3):
            assert math.copysign(1.0, p.t[k]) == eps[k]


def test_sheet_counts_by_stratum():
    v = _hexagon_double()
    interior = list(compatible_sheets(v, (0.05, 0.1)))
    assert len(interior) == 8
    assert len({p.t for p in interior}) == 8
    poly = v.polygon
    va, vb = poly.edge_vertices(0)
    mid = (
        (float(poly.vertices[va][0]) + float(poly.vertices[vb][0])) / 2.0,
        (float(poly.vertices[va][1]) + float(poly.vertices[vb][1])) / 2.0,
    )
    facet = list(compatible_sheets(v, mid))
    assert len(facet) == 4
    assert all(p.signs[v.partition.class_of(0)] == 0 for p in facet)
    corner = list(compatible_sheets(v, tuple(map(float, poly.vertices[0]))))
    assert len(corner) == 2
    for p in corner:
        assert p.signs.count(0) == 2


def test_lift_errors():
    v = _hexagon_double()
    with pytest.raises(OutsideRegionError):
        lift(v, (5.0, 5.0), (1, 1, 1))
    with pytest.raises(ValueError):
        lift(v, (0.0, 0.0), (1, 1))
    with pytest.raises(ValueError):
        lift(v, (0.0, 0.0), (1, 0, 1))  # inactive class cannot take sign 0
    with pytest.raises(ValueError):
        lift(v, (0.0, 0.0), (2, 1, 1))


def test_jacobian_structure_quadrant():
    v = build_double(quadrant_region())
    p = lift(v, (0.25, 0.5), (1, 1))
    jac = jacobian_at(v, p)
    assert jac.shape == (2, 4)
    assert jac[0, 0] == -1.0 and jac[0, 1] == 0.0
    assert jac[1, 0] == 0.0 and jac[1, 1] == -1.0
    assert jac[0, 2] == 2.0 * 0.5 and jac[0, 3] == 0.0
    assert jac[1, 2] == 0.0 and jac[1, 3] == 2.0 * math.sqrt(0.5)
    # sign flip shows up in the raw jacobian
    q = lift(v, (0.25, 0.5), (-1, 1))
    assert jacobian_at(v, q)[0, 2] == -1.0


def test_min_sigma_matches_jacobi_oracle():
    v = _hexagon_double()
    poly = v.polygon
    pts = [(0.0, 0.0), (0.3, 0.1), (-0.2, -0.35)]
    pts.append(tuple(map(float, poly.vertices[2])))
    va, vb = poly.edge_vertices(4)
    pts.append(
        (
            0.7 * float(poly.vertices[va][0]) + 0.3 * float(poly.vertices[vb][0]),
            0.7 * float(poly.vertices[va][1]) + 0.3 * float(poly.vertices[vb][1]),
        )
    )
    for x in pts:
        for p in compatible_sheets(v, x):
            jac = jacobian_at(v, p)
            jac[:, v.d :] = np.abs(jac[:, v.d :])
            expect = jacobi_singular_values(jac)[-1]
            assert min_rank_sigma(v, p) == pytest.approx(expect, rel=1e-9, abs=1e-12)


def test_min_sigma_bitwise_invariant_under_sign_flips():
    v = _hexagon_double()
    for x in ((0.2, 0.3), (-0.4, 0.05)):
        sheets = list(compatible_sheets(v, x))
        sigmas = {min_rank_sigma(v, p) for p in sheets}
        assert len(sigmas) == 1  # exact float equality across all eight sheets


def test_verify_smooth_passes_square_opposite():
    poly = regular_polygon(4)
    v = polygon_double(poly, EdgePartition([[0, 2], [1, 3]]))
    report = verify_smooth(v, samples=2000, seed=0)
    assert report.passed
    assert report.min_sigma > 1e-8
    assert report.samples >= 2000
    assert report.seed == 0


def test_verify_smooth_flags_adversarial_square():
    poly = regular_polygon(4)
    v = polygon_double(poly, EdgePartition([[0, 1], [2, 3]]), validate=False)
    report = verify_smooth(v, samples=500, seed=0)
    assert not report.passed
    assert report.min_sigma <= 1e-8
    # rank loss is pinned at a corner whose two edges share a class: there the
    # class polynomial has a double zero, so its whole jacobian row vanishes
    part = EdgePartition([[0, 1], [2, 3]])
    bad_corners = [
        tuple(map(float, poly.vertices[j]))
        for j in range(4)
        if part.class_of(poly.vertex_edges(j)[0]) == part.class_of(poly.vertex_edges(j)[1])
    ]
    assert len(bad_corners) == 2
    assert report.worst_point.signs.count(0) == 1
    dists = [
        max(abs(a - b) for a, b in zip(report.worst_point.x, c)) for c in bad_corners
    ]
    assert min(dists) < 1e-9


def test_verify_smooth_thread_count_invariance():
    poly = regular_polygon(6)
    v = polygon_double(poly, EdgePartition([[0, 3], [1, 4], [2, 5]]))
    blobs = []
    for threads in ("1", "3"):
        os.environ["NASHFORGE_THREADS"] = threads
        try:
            rep = verify_smooth(v, samples=1500, seed=42)
        finally:
            del os.environ["NASHFORGE_THREADS"]
        blobs.append(json.dumps(rep.to_json_dict(), sort_keys=True))
    assert blobs[0] == blobs[1]


def test_verify_smooth_generic_region():
    v = build_double(quadrant_region())
    report = verify_smooth(v, samples=600, seed=1)
    assert report.passed
    assert report.samples >= 600


def test_verify_smooth_report_shape():
    v = build_double(halfline_region())
    rep = verify_smooth(v, samples=100, seed=7)
    doc = rep.to_json_dict()
    assert set(doc) == {"pass", "min_sigma", "worst_point", "samples", "seed"}
    assert set(doc["worst_point"]) == {"x", "signs", "t"}


def test_chart_roundtrip_parabola():
    v = build_double(halfline_region())
    err = chart_roundtrip(v, parabola_chart(), samples=400, seed=0)
    assert err <= 1e-9


def test_chart_roundtrip_quadrant():
    v = build_double(quadrant_region())
    err = chart_roundtrip(v, quadrant_chart(), samples=400, seed=0)
    assert err <= 1e-9


def test_chart_roundtrip_hexagon_facets():
    v = _hexagon_double()
    for edge in range(6):
        spec = facet_chart(v, edge)
        err = chart_roundtrip(v, spec, samples=150, seed=edge)
        assert err <= 1e-9, (edge, err)


def test_chart_lambda_guard():
    v = build_double(halfline_region())
    bad = ChartSpec(
        m=1,
        fold_classes=(0,),
        u=lambda x: (x[0],),
        u_inv=lambda w: (w[0],),
        lambdas=(lambda x: -1.0,),
        center=(0.2,),
        radius=0.1,
    )
    with pytest.raises(ValueError):
        chart_roundtrip(v, bad, samples=10, seed=0)
    with pytest.raises(ValueError):
        ChartSpec(
            m=2,
            fold_classes=(0,),
            u=lambda x: x,
            u_inv=lambda w: w,
            lambdas=(lambda x: 1.0,),
            center=(0.2,),
            radius=0.1,
        )


def test_positive_sheet_bijection_proxy():
    v = _hexagon_double()
    rng = np.random.default_rng(3)
    seen = set()
    for _ in range(200):
        w = rng.random(6) + 1e-3
        w = w / w.sum()
        x = (
            float(sum(wi * float(vtx[0]) for wi, vtx in zip(w, v.polygon.vertices))),
            float(sum(wi * float(vtx[1]) for wi, vtx in zip(w, v.polygon.vertices))),
        )
        p = lift(v, x, (1, 1, 1))
        assert project(v, p) == x
        assert all(t > 0.0 for t in p.t)
        assert p.as_vector() not in seen
        seen.add(p.as_vector())


def test_preimage_of_ball_stays_bounded():
    # projection is proper: fibers over a bounded patch have bounded t
    v = _hexagon_double()
    rng = np.random.default_rng(5)
    hmax = [0.0, 0.0, 0.0]
    tmax = [0.0, 0.0, 0.0]
    for _ in range(500):
        x = (float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3)))
        if any(h.eval(x) < 0 for h in v.base.ineqs):
            continue
        for k, h in enumerate(v.base.ineqs):
            hmax[k] = max(hmax[k], h.eval(x))
        for p in compatible_sheets(v, x):
            for k in range(3):
                tmax[k] = max(tmax[k], abs(p.t[k]))
    for k in range(3):
        assert tmax[k] <= math.sqrt(hmax[k]) + 1e-9


def test_boundary_fiber_matches_zero_set():
    # t_k = 0 exactly where the class polynomial vanishes
    v = _hexagon_double()
    poly = v.polygon
    for edge in range(6):
        va, vb = poly.edge_vertices(edge)
        for t in (0.25, 0.5, 0.8):
            x = (
                (1 - t) * float(poly.vertices[va][0]) + t * float(poly.vertices[vb][0]),
                (1 - t) * float(poly.vertices[va][1]) + t * float(poly.vertices[vb][1]),
            )
            cls = v.partition.class_of(edge)
            for p in compatible_sheets(v, x):
                assert (p.t[cls] == 0.0) == (p.signs[cls] == 0)
                assert p.t[cls] == 0.0
                for k in range(3):
                    if k != cls:
                        assert abs(p.t[k]) > 1e-3


def test_worker_count_env_guard():
    from nashforge.doubling import _worker_count

    os.environ["NASHFORGE_THREADS"] = "nope"
    try:
        with pytest.raises(ValueError):
            _worker_count()
    finally:
        del os.environ["NASHFORGE_THREADS"]
    os.environ["NASHFORGE_THREADS"] = "2"
    try:
        assert _worker_count() == 2
    finally:
        del os.environ["NASHFORGE_THREADS"]
