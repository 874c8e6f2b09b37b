"""Doubled varieties: one mirrored sheet per sign pattern over a corner region.

Adjoining a coordinate t_k with t_k**2 = h_k(x) for each inequality of a
corner region produces a variety that projects back onto the region with
2**l sheets over the interior.  The Jacobian of the defining equations
has a row of the form (-grad h_k, 2 t_k); where a constraint is active
both contributions can degenerate, so smoothness of the double is a
quantitative rank question answered here by sampled singular values.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from nashforge.poly import MultiPoly
from nashforge.region import (
    ConvexPolygon,
    CornerRegion,
    EdgePartition,
    class_polynomials,
)

ACTIVE_CLAMP = 1e-12
RESIDUAL_TOL = 1e-10
RANK_THRESHOLD = 1e-8


class OutsideRegionError(ValueError):
    pass


@dataclass(frozen=True)
class SheetPoint:
    """Point (x, t) on the double, tagged with the sign pattern of t."""

    x: tuple[float, ...]
    signs: tuple[int, ...]
    t: tuple[float, ...]

    def as_vector(self) -> tuple[float, ...]:
        return self.x + self.t


class DoubledVariety:
    """Equations t_k**2 - h_k(x) = 0 over a corner region."""

    __slots__ = ("base", "equations", "gradients", "polygon", "partition")

    def __init__(
        self,
        base: CornerRegion,
        polygon: Optional[ConvexPolygon] = None,
        partition: Optional[EdgePartition] = None,
    ):
        self.base = base
        d, ell = base.d, base.ell
        nv = d + ell
        eqs = []
        for k, h in enumerate(base.ineqs):
            t_sq = MultiPoly.variable(nv, d + k) ** 2
            h_lift = MultiPoly(
                nv,
                {e + (0,) * ell: c for e, c in h.terms.items()},
            )
            eqs.append(t_sq - h_lift)
        self.equations = tuple(eqs)
        self.gradients = tuple(h.gradient() for h in base.ineqs)
        self.polygon = polygon
        self.partition = partition

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def ell(self) -> int:
        return self.base.ell

    @property
    def ambient_dim(self) -> int:
        return self.base.d + self.base.ell


def build_double(region: CornerRegion) -> DoubledVariety:
    return DoubledVariety(region)


def polygon_double(
    polygon: ConvexPolygon, partition: EdgePartition, validate: bool = True
) -> DoubledVariety:
    """Double of a polygon with inequalities grouped by edge classes.

    validate=False builds the variety even for a partition that breaks
    the separation rule; such doubles are singular and exist so negative
    tests have something real to fail on.
    """
    polys = class_polynomials(polygon, partition, validate=validate)
    w = polygon.interior_witness()
    region = CornerRegion(2, tuple(polys), (w[0], w[1]))
    return DoubledVariety(region, polygon=polygon, partition=partition)


def lift(variety: DoubledVariety, x: Sequence[float], eps: Sequence[int]) -> SheetPoint:
    """Lift a base point to the sheet selected by the sign vector eps.

    Inequalities within ACTIVE_CLAMP of zero are treated as active: the
    fiber coordinate is pinned to 0 there no matter what eps says.
    """
    if len(x) != variety.d or len(eps) != variety.ell:
        raise ValueError("dimension mismatch")
    if any(e not in (-1, 0, 1) for e in eps):
        raise ValueError("eps entries must be -1, 0, or 1")
    xs = tuple(float(v) for v in x)
    signs = []
    ts = []
    for k, h in enumerate(variety.base.ineqs):
        hv = h.eval(xs)
        if hv < -ACTIVE_CLAMP:
            raise OutsideRegionError(f"inequality {k} is {hv} at {xs}")
        if hv <= ACTIVE_CLAMP:
            signs.append(0)
            ts.append(0.0)
        else:
            e = int(eps[k])
            if e == 0:
                raise ValueError(f"eps[{k}] = 0 but inequality {k} is not active")
            signs.append(e)
            ts.append(e * math.sqrt(hv))
    p = SheetPoint(xs, tuple(signs), tuple(ts))
    bad = max(residuals(variety, p))
    if bad > RESIDUAL_TOL:
        raise ArithmeticError(f"lift residual {bad} exceeds {RESIDUAL_TOL}")
    return p


def project(variety: DoubledVariety, p: SheetPoint) -> tuple[float, ...]:
    return p.x


def residuals(variety: DoubledVariety, p: SheetPoint) -> list[float]:
    """Per-equation defect |t_k**2 - h_k(x)|."""
    out = []
    for k, h in enumerate(variety.base.ineqs):
        out.append(abs(p.t[k] * p.t[k] - h.eval(p.x)))
    return out


def jacobian_at(variety: DoubledVariety, p: SheetPoint) -> np.ndarray:
    """Rows (-grad h_k(x), ..., 2 t_k, ...) of the defining equations."""
    d, ell = variety.d, variety.ell
    jac = np.zeros((ell, d + ell))
    for k in range(ell):
        for j in range(d):
            jac[k, j] = -variety.gradients[k][j].eval(p.x)
        jac[k, d + k] = 2.0 * p.t[k]
    return jac


def _canonical_jacobian_batch(variety: DoubledVariety, points) -> np.ndarray:
    """Stacked Jacobians with |2 t_k| in the fiber columns.

    Each fiber column holds a single entry, so taking its absolute value
    is a column sign flip: singular values are untouched and the matrix
    becomes bitwise identical across the 2**l mirror sheets.
    """
    d, ell = variety.d, variety.ell
    xs = np.array([p.x for p in points], dtype=float)
    ts = np.array([p.t for p in points], dtype=float)
    jac = np.zeros((len(points), ell, d + ell))
    for k in range(ell):
        for j in range(d):
            jac[:, k, j] = -variety.gradients[k][j].eval_batch(xs)
        jac[:, k, d + k] = np.abs(2.0 * ts[:, k])
    return jac


def min_rank_sigma(variety: DoubledVariety, p: SheetPoint) -> float:
    """Smallest singular value of the (sign-canonicalized) Jacobian."""
    jac = _canonical_jacobian_batch(variety, [p])
    return float(np.linalg.svd(jac[0], compute_uv=False)[-1])


def _worker_count() -> int:
    env = os.environ.get("NASHFORGE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError("NASHFORGE_THREADS must be an integer") from None
        return max(1, n)
    return os.cpu_count() or 1


def compatible_sheets(variety: DoubledVariety, x: Sequence[float]):
    """All distinct lifts of x: signs range over the inactive inequalities."""
    xs = tuple(float(v) for v in x)
    active = []
    for k, h in enumerate(variety.base.ineqs):
        hv = h.eval(xs)
        if hv < -ACTIVE_CLAMP:
            raise OutsideRegionError(f"inequality {k} is {hv} at {xs}")
        active.append(abs(hv) <= ACTIVE_CLAMP)
    free = [k for k in range(variety.ell) if not active[k]]
    for combo in product((-1, 1), repeat=len(free)):
        eps = [0] * variety.ell
        for k, e in zip(free, combo):
            eps[k] = e
        yield lift(variety, xs, eps)


def _polygon_base_points(variety: DoubledVariety, batch: int, rng) -> list[tuple[float, float]]:
    """Base points for one batch: alternating facet and interior draws."""
    poly = variety.polygon
    verts = [(float(v[0]), float(v[1])) for v in poly.vertices]
    out = []
    for i in range(64):
        edge = (64 * (batch - 1) + i) % poly.n
        va, vb = poly.edge_vertices(edge)
        t = 0.1 + 0.8 * rng.random()
        ax, ay = verts[va]
        bx, by = verts[vb]
        out.append((ax + t * (bx - ax), ay + t * (by - ay)))
    for _ in range(64):
        w = rng.random(poly.n) + 1e-3
        w = w / w.sum()
        px = sum(wi * v[0] for wi, v in zip(w, verts))
        py = sum(wi * v[1] for wi, v in zip(w, verts))
        out.append((px, py))
    return out


def _generic_base_points(variety: DoubledVariety, rng) -> list[tuple[float, ...]]:
    """Rejection sampling in a unit box around the witness."""
    w = [float(v) for v in variety.base.witness]
    out = []
    attempts = 0
    while len(out) < 128 and attempts < 200000:
        attempts += 1
        pt = tuple(wi + (2.0 * rng.random() - 1.0) for wi in w)
        if all(h.eval(pt) >= -ACTIVE_CLAMP for h in variety.base.ineqs):
            out.append(pt)
    if not out:
        raise ValueError("sampling produced no valid point; region looks degenerate")
    return out


@dataclass(frozen=True)
class SmoothReport:
    passed: bool
    min_sigma: float
    worst_point: SheetPoint
    samples: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "min_sigma": self.min_sigma,
            "worst_point": {
                "x": list(self.worst_point.x),
                "signs": list(self.worst_point.signs),
                "t": list(self.worst_point.t),
            },
            "samples": self.samples,
            "seed": self.seed,
        }


def verify_smooth(
    variety: DoubledVariety,
    samples: int = 10000,
    seed: int = 0,
    threshold: float = RANK_THRESHOLD,
) -> SmoothReport:
    """Sampled full-rank certificate for the defining equations.

    Batch 0 holds every polygon vertex (the corner stratum, where rank
    loss lives if anywhere); later batches mix facet and interior points
    from per-batch generators seeded by (seed, batch), so the report is
    bitwise independent of the worker count.  Every base point is lifted
    to all compatible sheets and each lift counts toward `samples`.
    """
    if samples < 1:
        raise ValueError("samples must be positive")

    def batch_points(b: int) -> list[SheetPoint]:
        pts: list[SheetPoint] = []
        if variety.polygon is not None:
            if b == 0:
                bases = [
                    (float(v[0]), float(v[1])) for v in variety.polygon.vertices
                ]
            else:
                rng = np.random.default_rng(np.random.SeedSequence((seed, b)))
                bases = _polygon_base_points(variety, b, rng)
        else:
            if b == 0:
                bases = []
            else:
                rng = np.random.default_rng(np.random.SeedSequence((seed, b)))
                bases = _generic_base_points(variety, rng)
        for base in bases:
            pts.extend(compatible_sheets(variety, base))
        return pts

    # fix the batch schedule up front so it cannot depend on worker count
    schedule = []
    total = 0
    b = 0
    while total < samples:
        if b == 0:
            count = len(batch_points(0))
        elif variety.polygon is not None:
            # facet points fold one class, interior points none
            count = 64 * 2 ** (variety.ell - 1) + 64 * 2**variety.ell
        else:
            count = 128 * 2**variety.ell
        schedule.append(b)
        total += count
        b += 1

    def run_batch(bi: int):
        pts = batch_points(bi)
        if not pts:
            return (0, math.inf, None)
        jac = _canonical_jacobian_batch(variety, pts)
        sig = np.linalg.svd(jac, compute_uv=False)[:, -1]
        arg = int(np.argmin(sig))
        return (len(pts), float(sig[arg]), pts[arg])

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        results = list(pool.map(run_batch, schedule))

    best_sigma = math.inf
    worst: Optional[SheetPoint] = None
    seen = 0
    for count, sigma, point in results:
        seen += count
        if point is not None and sigma < best_sigma:
            best_sigma = sigma
            worst = point
    if worst is None:
        raise ValueError("sampling produced no valid point; region looks degenerate")
    return SmoothReport(
        passed=bool(best_sigma > threshold),
        min_sigma=best_sigma,
        worst_point=worst,
        samples=seen,
        seed=seed,
    )


@dataclass(frozen=True)
class ChartSpec:
    """Rank-one-fold chart data around a boundary stratum.

    fold_classes lists the inequalities whose fiber coordinate folds in
    this chart (m of them); u is the full adapted coordinate system on
    the base, u_inv its inverse, and lambdas the positive factors with
    u_k = h_k * lambda_k for each folded k.
    """

    m: int
    fold_classes: tuple[int, ...]
    u: Callable[[Sequence[float]], tuple[float, ...]]
    u_inv: Callable[[Sequence[float]], tuple[float, ...]]
    lambdas: tuple[Callable[[Sequence[float]], float], ...]
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if len(self.fold_classes) != self.m or len(self.lambdas) != self.m:
            raise ValueError("fold_classes and lambdas must both have length m")


def chart_roundtrip(
    variety: DoubledVariety, spec: ChartSpec, samples: int = 1000, seed: int = 0
) -> float:
    """Max round-trip error of the chart and its inverse over sampled points.

    Points are drawn in the chart ball, lifted with random signs on the
    folded classes and positive signs elsewhere, pushed through the chart
    and pulled back.  Returns the worst max-norm discrepancy on (x, t).
    """
    d, ell = variety.d, variety.ell
    fold = set(spec.fold_classes)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    worst = 0.0
    found = 0
    attempts = 0
    while found < samples:
        attempts += 1
        if attempts > 1000 * samples:
            raise ValueError("chart ball rejection sampling starved")
        offset = rng.standard_normal(d)
        r = rng.random() ** (1.0 / d) * spec.radius
        norm = float(np.linalg.norm(offset))
        if norm == 0.0:
            continue
        x = tuple(c + r * o / norm for c, o in zip(spec.center, offset))
        vals = [h.eval(x) for h in variety.base.ineqs]
        if any(v < 0.0 for v in vals):
            continue
        if any(vals[k] <= ACTIVE_CLAMP for k in range(ell) if k not in fold):
            continue
        eps = [1] * ell
        for k in spec.fold_classes:
            eps[k] = 1 if rng.random() < 0.5 else -1
        p = lift(variety, x, eps)
        found += 1

        lam = [f(x) for f in spec.lambdas]
        if any(v <= 0.0 for v in lam):
            raise ValueError(f"lambda not strictly positive at {x}")
        u_full = spec.u(x)
        ys = [p.t[k] * math.sqrt(lam[i]) for i, k in enumerate(spec.fold_classes)]
        ys.extend(u_full[spec.m :])

        w = [ys[i] * ys[i] for i in range(spec.m)] + list(ys[spec.m :])
        x_back = spec.u_inv(w)
        lam_back = [f(x_back) for f in spec.lambdas]
        if any(v <= 0.0 for v in lam_back):
            raise ValueError(f"lambda not strictly positive at {x_back}")
        t_back = [0.0] * ell
        for i, k in enumerate(spec.fold_classes):
            t_back[k] = ys[i] / math.sqrt(lam_back[i])
        for k in range(ell):
            if k not in fold:
                hv = variety.base.ineqs[k].eval(x_back)
                t_back[k] = math.sqrt(max(hv, 0.0))
        err_x = max(abs(a - b) for a, b in zip(p.x, x_back))
        err_t = max(abs(a - b) for a, b in zip(p.t, t_back))
        worst = max(worst, err_x, err_t)
    return worst


def halfline_region() -> CornerRegion:
    h = MultiPoly.variable(1, 0)
    return CornerRegion(1, (h,), (Fraction(1, 2),))


def quadrant_region() -> CornerRegion:
    hx = MultiPoly.variable(2, 0)
    hy = MultiPoly.variable(2, 1)
    return CornerRegion(2, (hx, hy), (Fraction(1, 2), Fraction(1, 2)))


def parabola_chart() -> ChartSpec:
    """Chart for the double of the half line: the plane parabola t**2 = x."""
    return ChartSpec(
        m=1,
        fold_classes=(0,),
        u=lambda x: (x[0],),
        u_inv=lambda w: (w[0],),
        lambdas=(lambda x: 1.0,),
        center=(0.2,),
        radius=0.2,
    )


def quadrant_chart() -> ChartSpec:
    """Chart folding the first quadrant's x-wall; the y-wall stays off-stage."""
    return ChartSpec(
        m=1,
        fold_classes=(0,),
        u=lambda x: (x[0], x[1]),
        u_inv=lambda w: (w[0], w[1]),
        lambdas=(lambda x: 1.0,),
        center=(0.3, 0.7),
        radius=0.25,
    )


def facet_chart(variety: DoubledVariety, edge: int) -> ChartSpec:
    """Chart around the midpoint of one polygon facet.

    The adapted coordinates are the edge form and the tangential offset;
    the positive factor is the reciprocal of the other forms in the
    edge's class, the cancelled shape that stays finite on the facet.
    """
    if variety.polygon is None or variety.partition is None:
        raise ValueError("facet charts need a polygon-backed variety")
    poly = variety.polygon
    part = variety.partition
    if not 0 <= edge < poly.n:
        raise ValueError("edge index out of range")
    cls = part.class_of(edge)
    va, vb = poly.edge_vertices(edge)
    ax, ay = (float(poly.vertices[va][0]), float(poly.vertices[va][1]))
    bx, by = (float(poly.vertices[vb][0]), float(poly.vertices[vb][1]))
    mid = ((ax + bx) / 2.0, (ay + by) / 2.0)
    length = math.hypot(bx - ax, by - ay)
    tang = ((bx - ax) / length, (by - ay) / length)
    form = poly.edges[edge]
    fa, fb, fc = float(form.a), float(form.b), float(form.c)
    det = fa * tang[1] - fb * tang[0]
    if det == 0.0:
        raise ValueError("degenerate edge frame")
    others = [poly.edges[j] for j in part.classes[cls] if j != edge]
    other_classes = [
        [poly.edges[j] for j in part.classes[c]] for c in range(part.s) if c != cls
    ]
    margin = min(
        min(e.eval(mid) for e in grp) for grp in ([others] if others else []) + other_classes
    )
    radius = min(margin / 2.0, length / 4.0)

    def u(x):
        w1 = fa * x[0] + fb * x[1] + fc
        w2 = tang[0] * (x[0] - mid[0]) + tang[1] * (x[1] - mid[1])
        return (w1, w2)

    def u_inv(w):
        # solve fa*x + fb*y = w1 - fc - (affine shift), tang . (x - mid) = w2
        rhs1 = w[0] - fc
        rhs2 = w[1] + tang[0] * mid[0] + tang[1] * mid[1]
        x = (rhs1 * tang[1] - fb * rhs2) / det
        y = (fa * rhs2 - rhs1 * tang[0]) / det
        return (x, y)

    def lam(x):
        prod = 1.0
        for e in others:
            prod *= e.eval(x)
        return 1.0 / prod

    fold_classes = (cls,)
    return ChartSpec(
        m=1,
        fold_classes=fold_classes,
        u=u,
        u_inv=u_inv,
        lambdas=(lam,),
        center=mid,
        radius=radius,
    )
