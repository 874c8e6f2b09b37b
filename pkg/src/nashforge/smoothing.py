"""Smoothing kernels, collar maps, and fold maps.

The kernel f(s) = sigma(s)*s + (1 - sigma(s))*sqrt(s) with
sigma(s) = (1 - (s/a)**(2k))**(2k) interpolates between the identity at
s = 0 and sqrt(s) at s = a.  Both trade-offs are exact divisibility
facts: f - s is divisible by s**(2k) and f - sqrt(s) by (s - a)**(2k) in
the ring of g0 + g1*sqrt(s) elements, which is why the collar map glued
from the three pieces has 2k - 1 matching one-sided derivatives at each
seam.  Fold maps square the collar to model how a doubled sheet projects
back onto its base region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from nashforge.poly import MultiPoly, SqrtElem, UniPoly


@dataclass(frozen=True)
class SmoothingKernel:
    """Parameters a (collar width, rational in (0, 1]) and k (flatness order)."""

    a: Fraction
    k: int

    def __post_init__(self):
        a = Fraction(self.a)
        object.__setattr__(self, "a", a)
        if not 0 < a <= 1:
            raise ValueError("collar width a must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be a positive integer")

    def sigma_poly(self) -> UniPoly:
        """Exact expansion of (1 - (s/a)**(2k))**(2k)."""
        inner = UniPoly.one() - UniPoly.monomial(1 / self.a ** (2 * self.k), 2 * self.k)
        return inner ** (2 * self.k)

    def elem(self) -> SqrtElem:
        """The kernel as an exact g0 + g1*sqrt(s) element."""
        sigma = self.sigma_poly()
        return SqrtElem(sigma.shift(1), UniPoly.one() - sigma)


def kernel_formula(a: float, k: int, s: float) -> float:
    """Raw kernel formula, defined for any s >= 0 (no collar-domain guard)."""
    sigma = (1.0 - (s / a) ** (2 * k)) ** (2 * k)
    return sigma * s + (1.0 - sigma) * math.sqrt(s)


def kernel_eval(kernel: SmoothingKernel, s: float) -> float:
    """Kernel value on the collar domain [0, a]."""
    a = float(kernel.a)
    if not 0.0 <= s <= a:
        raise ValueError(f"s={s} outside the collar domain [0, {a}]")
    return kernel_formula(a, kernel.k, s)


def kernel_derivative(kernel: SmoothingKernel, s: float) -> float:
    """Closed-form derivative on [0, a], one-sided limits at the endpoints."""
    a = float(kernel.a)
    k = kernel.k
    if not 0.0 <= s <= a:
        raise ValueError(f"s={s} outside the collar domain [0, {a}]")
    if s == 0.0:
        return 1.0
    if s == a:
        return 1.0 / (2.0 * math.sqrt(a))
    w = (s / a) ** (2 * k)
    sigma = (1.0 - w) ** (2 * k)
    dsigma = -(4.0 * k * k / s) * (1.0 - w) ** (2 * k - 1) * w
    return sigma + dsigma * (s - math.sqrt(s)) + (1.0 - sigma) / (2.0 * math.sqrt(s))


def collar_eval(kernel: SmoothingKernel, s: float) -> float:
    """Identity below 0, kernel on [0, a], sqrt above a; a strictly
    increasing bijection of the real line."""
    a = float(kernel.a)
    if s < 0.0:
        return s
    if s <= a:
        return kernel_formula(a, kernel.k, s)
    return math.sqrt(s)


@dataclass(frozen=True)
class FoldMap1D:
    kernel: SmoothingKernel


def fold1d(fold: FoldMap1D, x: float) -> float:
    """Fold of the line onto the half line.

    Negative inputs land on their squares, the collar zone is smoothed
    through the kernel, and everything past the collar stays fixed.
    """
    a = float(fold.kernel.a)
    if x < 0.0:
        return x * x
    if x <= a:
        return kernel_formula(a, fold.kernel.k, x) ** 2
    return x


def fold_slope_radii(kernel: SmoothingKernel) -> list:
    """Measurement radii for the contact-order slope fit.

    The deviation scales like (r/a)^(2k), so for large k it sinks below
    double-precision noise unless the radii stay near a: keep
    (2^-j)^(2k) >= ~1e-11 and at least three points.
    """
    a = float(kernel.a)
    j_hi = min(5, max(3, 36 // (2 * kernel.k)))
    j_lo = 2 if kernel.k <= 3 else 1
    return [a * 2.0**-j for j in range(j_lo, j_hi + 1)]


def fold_local_model_check(
    fold: FoldMap1D, radii: Optional[Sequence[float]] = None
) -> dict:
    """Compare the fold against its quadratic local model at scale r.

    Returns per-radius deviations |fold(r)/r**2 - 1| and the fitted
    log-log slope; flat folds (large k) decay faster, and the slope is
    the observable certificate of the contact order.
    """
    a = float(fold.kernel.a)
    if radii is None:
        radii = fold_slope_radii(fold.kernel)
    radii = list(radii)
    if any(r <= 0 or r > a for r in radii):
        raise ValueError("radii must lie in (0, a]")
    devs = []
    for r in radii:
        devs.append(abs(fold1d(fold, r) / (r * r) - 1.0))
    if any(d == 0.0 for d in devs):
        raise ValueError("deviation vanished; radii too small for float precision")
    logs_r = [math.log(r) for r in radii]
    logs_d = [math.log(d) for d in devs]
    n = len(radii)
    mr = sum(logs_r) / n
    md = sum(logs_d) / n
    slope = sum((lr - mr) * (ld - md) for lr, ld in zip(logs_r, logs_d)) / sum(
        (lr - mr) ** 2 for lr in logs_r
    )
    return {"radii": radii, "deviation": devs, "slope": slope}


@dataclass(frozen=True)
class FoldMap2D:
    kernel: SmoothingKernel


def fold2d(fold: FoldMap2D, xy: Sequence[float]) -> tuple[float, float]:
    """Coordinate-wise fold of the plane onto the closed first quadrant."""
    f = FoldMap1D(fold.kernel)
    return (fold1d(f, xy[0]), fold1d(f, xy[1]))


def fold2d_coverage(
    fold: FoldMap2D, lo: float = -1.0, hi: float = 2.0, steps: int = 96
) -> dict:
    """Coverage of the folded grid image against the target quadrant box.

    The image of a product grid is a product set, and in the max norm the
    distance from (u, v) to a product set splits per axis, so covering
    [0, hi]^2 reduces to covering [0, hi] with the sorted 1d image.
    """
    if steps < 3:
        raise ValueError("need at least 3 grid steps")
    f1 = FoldMap1D(fold.kernel)
    step = (hi - lo) / steps
    xs = [lo + i * step for i in range(steps + 1)]
    img = sorted(fold1d(f1, x) for x in xs)
    t_lo, t_hi = 0.0, max(hi, 0.0)
    worst = max(img[0] - t_lo, t_hi - img[-1], 0.0)
    for u, v in zip(img, img[1:]):
        worst = max(worst, (v - u) / 2.0)
    outside = max(max(t_lo - v, v - t_hi, 0.0) for v in img)
    return {
        "grid_step": step,
        "hausdorff": max(worst, outside),
        "axis_image_min": img[0],
        "axis_image_max": img[-1],
    }


@dataclass(frozen=True)
class MostowskiMap:
    """Graph embedding x -> (x, 1/h(x)) that closes off the zero set of h."""

    h: MultiPoly

    @property
    def d(self) -> int:
        return self.h.nvars


def mostowski_embed(m: MostowskiMap, x: Sequence) -> tuple:
    """Embed a point of {h > 0}; exact on rational input."""
    if len(x) != m.d:
        raise ValueError("point has wrong dimension")
    exact = all(isinstance(v, (int, Fraction)) for v in x)
    if exact:
        hv = m.h.eval_exact(x)
        if hv == 0:
            raise ValueError("h vanishes; the point has no image")
        return tuple(Fraction(v) for v in x) + (1 / hv,)
    hv = m.h.eval([float(v) for v in x])
    if hv == 0.0:
        raise ValueError("h vanishes; the point has no image")
    return tuple(float(v) for v in x) + (1.0 / hv,)


def mostowski_project(y: Sequence) -> tuple:
    """Left inverse of the embedding: drop the reciprocal coordinate."""
    return tuple(y[:-1])


def mostowski_residual(m: MostowskiMap, y: Sequence) -> float:
    """How far a point sits from the graph {h(x) * t = 1}.

    Rational input is checked in exact arithmetic; floats near the zero set
    of h would otherwise drown the residual in cancellation noise.
    """
    if all(isinstance(v, (int, Fraction)) for v in y):
        return float(abs(m.h.eval_exact(y[:-1]) * Fraction(y[-1]) - 1))
    x = [float(v) for v in y[:-1]]
    return abs(m.h.eval(x) * float(y[-1]) - 1.0)
