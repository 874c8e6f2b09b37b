"""Exact polynomial arithmetic over the rationals.

Multivariate polynomials are sparse dicts mapping exponent tuples to
Fraction coefficients.  Univariate polynomials keep dense ascending
coefficient tuples and feed the ring of elements g0(s) + g1(s)*sqrt(s),
where exact long division turns smoothness claims about piecewise maps
into divisibility certificates with zero tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Exponent = tuple[int, ...]


class UniPoly:
    """Dense univariate polynomial with Fraction coefficients, ascending powers."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int | str] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def zero(cls) -> "UniPoly":
        return cls(())

    @classmethod
    def one(cls) -> "UniPoly":
        return cls((Fraction(1),))

    @classmethod
    def x(cls) -> "UniPoly":
        return cls((Fraction(0), Fraction(1)))

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls((Fraction(c),))

    @classmethod
    def monomial(cls, coeff, power: int) -> "UniPoly":
        if power < 0:
            raise ValueError("power must be non-negative")
        return cls((Fraction(0),) * power + (Fraction(coeff),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> int | None:
        """Lowest power with a nonzero coefficient, None for the zero polynomial."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def coeff(self, power: int) -> Fraction:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UniPoly(out)

    def __neg__(self) -> "UniPoly":
        return UniPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if self.is_zero() or other.is_zero():
            return UniPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b != 0:
                    out[i + j] += a * b
        return UniPoly(out)

    def scale(self, c) -> "UniPoly":
        c = Fraction(c)
        return UniPoly(tuple(a * c for a in self.coeffs))

    def shift(self, k: int) -> "UniPoly":
        """Multiply by s**k."""
        if self.is_zero():
            return self
        return UniPoly((Fraction(0),) * k + self.coeffs)

    def __pow__(self, n: int) -> "UniPoly":
        if n < 0:
            raise ValueError("negative power")
        result = UniPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod_exact(self, divisor: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        """Quotient and remainder in Q[s]."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dc = divisor.coeffs
        dd = len(dc) - 1
        lead = dc[-1]
        if len(rem) <= dd:
            return UniPoly.zero(), UniPoly(rem)
        quot = [Fraction(0)] * (len(rem) - dd)
        for i in range(len(rem) - 1, dd - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            q = c / lead
            quot[i - dd] = q
            for j in range(dd + 1):
                rem[i - dd + j] -= q * dc[j]
        return UniPoly(quot), UniPoly(rem)

    def divides(self, other: "UniPoly") -> bool:
        """True when self divides other exactly in Q[s]."""
        if other.is_zero():
            return True
        _, r = other.divmod_exact(self)
        return r.is_zero()

    def eval_exact(self, s) -> Fraction:
        s = Fraction(s)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def eval_float(self, s: float) -> float:
        # monomial-by-monomial in ascending order, a fixed summation order
        acc = 0.0
        for i, c in enumerate(self.coeffs):
            if c != 0:
                acc += float(c) * s**i
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if self.is_zero():
            return "UniPoly(0)"
        parts = [f"{c}*s^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "UniPoly(" + " + ".join(parts) + ")"


class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> Fraction coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict[Exponent, Fraction] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has wrong arity for nvars={nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = Fraction(c)
            if c != 0:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if clean[exp] == 0:
                    del clean[exp]
        self.terms = clean

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "MultiPoly":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {exp: Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def _check(self, other: "MultiPoly"):
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + c
        return MultiPoly(self.nvars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.nvars, out)

    def scale(self, c) -> "MultiPoly":
        c = Fraction(c)
        return MultiPoly(self.nvars, {e: a * c for e, a in self.terms.items()})

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def partial(self, i: int) -> "MultiPoly":
        """Partial derivative with respect to variable i."""
        if not 0 <= i < self.nvars:
            raise ValueError(f"variable index {i} out of range")
        out: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            e = list(exp)
            e[i] -= 1
            out[tuple(e)] = out.get(tuple(e), Fraction(0)) + c * exp[i]
        return MultiPoly(self.nvars, out)

    def gradient(self) -> tuple["MultiPoly", ...]:
        return tuple(self.partial(i) for i in range(self.nvars))

    def eval(self, point: Sequence[float]) -> float:
        """Monomial-by-monomial float evaluation in sorted term order.

        The fixed order makes the result independent of dict history and of
        how many worker threads call in parallel.
        """
        if len(point) != self.nvars:
            raise ValueError("point has wrong dimension")
        acc = 0.0
        for exp in sorted(self.terms):
            term = float(self.terms[exp])
            for xi, ei in zip(point, exp):
                if ei:
                    term *= xi**ei
            acc += term
        return acc

    def eval_exact(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point has wrong dimension")
        pt = [Fraction(v) for v in point]
        acc = Fraction(0)
        for exp in sorted(self.terms):
            term = self.terms[exp]
            for xi, ei in zip(pt, exp):
                if ei:
                    term *= xi**ei
            acc += term
        return acc

    def eval_batch(self, points) -> "np.ndarray":
        """Vectorized float evaluation at an (m, nvars) array of points."""
        import numpy as np

        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ValueError("points must be an (m, nvars) array")
        if not self.terms:
            return np.zeros(pts.shape[0])
        exps = sorted(self.terms)
        coeffs = np.array([float(self.terms[e]) for e in exps])
        emat = np.array(exps, dtype=float)
        # (m, 1, nvars) ** (1, T, nvars) -> product over vars -> (m, T)
        mono = np.prod(pts[:, None, :] ** emat[None, :, :], axis=2)
        return mono @ coeffs

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "MultiPoly(0)"
        parts = []
        for exp in sorted(self.terms):
            mono = "*".join(f"x{i}^{e}" for i, e in enumerate(exp) if e)
            parts.append(f"{self.terms[exp]}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"


class SqrtElem:
    """Element g0(s) + g1(s)*sqrt(s) with exact UniPoly parts."""

    __slots__ = ("g0", "g1")

    def __init__(self, g0: UniPoly, g1: UniPoly):
        self.g0 = g0
        self.g1 = g1

    @classmethod
    def from_poly(cls, p: UniPoly) -> "SqrtElem":
        return cls(p, UniPoly.zero())

    @classmethod
    def sqrt_s(cls) -> "SqrtElem":
        return cls(UniPoly.zero(), UniPoly.one())

    def __add__(self, other: "SqrtElem") -> "SqrtElem":
        return SqrtElem(self.g0 + other.g0, self.g1 + other.g1)

    def __neg__(self) -> "SqrtElem":
        return SqrtElem(-self.g0, -self.g1)

    def __sub__(self, other: "SqrtElem") -> "SqrtElem":
        return SqrtElem(self.g0 - other.g0, self.g1 - other.g1)

    def __mul__(self, other: "SqrtElem") -> "SqrtElem":
        return sqrt_mul(self, other)

    def eval_float(self, s: float) -> float:
        if s < 0:
            raise ValueError("sqrt part needs s >= 0")
        return self.g0.eval_float(s) + self.g1.eval_float(s) * math.sqrt(s)

    def eval_exact_at_square(self, r) -> Fraction:
        """Exact value at s = r**2 for rational r >= 0, where sqrt(s) = r."""
        r = Fraction(r)
        if r < 0:
            raise ValueError("r must be non-negative")
        s = r * r
        return self.g0.eval_exact(s) + self.g1.eval_exact(s) * r

    def is_zero(self) -> bool:
        return self.g0.is_zero() and self.g1.is_zero()

    def __eq__(self, other) -> bool:
        return isinstance(other, SqrtElem) and self.g0 == other.g0 and self.g1 == other.g1

    def __hash__(self):
        return hash((self.g0, self.g1))

    def __repr__(self) -> str:
        return f"SqrtElem({self.g0!r} + ({self.g1!r})*sqrt(s))"


def sqrt_mul(u: SqrtElem, v: SqrtElem) -> SqrtElem:
    """Product in Q[s] + Q[s]*sqrt(s), using sqrt(s)*sqrt(s) = s."""
    g0 = u.g0 * v.g0 + (u.g1 * v.g1).shift(1)
    g1 = u.g0 * v.g1 + u.g1 * v.g0
    return SqrtElem(g0, g1)


def divisibility_check(u: SqrtElem, divisor: UniPoly) -> bool:
    """True iff divisor divides both parts of u exactly in Q[s]."""
    if divisor.is_zero():
        raise ValueError("divisor must be nonzero")
    return divisor.divides(u.g0) and divisor.divides(u.g1)
