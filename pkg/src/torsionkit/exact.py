"""Exact scalars and the valuation-theoretic core.

Everything here lives over the rationals: univariate polynomials in the
deformation parameter t, exactly factored logarithms, characteristic
polynomials, t-adic Smith exponents via determinantal divisors, and Newton
polygons of eigenvalue perturbations.  No floats anywhere.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence, Union

from .errors import (
    InternalConsistencyError,
    NonAnalyticCurveError,
    OddVanishingOrderError,
    ShapeError,
)
from .matrices import Mat, mat_mul, trace

Scalar = Union[int, Fraction]


def parse_rational(s: str) -> Fraction:
    """Parse "p/q" or "p" (decimal strings are rejected: exact inputs only)."""
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {s!r}") from exc


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Poly:
    """Univariate polynomial over Q in the deformation parameter t.

    Coefficients are stored lowest degree first with no trailing zeros; the
    zero polynomial is the empty tuple.  Immutable, interoperates with ints
    and Fractions as constants.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Scalar] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls([c])

    @classmethod
    def monomial(cls, c: Scalar, k: int) -> "Poly":
        return cls([0] * k + [c])

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if self.is_zero:
            raise ValueError("degree of the zero polynomial")
        return len(self.coeffs) - 1

    @property
    def valuation(self) -> int:
        """t-adic valuation: index of the lowest nonzero coefficient."""
        if self.is_zero:
            raise ValueError("valuation of the zero polynomial")
        return next(i for i, c in enumerate(self.coeffs) if c)

    @property
    def lowest_coeff(self) -> Fraction:
        return self.coeffs[self.valuation]

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def shifted(self, k: int) -> "Poly":
        if self.is_zero:
            return self
        return Poly((0,) * k + self.coeffs)

    def __bool__(self):
        return not self.is_zero

    def __eq__(self, other):
        other = as_poly(other)
        return other is not None and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = as_poly(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self.coefficient(i) + other.coefficient(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = as_poly(other)
        if other is None:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return Poly([c / f for c in self.coeffs])
        return NotImplemented

    def __call__(self, value: Scalar) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def __repr__(self):
        if self.is_zero:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(format_rational(c))
            else:
                tt = "t" if i == 1 else f"t^{i}"
                terms.append(tt if c == 1 else f"{format_rational(c)}*{tt}")
        return "Poly(" + " + ".join(terms) + ")"


def as_poly(x) -> Poly | None:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly([x])
    return None


class LogValue:
    """A real number held exactly as a finite sum of exponent*log(base).

    Bases are positive rationals; every exponent used in this package is a
    half-integer, so two values are compared through the exact rational
    prod(base ** (2*exponent)).
    """

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[tuple[Fraction, Fraction]] = ()):
        kept = []
        for base, exp in factors:
            base = Fraction(base)
            exp = Fraction(exp)
            if base <= 0:
                raise ValueError(f"LogValue base must be positive, got {base}")
            if exp == 0 or base == 1:
                continue
            kept.append((base, exp))
        object.__setattr__(self, "factors", tuple(kept))

    def __setattr__(self, name, value):
        raise AttributeError("LogValue is immutable")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls()

    @classmethod
    def of(cls, base: Scalar, exp: Scalar) -> "LogValue":
        return cls([(Fraction(base), Fraction(exp))])

    def squared_value(self) -> Fraction:
        """The exact rational prod(base ** (2*exponent)) = exp(2 * self)."""
        acc = Fraction(1)
        for base, exp in self.factors:
            two_exp = 2 * exp
            if two_exp.denominator != 1:
                raise ValueError("LogValue exponents must be half-integers")
            acc *= base ** int(two_exp)
        return acc

    def __add__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return LogValue(self.factors + other.factors)

    def __neg__(self):
        return LogValue([(b, -e) for b, e in self.factors])

    def __sub__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return self + (-other)

    def scaled(self, r: Scalar) -> "LogValue":
        r = Fraction(r)
        return LogValue([(b, e * r) for b, e in self.factors])

    def __eq__(self, other):
        return isinstance(other, LogValue) and self.squared_value() == other.squared_value()

    def __hash__(self):
        return hash(self.squared_value())

    def to_float(self) -> float:
        return sum(float(e) * math.log(b) for b, e in self.factors)

    def __repr__(self):
        if not self.factors:
            return "LogValue(0)"
        body = " + ".join(f"{format_rational(e)}*log({format_rational(b)})"
                          for b, e in self.factors)
        return f"LogValue({body})"


# ---------------------------------------------------------------------------
# Characteristic polynomials and pseudo-determinants
# ---------------------------------------------------------------------------

def char_poly(m: Mat) -> list:
    """Coefficients of det(xI - m), lowest x-degree first (monic).

    Works for rational and polynomial entries alike; only divisions by
    integers occur (Faddeev-LeVerrier recursion), so the result is exact.
    """
    if not m.is_square:
        raise ShapeError("characteristic polynomial of a non-square matrix")
    n = m.rows
    polyish = any(isinstance(e, Poly) for row in m.data for e in row)
    one = Poly.const(1) if polyish else Fraction(1)
    if polyish:
        m = m.map(lambda e: e if isinstance(e, Poly) else Poly.const(e))
    if n == 0:
        return [one]
    ident = Mat.identity(n).map(lambda e: e * one)
    coeffs_desc = [one]  # c_n, c_{n-1}, ..., c_0
    work = ident
    for k in range(1, n + 1):
        am = mat_mul(m, work)
        ck = -(trace(am) / k)
        coeffs_desc.append(ck)
        if k < n:
            work = Mat(n, n, [[am.data[i][j] + (ck if i == j else 0 * one)
                               for j in range(n)] for i in range(n)])
    return list(reversed(coeffs_desc))


def pseudo_det_poly(coeffs: Sequence) -> tuple[int, object]:
    """Split a monic char poly as x^k * (sum a_j x^j) with a_0 nonzero.

    Returns (k, a_0) normalized so a_0 is the product of the nonzero
    eigenvalue curves: a_0 = (-1)^(deg-k) * coeffs[k].  A pure power x^n
    comes back as (n, 1): the empty product.
    """
    coeffs = list(coeffs)
    deg = len(coeffs) - 1
    top = coeffs[-1]
    if not (top == 1 or (isinstance(top, Poly) and top == Poly.const(1))):
        raise ValueError("pseudo_det_poly expects a monic polynomial")
    k = next(i for i, c in enumerate(coeffs) if c)
    a0 = coeffs[k] if (deg - k) % 2 == 0 else -coeffs[k]
    return k, a0


# ---------------------------------------------------------------------------
# t-adic Smith exponents via determinantal divisors
# ---------------------------------------------------------------------------

def snf_tadic(m: Mat) -> list[int]:
    """Sorted t-exponents of the invariant factors of a polynomial matrix
    over the local ring at t = 0.

    Uses determinantal divisors: the sum of the first j exponents is the
    minimal t-valuation over all j x j minors.  The list length is the
    generic rank.
    """
    entries = {}
    for i in range(m.rows):
        for j in range(m.cols):
            p = as_poly(m.data[i][j])
            if p is None:
                raise TypeError("snf_tadic expects rational or polynomial entries")
            entries[(i, j)] = p

    memo: dict[tuple, Poly] = {}

    def minor_det(rows: tuple[int, ...], cols: tuple[int, ...]) -> Poly:
        if not rows:
            return Poly.const(1)
        key = (rows, cols)
        got = memo.get(key)
        if got is not None:
            return got
        acc = Poly()
        r0 = rows[0]
        rest = rows[1:]
        for pos, c in enumerate(cols):
            e = entries[(r0, c)]
            if e.is_zero:
                continue
            sub = minor_det(rest, cols[:pos] + cols[pos + 1:])
            term = e * sub
            acc = acc + term if pos % 2 == 0 else acc - term
        memo[key] = acc
        return acc

    exponents: list[int] = []
    prev_div = 0
    for j in range(1, min(m.rows, m.cols) + 1):
        best: int | None = None
        for rows in itertools.combinations(range(m.rows), j):
            for cols in itertools.combinations(range(m.cols), j):
                d = minor_det(rows, cols)
                if d.is_zero:
                    continue
                v = d.valuation
                if best is None or v < best:
                    best = v
                    if best == prev_div:
                        break
            if best == prev_div:
                break
        if best is None:
            break
        exponents.append(best - prev_div)
        prev_div = best
    if any(a > b for a, b in zip(exponents, exponents[1:])):
        raise InternalConsistencyError("determinantal divisors not convex")
    return exponents


# ---------------------------------------------------------------------------
# Newton polygons of eigenvalue perturbations
# ---------------------------------------------------------------------------

def newton_polygon(coeffs: Sequence) -> list[tuple[int, int, Fraction]]:
    """Classify the roots of a monic polynomial sum a_j(t) x^j by t-valuation.

    Returns lower-hull edges as (valuation, count, product): ``count`` roots
    behave like t^valuation * (unit), and ``product`` is the product of the
    units' values at t = 0.  Intended for characteristic polynomials of
    positive semidefinite families, whose root valuations are even integers;
    fractional or odd slopes raise, as does a nonpositive edge product.
    """
    polys = []
    for c in coeffs:
        p = as_poly(c)
        if p is None:
            raise TypeError("newton_polygon expects rational or polynomial coefficients")
        polys.append(p)
    if not polys or polys[0].is_zero:
        raise ValueError("newton_polygon needs a nonzero constant-in-x coefficient")
    if polys[-1] != Poly.const(1):
        raise ValueError("newton_polygon expects a monic polynomial")
    points = [(j, p.valuation) for j, p in enumerate(polys) if not p.is_zero]
    if len(points) == 1:
        return []

    # lower convex hull, left to right
    hull: list[tuple[int, int]] = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) <= (pt[0] - x1) * (y2 - y1):
                hull.pop()
            else:
                break
        hull.append(pt)

    edges = []
    for (j1, v1), (j2, v2) in zip(hull, hull[1:]):
        width = j2 - j1
        drop = v1 - v2
        if drop < 0:
            raise InternalConsistencyError("root of negative valuation in a PSD family")
        if drop % width != 0:
            raise NonAnalyticCurveError(
                f"non-analytic eigenvalue curve: slope {drop}/{width} between "
                f"x-degrees {j1} and {j2}")
        val = drop // width
        if val % 2 != 0:
            raise OddVanishingOrderError(
                f"odd vanishing order {val} between x-degrees {j1} and {j2}")
        low1 = polys[j1].lowest_coeff
        low2 = polys[j2].lowest_coeff
        product = low1 / low2
        if width % 2 == 1:
            product = -product
        if product <= 0:
            raise InternalConsistencyError(
                "nonpositive leading eigenvalue product on a Newton polygon edge")
        edges.append((val, width, product))
    return edges
