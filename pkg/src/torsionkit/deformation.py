"""One-parameter polynomial deformations of complexes.

A deformation carries boundary matrices with polynomial entries in t and
constant Gram matrices.  From the Laplacian characteristic polynomials we
extract, per degree, the vanishing orders of the eigenvalue curves
(lambda ~ t^{2k} * unit) and the exact products of the units at t = 0.
These numbers drive everything else: spectral-sequence page dimensions,
page torsions, the spectral-sequence torsion, and the asymptotic expansion
of log rho(t) as t -> 0, which is computed by two independent algorithms
and must agree exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import complexes
from .complexes import GradedComplex, TorsionValue
from .errors import InternalConsistencyError, ShapeError
from .exact import LogValue, Poly, as_poly, char_poly, newton_polygon, pseudo_det_poly, snf_tadic
from .matrices import Mat, inverse, mat_add, mat_mul


@dataclass(frozen=True)
class DeformedComplex:
    """dims and grams as in GradedComplex; boundaries have Poly entries."""

    dims: tuple[int, ...]
    boundaries: tuple[Mat, ...]
    grams: tuple[Mat, ...]

    def __init__(self, dims: Sequence[int], boundaries: Sequence[Mat],
                 grams: Sequence[Mat] | None = None):
        shape_check = GradedComplex(
            dims, [Mat.zeros(b.rows, b.cols) for b in boundaries], grams)
        coerced = tuple(b.map(lambda e: _to_poly(e)) for b in boundaries)
        object.__setattr__(self, "dims", shape_check.dims)
        object.__setattr__(self, "boundaries", coerced)
        object.__setattr__(self, "grams", shape_check.grams)

    @property
    def top_degree(self) -> int:
        return len(self.dims) - 1

    def boundary(self, i: int) -> Mat:
        if 0 <= i < len(self.boundaries):
            return self.boundaries[i]
        if i == -1:
            return Mat.zeros(self.dims[0], 0)
        if i == self.top_degree:
            return Mat.zeros(0, self.dims[-1])
        raise ShapeError(f"no boundary map at degree {i}")

    def at(self, t0: Fraction) -> GradedComplex:
        """The complex with t specialized to the rational t0."""
        bnds = [b.map(lambda p: p(t0)) for b in self.boundaries]
        return GradedComplex(self.dims, bnds, self.grams)

    def fiber(self) -> GradedComplex:
        return self.at(Fraction(0))


def _to_poly(e) -> Poly:
    p = as_poly(e)
    if p is None:
        raise TypeError(f"boundary entries must be polynomials, got {type(e).__name__}")
    return p


@dataclass(frozen=True)
class OrderClass:
    order: int       # lambda(t) = t^(2*order) * unit(t)
    count: int
    product: Fraction  # product of unit(0) over the class, positive

    def __post_init__(self):
        if self.product <= 0:
            raise InternalConsistencyError("class product must be positive")


@dataclass(frozen=True)
class DegreeSpectrum:
    zero_dim: int                       # identically-zero eigenvalue curves
    classes: tuple[OrderClass, ...]     # strictly increasing orders


@dataclass(frozen=True)
class OrderSpectrum:
    per_degree: tuple[DegreeSpectrum, ...]

    def max_order(self) -> int:
        orders = [cl.order for ds in self.per_degree for cl in ds.classes]
        return max(orders, default=0)

    def curves_below(self, i: int, r: int) -> int:
        return sum(cl.count for cl in self.per_degree[i].classes if cl.order < r)

    def class_product(self, i: int, r: int) -> Fraction:
        for cl in self.per_degree[i].classes:
            if cl.order == r:
                return cl.product
        return Fraction(1)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """log rho(t) = constant + slope * log(t) + o(1), plus an optional
    log(t/pi) coefficient used by the Morse pipeline."""

    constant: LogValue
    slope: Fraction
    log_pi_coefficient: Fraction | None = None

    def evaluated(self, t: float) -> float:
        import math
        return self.constant.to_float() + float(self.slope) * math.log(t)


@dataclass(frozen=True)
class PageData:
    r: int
    dims: tuple[int, ...]
    d_ranks: tuple[int, ...]   # rank of the page differential out of each degree
    torsion: TorsionValue


@dataclass(frozen=True)
class SpectralSequenceReport:
    pages: tuple[PageData, ...]
    stabilization_page: int
    einf_dims: tuple[int, ...]

    def ss_torsion(self) -> TorsionValue:
        acc = TorsionValue.one()
        for page in self.pages:
            acc = acc * page.torsion
        return acc


def validate_deformation(d: DeformedComplex) -> None:
    """Check D(t) D(t) = 0 as a polynomial identity, and the Gram matrices."""
    complexes.validate(d.fiber())
    for i in range(len(d.boundaries) - 1):
        comp = mat_mul(d.boundaries[i + 1], d.boundaries[i])
        worst = None
        for r in range(comp.rows):
            for s in range(comp.cols):
                p = comp.data[r][s]
                if p:
                    v = p.valuation
                    if worst is None or v < worst[0]:
                        worst = (v, r, s)
        if worst is not None:
            v, r, s = worst
            raise ShapeError(
                f"not a complex: (D_{i + 1} D_{i})[{r}][{s}] has nonzero "
                f"t-degree-{v} coefficient")


def laplacian_poly(d: DeformedComplex, i: int) -> Mat:
    if not 0 <= i <= d.top_degree:
        raise ShapeError(f"degree {i} out of range")
    out = Mat.zeros(d.dims[i], d.dims[i], zero=Poly())
    if i < d.top_degree:
        adj = mat_mul(inverse(d.grams[i]),
                      mat_mul(d.boundary(i).transpose(), d.grams[i + 1]))
        out = mat_add(out, mat_mul(adj, d.boundary(i)))
    if i > 0:
        adj = mat_mul(inverse(d.grams[i - 1]),
                      mat_mul(d.boundary(i - 1).transpose(), d.grams[i]))
        out = mat_add(out, mat_mul(d.boundary(i - 1), adj))
    return out.map(_to_poly)


def _degree_charpoly(d: DeformedComplex, i: int) -> tuple[int, Poly, list[Poly]]:
    """(k, a0, raw tail) of the degree-i Laplacian characteristic polynomial."""
    cp = char_poly(laplacian_poly(d, i))
    k, a0 = pseudo_det_poly(cp)
    tail = [_to_poly(c) for c in cp[k:]]
    return k, _to_poly(a0), tail


def order_spectrum(d: DeformedComplex) -> OrderSpectrum:
    """Per degree, the vanishing-order classes of the Laplacian eigenvalue
    curves, via Newton polygons of the characteristic polynomials."""
    spectra = []
    for i in range(d.top_degree + 1):
        k, a0, tail = _degree_charpoly(d, i)
        edges = newton_polygon(tail) if len(tail) > 1 else []
        classes = tuple(OrderClass(v // 2, w, prod)
                        for v, w, prod in sorted(edges))
        if sum(cl.count for cl in classes) + k != d.dims[i]:
            raise InternalConsistencyError(
                f"polygon widths do not exhaust degree {i}")
        prod_all = Fraction(1)
        val_all = 0
        for cl in classes:
            prod_all *= cl.product
            val_all += 2 * cl.order * cl.count
        if classes and (prod_all != a0.lowest_coeff or val_all != a0.valuation):
            raise InternalConsistencyError(
                f"polygon data disagrees with pseudo-determinant in degree {i}")
        spectra.append(DegreeSpectrum(k, classes))
    return OrderSpectrum(tuple(spectra))


def _snf_exponents(d: DeformedComplex) -> list[list[int]]:
    return [snf_tadic(d.boundaries[i]) for i in range(len(d.boundaries))]


def _dims_from_spectrum(d: DeformedComplex, spectrum: OrderSpectrum, r: int) -> tuple[int, ...]:
    return tuple(d.dims[i] - spectrum.curves_below(i, r)
                 for i in range(d.top_degree + 1))


def _dims_from_snf(d: DeformedComplex, snfs: list[list[int]], r: int) -> tuple[int, ...]:
    out = []
    for i in range(d.top_degree + 1):
        n = d.dims[i]
        if i < len(snfs):
            n -= sum(1 for s in snfs[i] if s < r)
        if i > 0:
            n -= sum(1 for s in snfs[i - 1] if s < r)
        out.append(n)
    return tuple(out)


def page_dims(d: DeformedComplex, r: int) -> tuple[int, ...]:
    """Per-degree page dimensions, computed by the Newton-polygon route and
    recomputed by the Smith-exponent route; the two must agree."""
    if r < 0:
        raise ValueError("page index must be nonnegative")
    spectrum = order_spectrum(d)
    via_orders = _dims_from_spectrum(d, spectrum, r)
    via_snf = _dims_from_snf(d, _snf_exponents(d), r)
    if via_orders != via_snf:
        raise InternalConsistencyError(
            f"page {r} dims differ between routes: orders {via_orders}, "
            f"smith {via_snf}")
    return via_orders


def _page_torsion_from_spectrum(d: DeformedComplex, spectrum: OrderSpectrum,
                                r: int) -> TorsionValue:
    factors = []
    for i in range(d.top_degree + 1):
        weight = Fraction(i if i % 2 == 0 else -i, 2)
        if not weight:
            continue
        prod = spectrum.class_product(i, r)
        factors.append((prod, weight))
    return TorsionValue.from_factors(factors)


def page_torsion(d: DeformedComplex, r: int) -> TorsionValue:
    """Torsion of the page-r complex: the order-r eigenvalue class products
    raised to the alternating degree weights."""
    if r < 1:
        raise ValueError("page torsions are defined for r >= 1; "
                         "page 0 is the torsion of the fiber complex")
    return _page_torsion_from_spectrum(d, order_spectrum(d), r)


def ss_torsion(d: DeformedComplex, include_page_zero: bool = True) -> TorsionValue:
    """Product of the page torsions rho_0 * rho_1 * ... (rho_0 is the torsion
    of the fiber complex).  Set include_page_zero=False for the convention
    that starts the product at rho_1.

    The grouping by pages must agree with the grouping by lowest
    pseudo-determinant coefficients; a mismatch raises.
    """
    spectrum = order_spectrum(d)
    rho0 = complexes.torsion(d.fiber())
    acc = rho0 if include_page_zero else TorsionValue.one()
    for r in range(1, spectrum.max_order() + 1):
        acc = acc * _page_torsion_from_spectrum(d, spectrum, r)

    # independent grouping: all positive-order classes at once, through the
    # lowest coefficients of the pseudo-determinants
    check = rho0.rho_squared if include_page_zero else Fraction(1)
    for i in range(d.top_degree + 1):
        weight = i if i % 2 == 0 else -i
        if not weight:
            continue
        _, a0, _ = _degree_charpoly(d, i)
        check *= (a0.lowest_coeff / spectrum.class_product(i, 0)) ** weight
    if acc.rho_squared != check:
        raise InternalConsistencyError(
            f"spectral-sequence torsion groupings disagree: pages give "
            f"{acc.rho_squared}, pseudo-determinants give {check}")
    return acc


def farber_expansion(d: DeformedComplex) -> AsymptoticExpansion:
    """Asymptotics of log rho(t) for t -> 0 through the spectral sequence:
    constant log(ss torsion), slope from the page-dimension drops."""
    spectrum = order_spectrum(d)
    max_r = spectrum.max_order()
    dims_by_page = [_dims_from_spectrum(d, spectrum, r) for r in range(max_r + 2)]
    slope = Fraction(0)
    for i in range(d.top_degree + 1):
        sign = 1 if i % 2 == 0 else -1
        for r in range(1, max_r + 1):
            drop = dims_by_page[r][i] - dims_by_page[r + 1][i]
            slope += sign * i * r * drop
    return AsymptoticExpansion(ss_torsion(d).log_form, slope)


def direct_asymptotics(d: DeformedComplex) -> AsymptoticExpansion:
    """Asymptotics of log rho(t) straight from the pseudo-determinants:
    constant from the lowest t-coefficients, slope from the t-valuations.
    No spectral sequence involved."""
    factors = []
    slope = Fraction(0)
    for i in range(d.top_degree + 1):
        weight = Fraction(i if i % 2 == 0 else -i, 2)
        if not weight:
            continue
        _, a0, _ = _degree_charpoly(d, i)
        low = a0.lowest_coeff
        if low <= 0:
            raise InternalConsistencyError(
                f"nonpositive leading eigenvalue product in degree {i}")
        factors.append((low, weight))
        slope += weight * a0.valuation
    return AsymptoticExpansion(LogValue(factors), slope)


def torsion_at(d: DeformedComplex, t0: Fraction) -> TorsionValue:
    """Exact torsion of the complex specialized at a nonzero rational t0."""
    t0 = Fraction(t0)
    if t0 == 0:
        raise ValueError("t0 must be nonzero; use fiber() for t = 0")
    return complexes.torsion(d.at(t0))


def ss_report(d: DeformedComplex, max_page: int | None = None) -> SpectralSequenceReport:
    """Page dimensions, differential ranks, page torsions, and the
    stabilization page, with the two-route dimension check on every page."""
    spectrum = order_spectrum(d)
    snfs = _snf_exponents(d)
    max_order = spectrum.max_order()
    einf = _dims_from_spectrum(d, spectrum, max_order + 1)
    stab = next(r for r in range(max_order + 2)
                if _dims_from_spectrum(d, spectrum, r) == einf)
    top = stab if max_page is None else max(max_page, stab)

    pages = []
    prev_dims: tuple[int, ...] | None = None
    for r in range(top + 1):
        dims_r = _dims_from_spectrum(d, spectrum, r)
        if dims_r != _dims_from_snf(d, snfs, r):
            raise InternalConsistencyError(f"page {r} dims differ between routes")
        ranks = tuple(sum(1 for s in snfs[i] if s == r) if i < len(snfs) else 0
                      for i in range(d.top_degree + 1))
        if prev_dims is not None:
            prev_ranks = pages[-1].d_ranks
            for i in range(d.top_degree + 1):
                expected = prev_dims[i] - prev_ranks[i] - (prev_ranks[i - 1] if i else 0)
                if dims_r[i] != expected:
                    raise InternalConsistencyError(
                        f"rank bookkeeping broken at page {r}, degree {i}")
        tors = (complexes.torsion(d.fiber()) if r == 0
                else _page_torsion_from_spectrum(d, spectrum, r))
        pages.append(PageData(r, dims_r, ranks, tors))
        prev_dims = dims_r
    return SpectralSequenceReport(tuple(pages), stab, einf)


def verify_stabilization(d: DeformedComplex, seed: int = 0,
                         attempts: int = 5) -> Fraction:
    """Check that the limit page dimensions equal the cohomology dimensions
    of the complex specialized at a generic rational parameter.  Retries on
    degenerate sample points; returns the parameter that worked."""
    spectrum = order_spectrum(d)
    einf = _dims_from_spectrum(d, spectrum, spectrum.max_order() + 1)
    rng = random.Random(seed)
    tried = []
    for _ in range(attempts):
        t0 = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        tried.append(t0)
        if complexes.cohomology(d.at(t0)).dims == einf:
            return t0
    raise InternalConsistencyError(
        f"limit page dims {einf} never matched specialized cohomology at "
        f"any of {tried}")
