"""Filtered complexes and their spectral sequences.

A filtration is an increasing chain 0 = F_0 c F_1 c ... c F_k = V of
boundary-stable subspaces in every degree, with one common length k.  Two
constructions are implemented side by side: the classical bigraded spectral
sequence computed directly from subspace arithmetic over Q, and the
one-parameter deformation obtained by conjugating the boundary with the
level-weighted operator A_t = sum t^j (P_j - P_{j-1}) built from orthogonal
projections.  Their page data must agree after collapsing the bigrading to
the total degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import complexes, deformation
from .complexes import GradedComplex, TorsionValue
from .deformation import AsymptoticExpansion, DeformedComplex
from .errors import FiltrationError, InternalConsistencyError, ShapeError
from .exact import Poly
from .matrices import (
    Mat,
    col_basis,
    hstack,
    inverse,
    mat_mul,
    mat_sub,
    preimage,
    rank,
    subspace_contains,
    subspace_dim,
    subspace_intersect,
    subspace_sum,
)


@dataclass(frozen=True)
class FilteredComplex:
    """base complex plus, per degree, basis matrices for F_1 .. F_k
    (F_0 = 0 is implicit and F_k must span the whole degree)."""

    base: GradedComplex
    levels: tuple[tuple[Mat, ...], ...]

    def __init__(self, base: GradedComplex, levels: Sequence[Sequence[Mat]]):
        levels = tuple(tuple(per_degree) for per_degree in levels)
        if len(levels) != len(base.dims):
            raise ShapeError("need one filtration chain per degree")
        length = {len(chain) for chain in levels}
        if len(length) != 1:
            raise ShapeError("all degrees must use one common filtration length")
        for i, chain in enumerate(levels):
            for p, basis in enumerate(chain):
                if basis.rows != base.dims[i]:
                    raise ShapeError(
                        f"filtration basis at degree {i}, level {p + 1} has "
                        f"{basis.rows} rows, expected {base.dims[i]}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "levels", levels)

    @property
    def length(self) -> int:
        return len(self.levels[0])

    def subspace(self, i: int, level: int) -> Mat:
        """Canonical basis of F_level V^i, clamping level below 0 and above k."""
        if level <= 0:
            return Mat.zeros(self.base.dims[i], 0)
        if level >= self.length:
            return Mat.identity(self.base.dims[i])
        return col_basis(self.levels[i][level - 1])


def validate_filtration(fc: FilteredComplex) -> None:
    """Exact checks: chains increase, top level spans, boundary preserves
    every level."""
    base = fc.base
    complexes.validate(base)
    k = fc.length
    for i in range(len(base.dims)):
        for p in range(1, k + 1):
            lo = fc.subspace(i, p - 1)
            hi = fc.levels[i][p - 1]
            if not subspace_contains(hi, lo):
                raise FiltrationError(
                    f"filtration not increasing at degree {i}, level {p}")
        if subspace_dim(fc.levels[i][k - 1]) != base.dims[i]:
            raise FiltrationError(f"top filtration level does not span degree {i}")
    for i in range(len(base.boundaries)):
        d = base.boundaries[i]
        for p in range(1, k + 1):
            image = mat_mul(d, fc.subspace(i, p))
            if not subspace_contains(fc.subspace(i + 1, p), image):
                raise FiltrationError(
                    f"boundary leaves filtration at degree {i}, level {p}")


# ---------------------------------------------------------------------------
# The direct bigraded spectral sequence.  The first index p is the filtration
# level and q = total degree - p; the page-r differential maps (p, q) to
# (p - r, q + r + 1).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BigradedPage:
    r: int
    dims: dict[tuple[int, int], int]
    d_ranks: dict[tuple[int, int], int]

    def total(self, i: int) -> int:
        return sum(n for (p, q), n in self.dims.items() if p + q == i)


def _cycle_space(fc: FilteredComplex, level: int, r: int, i: int) -> Mat:
    """Z^level_r in degree i: elements of F_level whose boundary lies r
    levels deeper.  r = -1 means no boundary condition at all."""
    if i < 0 or i >= len(fc.base.dims):
        return Mat.zeros(0, 0)
    f_here = fc.subspace(i, level)
    if r < 0:
        return f_here
    target = fc.subspace(i + 1, level - r) if i < fc.base.top_degree \
        else Mat.zeros(0, 0)
    d = fc.base.boundary(i)
    return subspace_intersect(f_here, preimage(d, target))


def _boundary_image(fc: FilteredComplex, level: int, r: int, i: int) -> Mat:
    """D(Z^level_r) land inside degree i + 1."""
    if i < 0:
        return Mat.zeros(fc.base.dims[0], 0)
    z = _cycle_space(fc, level, r, i)
    return col_basis(mat_mul(fc.base.boundary(i), z))


def filtration_ss(fc: FilteredComplex, max_page: int | None = None) -> list[BigradedPage]:
    """Bigraded pages r = 0, 1, ... computed by the classical cycle/boundary
    subspace formulas, up to one page past stabilization (or max_page)."""
    base = fc.base
    k = fc.length
    top = k + 1 if max_page is None else max(max_page, k + 1)
    pages = []
    for r in range(top + 1):
        dims: dict[tuple[int, int], int] = {}
        ranks: dict[tuple[int, int], int] = {}
        for i in range(base.top_degree + 1):
            for level in range(1, k + 1):
                z = _cycle_space(fc, level, r, i)
                den = subspace_sum(
                    _cycle_space(fc, level - 1, r - 1, i),
                    _boundary_image(fc, level + r - 1, r - 1, i - 1))
                dim_e = subspace_dim(z) - subspace_dim(subspace_intersect(den, z))
                if dim_e < 0:
                    raise InternalConsistencyError("negative page dimension")
                if dim_e:
                    dims[(level, i - level)] = dim_e
                if r >= 1 and i < base.top_degree:
                    img = _boundary_image(fc, level, r, i)
                    t_den = subspace_sum(
                        _cycle_space(fc, level - r - 1, r - 1, i + 1),
                        _boundary_image(fc, level - 1, r - 1, i))
                    rk = subspace_dim(subspace_sum(img, t_den)) - subspace_dim(t_den)
                    if rk:
                        ranks[(level, i - level)] = rk
        pages.append(BigradedPage(r, dims, ranks))
    return pages


# ---------------------------------------------------------------------------
# The deformation picture
# ---------------------------------------------------------------------------

def _slice_projectors(fc: FilteredComplex, i: int) -> list[Mat]:
    """Q_j = P_j - P_{j-1} where P_j is the Gram-orthogonal projection onto
    F_j V^i; the Q_j sum to the identity."""
    g = fc.base.grams[i]
    n = fc.base.dims[i]
    projectors = [Mat.zeros(n, n)]
    for level in range(1, fc.length + 1):
        b = fc.subspace(i, level)
        if b.cols == 0:
            projectors.append(Mat.zeros(n, n))
            continue
        bg = mat_mul(b.transpose(), mat_mul(g, b))
        p = mat_mul(b, mat_mul(inverse(bg), mat_mul(b.transpose(), g)))
        projectors.append(p)
    return [mat_sub(projectors[j], projectors[j - 1])
            for j in range(1, fc.length + 1)]


def rees_deformation(fc: FilteredComplex, m: int = 0) -> DeformedComplex:
    """The polynomial deformation D(t) = A_t^{-1} D A_t in the original basis.

    Filtration compatibility kills all negative powers of t; a surviving one
    raises.  The integer m only shifts the metric bookkeeping by a uniform
    power of t, which torsion never sees, so it does not enter D(t).
    """
    del m  # uniform metric scaling; see deformed_metric_torsion
    base = fc.base
    k = fc.length
    slices = [_slice_projectors(fc, i) for i in range(base.top_degree + 1)]
    new_bnds = []
    for i in range(base.top_degree):
        d = base.boundaries[i]
        acc = Mat.zeros(base.dims[i + 1], base.dims[i], zero=Poly())
        for j in range(1, k + 1):
            for l in range(1, k + 1):
                piece = mat_mul(slices[i + 1][j - 1], mat_mul(d, slices[i][l - 1]))
                if piece.is_zero():
                    continue
                if l < j:
                    raise InternalConsistencyError(
                        f"negative power t^{l - j} in the deformed boundary at "
                        f"degree {i}: filtration compatibility violated")
                shifted = piece.map(lambda e: Poly.monomial(e, l - j) if e else Poly())
                acc = Mat(acc.rows, acc.cols,
                          [[acc.data[r][c] + shifted.data[r][c]
                            for c in range(acc.cols)] for r in range(acc.rows)])
        new_bnds.append(acc)
    return DeformedComplex(base.dims, new_bnds, base.grams)


def deformed_metric_torsion(fc: FilteredComplex, m: int, t0: Fraction) -> TorsionValue:
    """Torsion of the original complex under the deformed metric
    g_t(x, y) = g(t^{2m} A_t^{-2} x, y), evaluated exactly at t0 > 0.

    Must equal the torsion of the deformed complex at t0; the comparison
    against that second route is carried out here.
    """
    t0 = Fraction(t0)
    if t0 <= 0:
        raise ValueError("t0 must be a positive rational")
    base = fc.base
    scale = t0 ** (2 * m)
    new_grams = []
    for i in range(base.top_degree + 1):
        slices = _slice_projectors(fc, i)
        a = Mat.zeros(base.dims[i], base.dims[i])
        for j, q in enumerate(slices, start=1):
            a = Mat(a.rows, a.cols,
                    [[a.data[r][c] + q.data[r][c] * t0 ** j
                      for c in range(a.cols)] for r in range(a.rows)])
        a_inv2 = mat_mul(inverse(a), inverse(a))
        g_t = mat_mul(a_inv2.transpose(), base.grams[i]).scale(scale)
        new_grams.append(g_t)
    metric_route = complexes.torsion(base.with_grams(new_grams))
    boundary_route = deformation.torsion_at(rees_deformation(fc, m), t0)
    if metric_route.rho_squared != boundary_route.rho_squared:
        raise InternalConsistencyError(
            f"metric deformation gives rho^2 = {metric_route.rho_squared}, "
            f"boundary deformation gives {boundary_route.rho_squared}")
    return metric_route


def filcom_expansion(fc: FilteredComplex) -> AsymptoticExpansion:
    """Asymptotic expansion of the filtration's torsion deformation.

    Delegates to the deformation route and checks that the bigraded slope
    sum (which only sees p + q) collapses to the same value.
    """
    exp = deformation.farber_expansion(rees_deformation(fc))
    pages = filtration_ss(fc)
    slope = Fraction(0)
    for r in range(1, len(pages)):
        cur = pages[r]
        # the last computed page is already stable, so it stands in for r+1
        nxt = pages[r + 1] if r + 1 < len(pages) else pages[-1]
        keys = set(cur.dims) | set(nxt.dims)
        for (p, q) in keys:
            i = p + q
            sign = 1 if i % 2 == 0 else -1
            drop = cur.dims.get((p, q), 0) - nxt.dims.get((p, q), 0)
            slope += sign * i * r * drop
    if slope != exp.slope:
        raise InternalConsistencyError(
            f"bigraded slope {slope} != deformation slope {exp.slope}")
    return exp
