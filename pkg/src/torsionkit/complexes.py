"""Finite cochain complexes of Euclidean rational vector spaces.

A complex 0 -> V^0 -> ... -> V^n -> 0 is stored as the degree dimensions,
the boundary matrices D_i : V^i -> V^{i+1}, and one positive definite Gram
matrix per degree (identity = orthonormal basis).  The torsion is computed
two independent ways: through characteristic-polynomial pseudo-determinants
of the Laplacians, and through the classical ratio of Gram determinants of
chosen splittings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import GramError, InternalConsistencyError, NotAComplexError, ShapeError
from .exact import LogValue, char_poly, pseudo_det_poly
from .matrices import (
    Mat,
    det_bareiss,
    hstack,
    inverse,
    is_positive_definite,
    kernel_basis,
    mat_add,
    mat_mul,
    rank,
    rref,
    vstack,
)


@dataclass(frozen=True)
class GradedComplex:
    """dims[i] = dim V^i; boundaries[i] = D_i (dims[i+1] x dims[i]);
    grams[i] = Gram matrix of V^i."""

    dims: tuple[int, ...]
    boundaries: tuple[Mat, ...]
    grams: tuple[Mat, ...]

    def __init__(self, dims: Sequence[int], boundaries: Sequence[Mat],
                 grams: Sequence[Mat] | None = None):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 0 for d in dims):
            raise ShapeError("dims must be a nonempty list of nonnegative integers")
        boundaries = tuple(boundaries)
        if len(boundaries) != len(dims) - 1:
            raise ShapeError(f"expected {len(dims) - 1} boundary maps, got {len(boundaries)}")
        for i, d in enumerate(boundaries):
            if (d.rows, d.cols) != (dims[i + 1], dims[i]):
                raise ShapeError(
                    f"boundary {i} has shape {d.rows}x{d.cols}, expected "
                    f"{dims[i + 1]}x{dims[i]}")
        if grams is None:
            grams = tuple(Mat.identity(d) for d in dims)
        else:
            grams = tuple(grams)
            if len(grams) != len(dims):
                raise ShapeError("need one Gram matrix per degree")
            for i, g in enumerate(grams):
                if (g.rows, g.cols) != (dims[i], dims[i]):
                    raise ShapeError(f"Gram matrix {i} has wrong shape")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "grams", grams)

    @property
    def top_degree(self) -> int:
        return len(self.dims) - 1

    def boundary(self, i: int) -> Mat:
        """D_i, with out-of-range degrees giving empty maps."""
        if 0 <= i < len(self.boundaries):
            return self.boundaries[i]
        if i == -1:
            return Mat.zeros(self.dims[0], 0)
        if i == self.top_degree:
            return Mat.zeros(0, self.dims[-1])
        raise ShapeError(f"no boundary map at degree {i}")

    def with_grams(self, grams: Sequence[Mat]) -> "GradedComplex":
        return GradedComplex(self.dims, self.boundaries, grams)


@dataclass(frozen=True)
class TorsionValue:
    """A torsion held exactly: the positive rational rho^2 together with a
    factored form of log(rho)."""

    rho_squared: Fraction
    log_form: LogValue

    def __post_init__(self):
        if self.rho_squared <= 0:
            raise ValueError("rho_squared must be positive")
        if self.log_form.squared_value() != self.rho_squared:
            raise InternalConsistencyError("log form disagrees with rho_squared")

    @classmethod
    def one(cls) -> "TorsionValue":
        return cls(Fraction(1), LogValue.zero())

    @classmethod
    def from_factors(cls, factors: Sequence[tuple[Fraction, Fraction]]) -> "TorsionValue":
        lf = LogValue(factors)
        return cls(lf.squared_value(), lf)

    def __mul__(self, other: "TorsionValue") -> "TorsionValue":
        return TorsionValue(self.rho_squared * other.rho_squared,
                            self.log_form + other.log_form)

    def log_float(self) -> float:
        return self.log_form.to_float()

    def __eq__(self, other):
        return isinstance(other, TorsionValue) and self.rho_squared == other.rho_squared


@dataclass(frozen=True)
class CohomologyData:
    dims: tuple[int, ...]
    harmonic: tuple[Mat, ...]  # columns span Ker D_i n Ker D_{i-1}^*


def validate(c: GradedComplex) -> None:
    """Check D.D = 0 exactly and positive definiteness of every Gram matrix."""
    for i in range(len(c.boundaries) - 1):
        comp = mat_mul(c.boundaries[i + 1], c.boundaries[i])
        for r in range(comp.rows):
            for s in range(comp.cols):
                if comp.data[r][s]:
                    raise NotAComplexError(
                        f"not a complex: (D_{i + 1} D_{i})[{r}][{s}] = "
                        f"{comp.data[r][s]} != 0")
    for i, g in enumerate(c.grams):
        if not is_positive_definite(g):
            raise GramError(f"gram not positive definite at degree {i}")


def adjoint(c: GradedComplex, i: int) -> Mat:
    """D_i^* : V^{i+1} -> V^i with respect to the Gram metrics."""
    d = c.boundary(i)
    g_lo = c.grams[i]
    g_hi = c.grams[i + 1] if i + 1 <= c.top_degree else Mat.identity(0)
    return mat_mul(inverse(g_lo), mat_mul(d.transpose(), g_hi))


def laplacian(c: GradedComplex, i: int) -> Mat:
    """Matrix of the degree-i Laplacian in the given basis."""
    if not 0 <= i <= c.top_degree:
        raise ShapeError(f"degree {i} out of range")
    out = Mat.zeros(c.dims[i], c.dims[i])
    if i < c.top_degree:
        out = mat_add(out, mat_mul(adjoint(c, i), c.boundary(i)))
    if i > 0:
        out = mat_add(out, mat_mul(c.boundary(i - 1), adjoint(c, i - 1)))
    return out


def _eigenproduct(c: GradedComplex, i: int) -> Fraction:
    """Product of the nonzero Laplacian eigenvalues in degree i, exactly."""
    _, a0 = pseudo_det_poly(char_poly(laplacian(c, i)))
    if a0 <= 0:
        raise InternalConsistencyError(
            f"nonpositive eigenvalue product {a0} in degree {i}")
    return a0


def torsion(c: GradedComplex) -> TorsionValue:
    """Torsion via Laplacian spectra: log rho = (1/2) sum (-1)^i i log P_i
    with P_i the product of the nonzero eigenvalues in degree i.  No
    eigenvalue is ever computed individually."""
    factors = []
    for i in range(c.top_degree + 1):
        weight = Fraction(i if i % 2 == 0 else -i, 2)
        if weight:
            factors.append((_eigenproduct(c, i), weight))
    return TorsionValue.from_factors(factors)


def _harmonic_basis(c: GradedComplex, i: int) -> Mat:
    """Canonical basis of Ker D_i n Ker D_{i-1}^* in degree i."""
    stacked = vstack(c.boundary(i),
                     mat_mul(c.boundary(i - 1).transpose(), c.grams[i]))
    return kernel_basis(stacked)


def cohomology(c: GradedComplex) -> CohomologyData:
    dims = []
    harmonic = []
    for i in range(c.top_degree + 1):
        h = _harmonic_basis(c, i)
        expected = (c.dims[i] - rank(c.boundary(i))) - rank(c.boundary(i - 1))
        if h.cols != expected:
            raise InternalConsistencyError(
                f"harmonic dimension {h.cols} != rank-nullity count {expected} "
                f"in degree {i}")
        dims.append(h.cols)
        harmonic.append(h)
    return CohomologyData(tuple(dims), tuple(harmonic))


def _gram_det(basis: Mat, g: Mat) -> Fraction:
    if basis.cols == 0:
        return Fraction(1)
    return det_bareiss(mat_mul(basis.transpose(), mat_mul(g, basis)))


def torsion_by_bases(c: GradedComplex) -> TorsionValue:
    """Torsion as the ratio of the two determinant-line metrics, computed
    from explicit rational splittings.

    Per degree we assemble a basis of V^i from the image of the previous
    complement, harmonic representatives, and a complement of the kernel
    (standard basis vectors at the pivot columns of D_i).  The alternating
    product of Gram determinants of these bases over those of the harmonic
    bases is rho^2.
    """
    factors = []
    prev_complement_cols: list[int] = []
    for i in range(c.top_degree + 1):
        d = c.boundary(i)
        _, pivots = rref(d)
        n_i = c.dims[i]
        image = c.boundary(i - 1).submatrix(range(n_i), prev_complement_cols)
        harm = _harmonic_basis(c, i)
        comp = Mat(n_i, len(pivots),
                   [[Fraction(1) if r == p else Fraction(0) for p in pivots]
                    for r in range(n_i)])
        full = hstack(hstack(image, harm), comp)
        if full.cols != n_i:
            raise InternalConsistencyError(
                f"splitting of degree {i} has {full.cols} vectors, expected {n_i}")
        vol2 = _gram_det(full, c.grams[i])
        if vol2 == 0:
            raise InternalConsistencyError(f"degenerate splitting in degree {i}")
        h2 = _gram_det(harm, c.grams[i])
        ratio = vol2 / h2
        factors.append((ratio, Fraction(1 if i % 2 == 0 else -1, 2)))
        prev_complement_cols = pivots
    return TorsionValue.from_factors(factors)
