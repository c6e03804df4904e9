"""Dense exact matrices over the rationals (or any commutative ring).

Entries are duck-typed: ``fractions.Fraction`` for rational matrices,
:class:`torsionkit.exact.Poly` for polynomial matrices.  The row-reduction
algorithms (rref, rank, kernel, inverse) require field entries, i.e.
Fractions; everything else only needs ring arithmetic.

Matrices are immutable after construction.  A shape is always stored
explicitly so that zero-row / zero-column matrices survive round trips.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ShapeError

ZERO = Fraction(0)
ONE = Fraction(1)


class Mat:
    """An immutable rows x cols grid of exact entries."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable]):
        grid = tuple(tuple(row) for row in data)
        if len(grid) != rows or any(len(r) != cols for r in grid):
            raise ShapeError(f"entry grid does not match declared shape {rows}x{cols}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", grid)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    @classmethod
    def from_rows(cls, data: Sequence[Sequence], cols: int | None = None) -> "Mat":
        rows = len(data)
        if cols is None:
            if rows == 0:
                raise ShapeError("cols must be given explicitly for a 0-row matrix")
            cols = len(data[0])
        return cls(rows, cols, data)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls(n, n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int, zero=ZERO) -> "Mat":
        return cls(rows, cols, [[zero] * cols for _ in range(rows)])

    @classmethod
    def diag(cls, entries: Sequence) -> "Mat":
        n = len(entries)
        return cls(n, n, [[entries[i] if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, entries: Sequence) -> "Mat":
        return cls(len(entries), 1, [[e] for e in entries])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.rows == other.rows
            and self.cols == other.cols
            and all(
                self.data[i][j] == other.data[i][j]
                for i in range(self.rows)
                for j in range(self.cols)
            )
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        body = "; ".join(" ".join(str(e) for e in row) for row in self.data)
        return f"Mat({self.rows}x{self.cols}: {body})"

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(not e for row in self.data for e in row)

    def transpose(self) -> "Mat":
        return Mat(self.cols, self.rows, [[self.data[i][j] for i in range(self.rows)]
                                          for j in range(self.cols)])

    def map(self, f: Callable) -> "Mat":
        return Mat(self.rows, self.cols, [[f(e) for e in row] for row in self.data])

    def scale(self, s) -> "Mat":
        return self.map(lambda e: e * s)

    def col(self, j: int) -> tuple:
        return tuple(self.data[i][j] for i in range(self.rows))

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Mat":
        return Mat(len(row_idx), len(col_idx),
                   [[self.data[i][j] for j in col_idx] for i in row_idx])


def mat_add(a: Mat, b: Mat) -> Mat:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ShapeError(f"cannot add {a.rows}x{a.cols} and {b.rows}x{b.cols}")
    return Mat(a.rows, a.cols, [[a.data[i][j] + b.data[i][j] for j in range(a.cols)]
                                for i in range(a.rows)])


def mat_sub(a: Mat, b: Mat) -> Mat:
    return mat_add(a, b.scale(-1))


def mat_mul(a: Mat, b: Mat) -> Mat:
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    bt = b.transpose().data
    out = []
    for i in range(a.rows):
        arow = a.data[i]
        out.append([_dot(arow, bt[j]) for j in range(b.cols)])
    return Mat(a.rows, b.cols, out)


def _dot(u: Sequence, v: Sequence):
    acc = ZERO
    for x, y in zip(u, v):
        if x and y:
            acc = acc + x * y
    return acc


def hstack(a: Mat, b: Mat) -> Mat:
    if a.rows != b.rows:
        raise ShapeError("hstack needs equal row counts")
    return Mat(a.rows, a.cols + b.cols,
               [list(a.data[i]) + list(b.data[i]) for i in range(a.rows)])


def vstack(a: Mat, b: Mat) -> Mat:
    if a.cols != b.cols:
        raise ShapeError("vstack needs equal column counts")
    return Mat(a.rows + b.rows, a.cols, list(a.data) + list(b.data))


def trace(m: Mat):
    if not m.is_square:
        raise ShapeError("trace of a non-square matrix")
    acc = ZERO
    for i in range(m.rows):
        acc = acc + m.data[i][i]
    return acc


# ---------------------------------------------------------------------------
# Field algorithms (Fraction entries).  Pivoting is deterministic: the first
# nonzero entry in column order, so every caller gets reproducible bases.
# ---------------------------------------------------------------------------

def rref(m: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    a = [list(row) for row in m.data]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        pivot_row = next((i for i in range(r, m.rows) if a[i][c]), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return Mat(m.rows, m.cols, a), pivots


def rank(m: Mat) -> int:
    return len(rref(m)[1])


def kernel_basis(m: Mat) -> Mat:
    """Columns form the canonical basis of the null space of ``m``."""
    red, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    cols = []
    for fc in free:
        v = [ZERO] * m.cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red.data[r][fc]
        cols.append(v)
    return Mat(m.cols, len(free), [[col[i] for col in cols] for i in range(m.cols)])


def inverse(m: Mat) -> Mat:
    if not m.is_square:
        raise ShapeError("inverse of a non-square matrix")
    n = m.rows
    aug = hstack(m, Mat.identity(n))
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ShapeError("matrix is singular")
    return red.submatrix(range(n), range(n, 2 * n))


def det_bareiss(m: Mat) -> Fraction:
    """Determinant by fraction-free Bareiss elimination (exact divisions)."""
    if not m.is_square:
        raise ShapeError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return ONE
    a = [[Fraction(e) for e in row] for row in m.data]
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return ZERO
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            a[i][k] = ZERO
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def leading_principal_minors(m: Mat) -> list[Fraction]:
    return [det_bareiss(m.submatrix(range(k), range(k))) for k in range(1, m.rows + 1)]


def is_symmetric(m: Mat) -> bool:
    return m.is_square and all(
        m.data[i][j] == m.data[j][i] for i in range(m.rows) for j in range(i))


def is_positive_definite(m: Mat) -> bool:
    return is_symmetric(m) and all(d > 0 for d in leading_principal_minors(m))


# ---------------------------------------------------------------------------
# Column-space (subspace) utilities over the rationals.  A subspace is a Mat
# whose columns span it; col_basis produces a canonical reduced generator set
# so equal subspaces get equal representations.
# ---------------------------------------------------------------------------

def col_basis(m: Mat) -> Mat:
    red, pivots = rref(m.transpose())
    rows = [red.data[r] for r in range(len(pivots))]
    return Mat(len(pivots), m.rows, rows).transpose()


def subspace_dim(m: Mat) -> int:
    return rank(m)


def subspace_sum(a: Mat, b: Mat) -> Mat:
    return col_basis(hstack(a, b))


def subspace_intersect(a: Mat, b: Mat) -> Mat:
    """Canonical basis of col(a) n col(b)."""
    if a.cols == 0 or b.cols == 0:
        return Mat.zeros(a.rows, 0)
    ker = kernel_basis(hstack(a, b.scale(-1)))
    coeff = ker.submatrix(range(a.cols), range(ker.cols))
    return col_basis(mat_mul(a, coeff))


def preimage(d: Mat, w: Mat) -> Mat:
    """Canonical basis of {v : d v in col(w)}."""
    if w.cols == 0:
        return col_basis(kernel_basis(d))
    ker = kernel_basis(hstack(d, w.scale(-1)))
    vpart = ker.submatrix(range(d.cols), range(ker.cols))
    return col_basis(vpart)


def subspace_contains(big: Mat, small: Mat) -> bool:
    if small.cols == 0:
        return True
    return rank(hstack(big, small)) == rank(big)
