"""Seeded random model generators used by the test suite, the regression
fixtures and the CLI's randomized checks.

Every generator builds a block-diagonal normal form first (elementary
two-term pairs plus harmonic generators), where the complex axiom and the
filtration compatibility hold by construction, and then conjugates by
unimodular changes of basis.  The normal form also hands back ground truth
(Smith exponents per boundary) that tests can assert against for free.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .complexes import GradedComplex
from .deformation import DeformedComplex
from .exact import Poly
from .filtration import FilteredComplex
from .matrices import Mat, inverse, mat_mul
from .morse import CriticalPoint, Geometry, MorseModel, ZERO_FLAT_METRIC


def random_unimodular(rng: random.Random, n: int, steps: int | None = None) -> Mat:
    """Integer matrix of determinant +-1 built from shears and swaps."""
    rows = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    if n <= 1:
        return Mat(n, n, rows)
    for _ in range(steps if steps is not None else 2 * n):
        i, j = rng.sample(range(n), 2)
        move = rng.choice(["shear", "shear", "shear", "swap"])
        if move == "shear":
            c = rng.choice([-2, -1, 1])
            rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
        else:
            rows[i], rows[j] = rows[j], rows[i]
    return Mat(n, n, rows)


def random_pd_gram(rng: random.Random, n: int) -> Mat:
    """Random integer symmetric positive definite matrix."""
    a = [[Fraction(rng.randint(-1, 1)) for _ in range(n)] for _ in range(n)]
    am = Mat(n, n, a)
    ata = mat_mul(am.transpose(), am)
    return Mat(n, n, [[ata.data[i][j] + (rng.randint(1, 3) if i == j else 0)
                       for j in range(n)] for i in range(n)])


@dataclass
class _Skeleton:
    """Block normal form: dims, pair ranks, and the slot layout
    [images | harmonic | coimages] per degree."""

    dims: list[int]
    ranks: list[int]  # rank of D_i, i = 0 .. top-1

    def image_slots(self, i: int) -> range:
        prev = self.ranks[i - 1] if i > 0 else 0
        return range(prev)

    def harmonic_slots(self, i: int) -> range:
        prev = self.ranks[i - 1] if i > 0 else 0
        nxt = self.ranks[i] if i < len(self.ranks) else 0
        return range(prev, self.dims[i] - nxt)

    def coimage_slots(self, i: int) -> range:
        nxt = self.ranks[i] if i < len(self.ranks) else 0
        return range(self.dims[i] - nxt, self.dims[i])


def _random_skeleton(rng: random.Random, max_top: int, max_dim: int) -> _Skeleton:
    top = rng.randint(1, max_top)
    dims = [rng.randint(0, max_dim) for _ in range(top + 1)]
    if sum(dims) == 0:
        dims[rng.randrange(len(dims))] = rng.randint(1, max_dim)
    ranks = []
    for i in range(top):
        used = ranks[i - 1] if i > 0 else 0
        bound = min(dims[i] - used, dims[i + 1])
        ranks.append(rng.randint(0, max(0, bound)))
    return _Skeleton(dims, ranks)


def _pair_weight(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))


def random_complex(rng: random.Random, max_top: int = 4, max_dim: int = 5,
                   with_grams: bool = True) -> GradedComplex:
    sk = _random_skeleton(rng, max_top, max_dim)
    bnds = []
    for i in range(len(sk.dims) - 1):
        block = [[Fraction(0)] * sk.dims[i] for _ in range(sk.dims[i + 1])]
        for a, col in enumerate(sk.coimage_slots(i)):
            block[a][col] = _pair_weight(rng)
        bnds.append(Mat(sk.dims[i + 1], sk.dims[i], block))
    changes = [random_unimodular(rng, d) for d in sk.dims]
    conj = [mat_mul(changes[i + 1], mat_mul(bnds[i], inverse(changes[i])))
            for i in range(len(bnds))]
    grams = [random_pd_gram(rng, d) for d in sk.dims] if with_grams else None
    return GradedComplex(sk.dims, conj, grams)


def random_deformation(rng: random.Random, max_top: int = 4, max_dim: int = 5,
                       max_order: int = 3, max_entry_degree: int = 3,
                       with_grams: bool = True,
                       ) -> tuple[DeformedComplex, list[list[int]]]:
    """Returns the deformation together with the ground-truth Smith
    exponents of each boundary (known from the block construction)."""
    sk = _random_skeleton(rng, max_top, max_dim)
    use_poly_shears = rng.random() < 0.5
    weight_budget = max_entry_degree - 2 if use_poly_shears else max_entry_degree
    weight_budget = max(0, min(weight_budget, max_order))

    truth: list[list[int]] = []
    bnds = []
    for i in range(len(sk.dims) - 1):
        block = [[Poly()] * sk.dims[i] for _ in range(sk.dims[i + 1])]
        orders = []
        for a, col in enumerate(sk.coimage_slots(i)):
            s = rng.randint(0, weight_budget)
            unit = [_pair_weight(rng)]
            if rng.random() < 0.3 and s + 1 <= weight_budget:
                unit.append(Fraction(rng.choice([-1, 1])))
            block[a][col] = Poly([0] * s + unit)
            orders.append(s)
        truth.append(sorted(orders))
        bnds.append(Mat(sk.dims[i + 1], sk.dims[i], block))

    changes: list[Mat] = []
    for d in sk.dims:
        u = random_unimodular(rng, d).map(lambda e: Poly.const(e))
        if use_poly_shears and d >= 2:
            r, c = rng.sample(range(d), 2)
            coef = rng.choice([-1, 1])
            shear = Mat(d, d, [[Poly.const(1) if a == b else
                                (Poly.monomial(coef, 1) if (a, b) == (r, c) else Poly())
                                for b in range(d)] for a in range(d)])
            u = mat_mul(shear, u)
        changes.append(u)

    def poly_inverse(u: Mat) -> Mat:
        # unimodular with entries of degree <= 1 and nilpotent t-part:
        # invert exactly through the geometric series, which terminates
        n = u.rows
        u = u.map(as_poly)
        const = u.map(lambda p: p.coefficient(0))
        c_inv = inverse(const).map(lambda e: Poly.const(e))
        rest = Mat(n, n, [[u.data[a][b] - const.data[a][b]
                           for b in range(n)] for a in range(n)])
        nil = mat_mul(c_inv, rest).scale(-1)
        acc = Mat.identity(n).map(lambda e: Poly.const(e))
        term = acc
        for _ in range(n):
            term = mat_mul(nil, term)
            if term.is_zero():
                break
            acc = Mat(n, n, [[acc.data[a][b] + term.data[a][b]
                              for b in range(n)] for a in range(n)])
        return mat_mul(acc, c_inv)

    conj = [mat_mul(changes[i + 1], mat_mul(bnds[i], poly_inverse(changes[i])))
            for i in range(len(bnds))]
    grams = [random_pd_gram(rng, d) for d in sk.dims] if with_grams else None
    return DeformedComplex(sk.dims, conj, grams), truth


def random_filtered(rng: random.Random, max_top: int = 3, max_dim: int = 4,
                    max_levels: int = 4, with_grams: bool = True) -> FilteredComplex:
    sk = _random_skeleton(rng, max_top, max_dim)
    k = rng.randint(1, max_levels)
    levels = [[0] * d for d in sk.dims]  # model-coordinate level per slot
    for i in range(len(sk.dims)):
        for slot in sk.harmonic_slots(i):
            levels[i][slot] = rng.randint(1, k)
        for slot in sk.coimage_slots(i):
            levels[i][slot] = rng.randint(1, k)
    bnds = []
    for i in range(len(sk.dims) - 1):
        block = [[Fraction(0)] * sk.dims[i] for _ in range(sk.dims[i + 1])]
        for a, col in enumerate(sk.coimage_slots(i)):
            block[a][col] = _pair_weight(rng)
            # the image slot inherits a level no greater than its source
            levels[i + 1][a] = rng.randint(1, levels[i][col])
        bnds.append(Mat(sk.dims[i + 1], sk.dims[i], block))

    changes = [random_unimodular(rng, d) for d in sk.dims]
    conj = [mat_mul(changes[i + 1], mat_mul(bnds[i], inverse(changes[i])))
            for i in range(len(bnds))]
    grams = [random_pd_gram(rng, d) for d in sk.dims] if with_grams else None
    base = GradedComplex(sk.dims, conj, grams)

    chains = []
    for i, d in enumerate(sk.dims):
        chain = []
        for level in range(1, k + 1):
            cols = [slot for slot in range(d) if levels[i][slot] <= level]
            picked = Mat(d, len(cols),
                         [[Fraction(1) if r == c else Fraction(0) for c in cols]
                          for r in range(d)])
            chain.append(mat_mul(changes[i], picked))
        chains.append(tuple(chain))
    return FilteredComplex(base, chains)


def random_morse_model(rng: random.Random, max_dim: int = 4,
                       max_per_index: int = 3, max_rank: int = 2,
                       self_indexing: bool = False) -> MorseModel:
    n = rng.randint(1, max_dim)
    counts = [rng.randint(0, max_per_index) for _ in range(n + 1)]
    if sum(counts) == 0:
        counts[rng.randrange(n + 1)] = 1
    if n % 2 == 1:
        # mirror real odd-dimensional manifolds: zero Euler characteristic
        while sum((-1) ** i * c for i, c in enumerate(counts)) > 0:
            counts[rng.randrange(0, n + 1, 2) + 1] += 1
        while sum((-1) ** i * c for i, c in enumerate(counts)) < 0:
            counts[rng.randrange(0, n + 1, 2)] += 1
    ranks = []
    for i in range(n):
        used = ranks[i - 1] if i > 0 else 0
        ranks.append(rng.randint(0, max(0, min(counts[i] - used, counts[i + 1]))))
    sk = _Skeleton(counts, ranks)
    # the per-index changes of basis must chain across degrees to keep d^2 = 0
    changes = [random_unimodular(rng, c, steps=2 * c) for c in counts]
    incidence = {}
    for i in range(n):
        block = [[Fraction(0)] * counts[i] for _ in range(counts[i + 1])]
        for a, col in enumerate(sk.coimage_slots(i)):
            block[a][col] = _pair_weight(rng)
        incidence[i] = mat_mul(changes[i + 1],
                               mat_mul(Mat(counts[i + 1], counts[i], block),
                                       inverse(changes[i])))
    points = []
    counter = 0
    for i in range(n + 1):
        for _ in range(counts[i]):
            if self_indexing:
                value = Fraction(i)
            else:
                value = i + rng.choice([Fraction(0), Fraction(1, 4),
                                        Fraction(1, 3), Fraction(1, 2)])
            points.append(CriticalPoint(f"p{counter}", i, value))
            counter += 1
    if n % 2 == 0:
        geometry = Geometry(integral_f_euler=Fraction(rng.randint(-5, 5)),
                            integral_theta_psi=ZERO_FLAT_METRIC)
    else:
        geometry = Geometry(integral_theta_psi=ZERO_FLAT_METRIC)
    rank = rng.randint(1, max_rank)
    return MorseModel(n, rank, points, incidence, geometry)
