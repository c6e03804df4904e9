"""Combinatorial Morse data and the metric deformation it drives.

A model is a list of critical points with indices and rational values, plus
integer incidence matrices whose square is zero.  The deformation of the
fiber metric by exp(-2tf) becomes, after substituting tau = exp(-t/d) with
d a common denominator of the critical values, a polynomial deformation of
the based complex; every asymptotic coefficient is then exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import complexes, deformation, filtration
from .complexes import GradedComplex, TorsionValue
from .deformation import DeformedComplex, SpectralSequenceReport
from .errors import (
    FiltrationError,
    GeometryRequiredError,
    InputError,
    InternalConsistencyError,
)
from .exact import LogValue
from .filtration import FilteredComplex
from .matrices import Mat

ZERO_ODD_DIM = "zero:odd-dim"
ZERO_FLAT_METRIC = "zero:flat-metric"


@dataclass(frozen=True)
class CriticalPoint:
    ident: str
    index: int
    value: Fraction


@dataclass(frozen=True)
class Geometry:
    """Opaque geometric integrals; either exact rationals or a sanctioned
    vanishing assertion."""

    integral_f_euler: Fraction | str | None = None
    integral_theta_psi: Fraction | str | None = None


@dataclass(frozen=True)
class MorseModel:
    dim: int
    rank: int
    points: tuple[CriticalPoint, ...]
    incidence: tuple[Mat, ...]  # index i -> i+1, integer entries
    geometry: Geometry = field(default_factory=Geometry)
    d_override: int | None = None

    def __init__(self, dim: int, rank: int, points: Sequence[CriticalPoint],
                 incidence: Mapping[int, Mat] | Sequence[Mat],
                 geometry: Geometry | None = None,
                 d_override: int | None = None):
        if dim < 0:
            raise InputError("manifold dimension must be nonnegative")
        if rank < 1:
            raise InputError("bundle rank must be positive")
        points = tuple(points)
        for p in points:
            if not 0 <= p.index <= dim:
                raise InputError(f"point {p.ident} has index {p.index} outside [0, {dim}]")
        counts = [sum(1 for p in points if p.index == i) for i in range(dim + 1)]
        if isinstance(incidence, Mapping):
            given = {int(k): v for k, v in incidence.items()}
        else:
            given = dict(enumerate(incidence))
        mats = []
        for i in range(dim):
            m = given.get(i)
            if m is None:
                m = Mat.zeros(counts[i + 1], counts[i])
            if (m.rows, m.cols) != (counts[i + 1], counts[i]):
                raise InputError(
                    f"incidence matrix {i} has shape {m.rows}x{m.cols}, expected "
                    f"{counts[i + 1]}x{counts[i]}")
            for row in m.data:
                for e in row:
                    if Fraction(e).denominator != 1:
                        raise InputError("incidence counts must be integers")
            mats.append(m.map(Fraction))
        if d_override is not None and d_override < 1:
            raise InputError("d_override must be a positive integer")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "incidence", tuple(mats))
        object.__setattr__(self, "geometry", geometry or Geometry())
        object.__setattr__(self, "d_override", d_override)

    def points_of_index(self, i: int) -> list[CriticalPoint]:
        return [p for p in self.points if p.index == i]

    def shifted_values(self, c: Fraction) -> "MorseModel":
        pts = [CriticalPoint(p.ident, p.index, p.value + c) for p in self.points]
        return MorseModel(self.dim, self.rank, pts, dict(enumerate(self.incidence)),
                          self.geometry, self.d_override)

    def with_d_override(self, d: int | None) -> "MorseModel":
        return MorseModel(self.dim, self.rank, self.points,
                          dict(enumerate(self.incidence)), self.geometry, d)


@dataclass(frozen=True)
class RationalSetup:
    """Critical values written as p_i / d with integer weights, plus the
    window integers: m/d strictly above all values, (m-k)/d strictly below."""

    d: int
    weights: tuple[int, ...]  # aligned with model.points
    m: int
    k: int


def rational_setup(mm: MorseModel) -> RationalSetup:
    if not mm.points:
        raise InputError("a model needs at least one critical point")
    minimal = 1
    for p in mm.points:
        minimal = minimal * p.value.denominator // math.gcd(minimal, p.value.denominator)
    d = mm.d_override if mm.d_override is not None else minimal
    weights = []
    for p in mm.points:
        w = p.value * d
        if w.denominator != 1:
            raise InputError(
                f"d_override={d} does not clear the denominator of {p.ident}")
        weights.append(int(w))
    m = max(weights) + 1
    k = m - min(weights) + 1
    return RationalSetup(d, tuple(weights), m, k)


def _kron_identity(m: Mat, r: int) -> Mat:
    """m (x) I_r, the incidence acting on rank-r blocks."""
    out = [[Fraction(0)] * (m.cols * r) for _ in range(m.rows * r)]
    for i in range(m.rows):
        for j in range(m.cols):
            e = m.data[i][j]
            if e:
                for a in range(r):
                    out[i * r + a][j * r + a] = e
    return Mat(m.rows * r, m.cols * r, out)


def thom_smale_complex(mm: MorseModel) -> GradedComplex:
    """The based cochain complex generated by the critical points, graded by
    index, with orthonormal Gram matrices."""
    dims = [len(mm.points_of_index(i)) * mm.rank for i in range(mm.dim + 1)]
    bnds = [_kron_identity(mm.incidence[i], mm.rank) for i in range(mm.dim)]
    c = GradedComplex(dims, bnds)
    complexes.validate(c)
    return c


def witten_filtration(mm: MorseModel) -> FilteredComplex:
    """Filtration by critical value: level j spans the generators at points
    with weight >= m - j."""
    setup = rational_setup(mm)
    base = thom_smale_complex(mm)
    levels = []
    for i in range(mm.dim + 1):
        pts = mm.points_of_index(i)
        weights = [setup.weights[mm.points.index(p)] for p in pts]
        chain = []
        for j in range(1, setup.k + 1):
            cols = []
            for pos, w in enumerate(weights):
                if w >= setup.m - j:
                    cols.extend(range(pos * mm.rank, (pos + 1) * mm.rank))
            basis = Mat(base.dims[i], len(cols),
                        [[Fraction(1) if r == c else Fraction(0) for c in cols]
                         for r in range(base.dims[i])])
            chain.append(basis)
        levels.append(tuple(chain))
    fc = FilteredComplex(base, levels)
    try:
        filtration.validate_filtration(fc)
    except FiltrationError as exc:
        raise FiltrationError(
            f"filtration incompatible: incidence connects points against the "
            f"value order ({exc})") from exc
    return fc


def witten_deformation(mm: MorseModel) -> DeformedComplex:
    """The polynomial deformation in tau = exp(-t/d) equivalent to the
    metric family exp(-2tf) g on the based complex."""
    return filtration.rees_deformation(witten_filtration(mm))


def milnor_asymptotics(mm: MorseModel) -> tuple[LogValue, Fraction]:
    """(alpha, beta) with log rho(t) = alpha + beta t + o(1) as t -> +inf,
    computed through the spectral sequence and cross-checked against the
    direct pseudo-determinant route."""
    setup = rational_setup(mm)
    wd = witten_deformation(mm)
    via_ss = deformation.farber_expansion(wd)
    via_direct = deformation.direct_asymptotics(wd)
    if via_ss.constant != via_direct.constant or via_ss.slope != via_direct.slope:
        raise InternalConsistencyError(
            "spectral-sequence and direct asymptotics disagree on the "
            "deformed based complex")
    alpha = via_ss.constant
    beta = -via_ss.slope / setup.d
    return alpha, beta


def euler_chars(mm: MorseModel) -> tuple[int, int, Fraction]:
    """(chi, chi', supertrace of f over the critical points)."""
    coh = complexes.cohomology(thom_smale_complex(mm))
    chi = sum((-1) ** i * h for i, h in enumerate(coh.dims))
    chi_prime = sum((-1) ** i * i * h for i, h in enumerate(coh.dims))
    tr = sum(((-1) ** p.index) * p.value for p in mm.points)
    return chi, chi_prime, Fraction(tr)


def _resolve_geometry(mm: MorseModel) -> tuple[Fraction, Fraction, tuple[str, ...]]:
    fired = []
    fe = mm.geometry.integral_f_euler
    if fe == ZERO_ODD_DIM or fe is None:
        if mm.dim % 2 == 1:
            if fe is None:
                fired.append("integral_f_euler=0 (odd dimension)")
            f_euler = Fraction(0)
        elif fe is None:
            raise GeometryRequiredError(
                "geometry required: integral of f against the Euler form "
                "(dimension is even, no vanishing default applies)")
        else:
            raise InputError("zero:odd-dim asserted but the dimension is even")
    else:
        f_euler = Fraction(fe)
    tp = mm.geometry.integral_theta_psi
    if tp == ZERO_FLAT_METRIC:
        theta_psi = Fraction(0)
        fired.append("integral_theta_psi=0 (flat metric asserted)")
    elif tp is None:
        raise GeometryRequiredError(
            "geometry required: transgression integral (no flat-metric "
            "assertion given)")
    else:
        theta_psi = Fraction(tp)
    return f_euler, theta_psi, tuple(fired)


@dataclass(frozen=True)
class WittenReport:
    d: int
    m: int
    k: int
    alpha: LogValue
    beta: Fraction
    chi: int
    chi_prime: int
    supertrace_f: Fraction
    b: Fraction
    a0_log: LogValue          # alpha
    a0_correction: Fraction   # -(1/2) * integral_theta_psi
    a1: Fraction
    a1_geometric: Fraction    # -rank * integral_f_euler
    defaults_fired: tuple[str, ...]
    cohomology_dims: tuple[int, ...]
    ss: SpectralSequenceReport

    def a0_float(self) -> float:
        return self.a0_log.to_float() + float(self.a0_correction)


def witten_report(mm: MorseModel) -> WittenReport:
    """Assemble every coefficient of the large-t expansion
    a_0 + a_1 t + b log(t/pi) + o(1)."""
    setup = rational_setup(mm)
    f_euler, theta_psi, fired = _resolve_geometry(mm)
    alpha, beta = milnor_asymptotics(mm)
    chi, chi_prime, tr = euler_chars(mm)
    b = Fraction(mm.dim, 4) * chi - Fraction(1, 2) * chi_prime
    if (2 * b).denominator != 1:
        raise InternalConsistencyError(f"b = {b} is not a half-integer")
    if (beta * setup.d).denominator != 1:
        raise InternalConsistencyError(f"beta*d = {beta * setup.d} is not an integer")
    a1_geom = -mm.rank * f_euler
    a1 = a1_geom + beta + mm.rank * tr
    coh = complexes.cohomology(thom_smale_complex(mm))
    return WittenReport(
        d=setup.d, m=setup.m, k=setup.k,
        alpha=alpha, beta=beta,
        chi=chi, chi_prime=chi_prime, supertrace_f=tr,
        b=b,
        a0_log=alpha, a0_correction=-Fraction(1, 2) * theta_psi,
        a1=a1, a1_geometric=a1_geom,
        defaults_fired=fired,
        cohomology_dims=coh.dims,
        ss=deformation.ss_report(witten_deformation(mm)),
    )


def milnor_torsion_at(mm: MorseModel, tau0: Fraction) -> TorsionValue:
    """Exact torsion of the based complex under the metric that weighs the
    generator at x by tau0^(2 * weight(x)); equals the torsion of the tau
    deformation specialized at tau0."""
    tau0 = Fraction(tau0)
    if not 0 < tau0 <= 1:
        raise ValueError("tau0 must lie in (0, 1]")
    setup = rational_setup(mm)
    base = thom_smale_complex(mm)
    grams = []
    for i in range(mm.dim + 1):
        diag = []
        for p in mm.points_of_index(i):
            w = setup.weights[mm.points.index(p)]
            diag.extend([tau0 ** (2 * w)] * mm.rank)
        grams.append(Mat.diag(diag))
    weighted = complexes.torsion(base.with_grams(grams))
    if tau0 != 1:
        other = deformation.torsion_at(witten_deformation(mm), tau0)
        if other.rho_squared != weighted.rho_squared:
            raise InternalConsistencyError(
                f"weighted-metric torsion {weighted.rho_squared} != deformed "
                f"boundary torsion {other.rho_squared} at tau = {tau0}")
    return weighted


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: str


@dataclass(frozen=True)
class SelfIndexingReport:
    is_self_indexing: bool
    checks: tuple[CheckResult, ...]
    sind_lhs: Fraction | None = None
    sind_rhs: Fraction | None = None
    rho_ss_squared: Fraction | None = None
    rho_milnor_squared: Fraction | None = None

    def all_passed(self) -> bool:
        return self.is_self_indexing and all(c.passed for c in self.checks)


def selfindexing_check(mm: MorseModel) -> SelfIndexingReport:
    """For models with f(x) = index(x): the spectral sequence must
    degenerate at page 2 with the known page dimensions, the slope sum must
    collapse to rank * supertrace - chi', and the spectral-sequence torsion
    must equal the undeformed torsion."""
    if any(p.value != p.index for p in mm.points):
        return SelfIndexingReport(False, ())
    model = mm.with_d_override(None)  # the minimal d = 1
    setup = rational_setup(model)
    fc = witten_filtration(model)
    pages = filtration.filtration_ss(fc)
    coh = complexes.cohomology(thom_smale_complex(model))
    chi, chi_prime, tr = euler_chars(model)
    checks = []

    def paper_bigrading(page) -> dict[tuple[int, int], int]:
        return {(setup.m - level, (level + q) - (setup.m - level)): n
                for (level, q), n in page.dims.items()}

    expect_e1 = {(p, 0): len(model.points_of_index(p)) * model.rank
                 for p in range(model.dim + 1) if model.points_of_index(p)}
    got_e1 = paper_bigrading(pages[1])
    checks.append(CheckResult(
        "page-1 dims", got_e1 == expect_e1,
        f"got {sorted(got_e1.items())}, expected {sorted(expect_e1.items())}"))

    expect_e2 = {(p, 0): h for p, h in enumerate(coh.dims) if h}
    got_e2 = paper_bigrading(pages[2])
    checks.append(CheckResult(
        "page-2 dims", got_e2 == expect_e2,
        f"got {sorted(got_e2.items())}, expected {sorted(expect_e2.items())}"))

    stable = paper_bigrading(pages[-1])
    checks.append(CheckResult(
        "degeneration at page 2", stable == got_e2,
        f"limit {sorted(stable.items())} vs page 2 {sorted(got_e2.items())}"))

    lhs = Fraction(0)
    for r in range(1, len(pages)):
        cur = pages[r]
        nxt = pages[r + 1] if r + 1 < len(pages) else pages[-1]
        for key in set(cur.dims) | set(nxt.dims):
            level, q = key
            i = level + q
            sign = 1 if i % 2 == 0 else -1
            lhs += sign * i * r * (cur.dims.get(key, 0) - nxt.dims.get(key, 0))
    rhs = model.rank * tr - chi_prime
    checks.append(CheckResult("slope identity", lhs == rhs,
                              f"lhs {lhs}, rhs {rhs}"))

    rho_ss = deformation.ss_torsion(witten_deformation(model))
    rho_mil = milnor_torsion_at(model, Fraction(1))
    checks.append(CheckResult(
        "ss torsion equals undeformed torsion",
        rho_ss.rho_squared == rho_mil.rho_squared,
        f"rho_ss^2 {rho_ss.rho_squared}, rho_M^2 {rho_mil.rho_squared}"))

    _, beta = milnor_asymptotics(model)
    checks.append(CheckResult(
        "a1 collapse", beta + model.rank * tr == chi_prime,
        f"beta + rank*supertrace = {beta + model.rank * tr}, chi' = {chi_prime}"))

    return SelfIndexingReport(True, tuple(checks), lhs, rhs,
                              rho_ss.rho_squared, rho_mil.rho_squared)
