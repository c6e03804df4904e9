"""Floating-point cross-validation of the exact pipeline.

Deliberately independent machinery: a hand-rolled cyclic Jacobi eigensolver
and a plain least-squares line fit.  Exact results are converted to floats
only at the comparison boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import complexes
from .complexes import GradedComplex
from .deformation import DeformedComplex, farber_expansion, torsion_at
from .errors import ConvergenceError, InternalConsistencyError, ShapeError, SpectralGapError

MAX_SWEEPS = 100


def sym_eig(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    sorted ascending.  Stops once the off-diagonal norm drops below
    1e-12 relative to the trace scale."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"sym_eig needs a square matrix, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-12 * scale:
        raise ShapeError("sym_eig input is not symmetric to 1e-12")
    trace_scale = max(1.0, float(np.abs(np.diag(a)).sum()))
    trace_before = float(np.trace(a))

    for _ in range(MAX_SWEEPS):
        off = math.sqrt(float((a ** 2).sum() - (np.diag(a) ** 2).sum()))
        if off < 1e-12 * trace_scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    else:
        raise ConvergenceError(f"Jacobi sweep limit ({MAX_SWEEPS}) exceeded")

    eigs = np.sort(np.diag(a))
    if abs(float(eigs.sum()) - trace_before) > 1e-9 * max(1.0, abs(trace_before)):
        raise InternalConsistencyError("eigenvalue sum drifted from the trace")
    return eigs


def _cholesky(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    low = np.zeros_like(g)
    for i in range(n):
        for j in range(i + 1):
            acc = g[i, j] - float(low[i, :j] @ low[j, :j])
            if i == j:
                if acc <= 0:
                    raise ShapeError("Gram matrix is not positive definite")
                low[i, i] = math.sqrt(acc)
            else:
                low[i, j] = acc / low[j, j]
    return low


def _solve_lower(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve low @ x = rhs columnwise by forward substitution."""
    n = low.shape[0]
    x = np.zeros_like(rhs)
    for i in range(n):
        x[i] = (rhs[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x


def _orthonormalized_boundaries(c: GradedComplex) -> list[np.ndarray]:
    """Boundary matrices rewritten in orthonormal frames of the Gram metrics."""
    chols = [_cholesky(np.array([[float(e) for e in row] for row in g.data])
                       .reshape(g.rows, g.cols)) if g.rows else np.zeros((0, 0))
             for g in c.grams]
    out = []
    for i, d in enumerate(c.boundaries):
        dm = np.array([[float(e) for e in row] for row in d.data]).reshape(d.rows, d.cols)
        # B = L_{i+1}^T D L_i^{-T}
        li = chols[i]
        lo = chols[i + 1]
        if d.cols:
            dm = _solve_lower(li, dm.T).T
        if d.rows:
            dm = lo.T @ dm
        out.append(dm)
    return out


def numeric_torsion(c: GradedComplex, zero_threshold: float = 1e-8) -> float:
    """Float log(rho) through the Jacobi eigensolver.

    Zero modes are the eigenvalues below zero_threshold relative to the
    largest eigenvalue of the whole complex; the classification is verified
    against the exact cohomology dimensions and against a factor-1000
    spectral gap."""
    bnds = _orthonormalized_boundaries(c)
    spectra = []
    for i in range(c.top_degree + 1):
        n = c.dims[i]
        lap = np.zeros((n, n))
        if i < c.top_degree:
            lap += bnds[i].T @ bnds[i]
        if i > 0:
            lap += bnds[i - 1] @ bnds[i - 1].T
        spectra.append(sym_eig(lap))
    lam_max = max((float(s[-1]) for s in spectra if s.size), default=0.0)
    if lam_max == 0.0:
        return 0.0
    cut = zero_threshold * lam_max
    below = [x for s in spectra for x in s if x < cut]
    above = [x for s in spectra for x in s if x >= cut]
    if below and above:
        worst_zero = max(below)
        best_nonzero = min(above)
        if worst_zero > 0 and best_nonzero < 1e3 * worst_zero:
            raise SpectralGapError(
                f"spectral gap too small: {worst_zero:.3e} vs {best_nonzero:.3e} "
                f"around threshold {cut:.3e}")
    exact_dims = complexes.cohomology(c).dims
    for i, s in enumerate(spectra):
        n_zero = int((s < cut).sum())
        if n_zero != exact_dims[i]:
            raise SpectralGapError(
                f"zero-mode count {n_zero} in degree {i} does not match the "
                f"exact cohomology dimension {exact_dims[i]}")
    log_rho = 0.0
    for i, s in enumerate(spectra):
        sign = 1 if i % 2 == 0 else -1
        log_rho += 0.5 * sign * i * sum(math.log(float(x)) for x in s if x >= cut)
    return log_rho


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float
    sample_points: tuple[tuple[Fraction, float], ...]


def fit_expansion(d: DeformedComplex, samples: Sequence[Fraction]) -> FitResult:
    """Least-squares line of exact log rho(t) against log t.

    The torsion at each sample is computed exactly and converted to float
    only for the regression, so the residuals measure the o(1) tail alone.
    """
    samples = [Fraction(s) for s in samples]
    if len(samples) < 3:
        raise ValueError("need at least 3 sample points")
    if any(not 0 < s < 1 for s in samples):
        raise ValueError("samples must lie in (0, 1)")
    xs = [math.log(float(s)) for s in samples]
    ys = [torsion_at(d, s).log_float() for s in samples]
    n = float(len(xs))
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    denom = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / denom
    intercept = (sy - slope * sx) / n
    residuals = [abs(y - (intercept + slope * x)) for x, y in zip(xs, ys)]
    return FitResult(slope, intercept, max(residuals),
                     tuple(zip(samples, ys)))


def default_sample_grid(n: int = 4) -> list[Fraction]:
    """Geometric grid 10^-1, 10^-2, ..., 10^-n."""
    return [Fraction(1, 10 ** j) for j in range(1, n + 1)]


def compare_fit(d: DeformedComplex, samples: Sequence[Fraction] | None = None,
                tol_slope: float = 0.05, tol_intercept: float = 1e-2):
    """Fit the sampled torsion line and compare against the exact expansion.
    Returns (fit, exact expansion, slope_ok, intercept_ok)."""
    if samples is None:
        samples = default_sample_grid()
    fit = fit_expansion(d, samples)
    exact = farber_expansion(d)
    slope_ok = (abs(fit.slope - float(exact.slope)) <= tol_slope
                and round(fit.slope) == exact.slope)
    intercept_ok = abs(fit.intercept - exact.constant.to_float()) <= tol_intercept
    return fit, exact, slope_ok, intercept_ok
