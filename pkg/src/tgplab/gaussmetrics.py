"""Wasserstein-2 distances between Gaussians, matrix norms and chi-square tails."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianMeasure",
    "MatrixNorms",
    "chi2_tail",
    "empirical_w2_1d",
    "matrix_norms",
    "matrix_sqrt_psd",
    "regularized_gamma_q",
    "w2_commuting",
]

SYMMETRY_TOL = 1e-12
PSD_CLAMP = 1e-10
PSD_REJECT = 1e-8
COMMUTE_TOL = 1e-8


def _symmetric_part(m, tol):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (m + m.T)


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    """N_d(mean, cov) with cov symmetric PSD; tiny negative eigenvalues are clamped to 0."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = _symmetric_part(self.cov, SYMMETRY_TOL)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov must be d x d for a mean of length d")
        evals, evecs = np.linalg.eigh(cov)
        top = max(float(np.max(np.abs(evals), initial=0.0)), 1.0)
        if evals.size and evals.min() < -PSD_CLAMP * top:
            raise ValueError(f"covariance is not PSD (min eigenvalue {evals.min():.3g})")
        if evals.size and evals.min() < 0:
            cov = (evecs * np.clip(evals, 0.0, None)) @ evecs.T
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size


def matrix_sqrt_psd(m):
    """Unique PSD square root via a symmetric eigendecomposition."""
    m = _symmetric_part(m, 1e-10)
    evals, evecs = np.linalg.eigh(m)
    top = max(float(np.max(np.abs(evals), initial=0.0)), 1.0)
    if evals.size and evals.min() < -PSD_REJECT * top:
        raise ValueError(f"matrix is not PSD (min eigenvalue {evals.min():.3g})")
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return 0.5 * (root + root.T)


def w2_commuting(p, q):
    """W2 distance between Gaussians whose covariances commute.

    sqrt(||mu_1 - mu_2||^2 + ||Sigma_1^{1/2} - Sigma_2^{1/2}||_F^2). The
    general (non-commuting) case is refused rather than approximated.
    """
    if p.dim != q.dim:
        raise ValueError("measures live in different dimensions")
    s1, s2 = p.cov, q.cov
    scale = max(1.0, np.linalg.norm(s1) * np.linalg.norm(s2))
    if np.linalg.norm(s1 @ s2 - s2 @ s1) > COMMUTE_TOL * scale:
        raise ValueError("covariances do not commute; the closed form does not apply")
    mean_sq = float(np.sum((p.mean - q.mean) ** 2))
    root_sq = float(np.sum((matrix_sqrt_psd(s1) - matrix_sqrt_psd(s2)) ** 2))
    return math.sqrt(mean_sq + root_sq)


def empirical_w2_1d(samples_p, samples_q):
    """Comonotone (sorted) coupling estimate of W2 between two 1-D samples."""
    a = np.sort(np.ravel(samples_p))
    b = np.sort(np.ravel(samples_q))
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be non-empty")
    if a.size != b.size:
        raise ValueError("samples must have equal sizes")
    return float(math.sqrt(np.mean((a - b) ** 2)))


def _gamma_p_series(s, x):
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gamma_q_continued_fraction(s, x):
    # modified Lentz evaluation of the Legendre continued fraction
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h


def regularized_gamma_q(s, x):
    """Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s)."""
    if s <= 0:
        raise ValueError("shape must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(s, x))
    return _gamma_q_continued_fraction(s, x)


def chi2_tail(k, t):
    """P(chi^2_k > t)."""
    if k < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if t < 0:
        raise ValueError("t must be non-negative")
    return regularized_gamma_q(0.5 * k, 0.5 * t)


@dataclass(frozen=True)
class MatrixNorms:
    frobenius: float
    operator: float
    smin: float
    cond: float


def matrix_norms(m):
    """Frobenius and operator norms, smallest non-zero singular value, condition number."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    s = np.linalg.svd(m, compute_uv=False)
    s_max = float(s.max(initial=0.0))
    nonzero = s[s > s_max * max(m.shape) * np.finfo(float).eps] if s_max > 0 else s[:0]
    s_min = float(nonzero.min()) if nonzero.size else 0.0
    cond = s_max / s_min if s_min > 0 else math.inf
    return MatrixNorms(frobenius=float(np.linalg.norm(m)), operator=s_max, smin=s_min, cond=cond)
