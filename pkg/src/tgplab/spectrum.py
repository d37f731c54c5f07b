"""Spectral decomposition of the squared-exponential kernel under Gaussian design.

With covariate density rho(x) = sqrt(2b/pi) exp(-2 b x^2) and kernel
K(x, x') = exp(-a^2 (x - x')^2), the Mercer eigenpairs are

    lambda_j = sqrt(2b / (b + a^2 + c)) * r^(j-1),   r = a^2 / (b + a^2 + c)
    phi_j(x) = (c/b)^{1/4} exp(-(c-b) x^2) H_{j-1}(sqrt(2c) x) / sqrt(2^{j-1} (j-1)!)

where c = sqrt(b^2 + 2 b a^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hermite import normalized_hermite_series, normalized_hermite_table

__all__ = [
    "KernelSpec",
    "default_supnorm_grid",
    "SpectralBasis",
    "asymptotic_ratio",
    "eigen_expansion",
    "eigen_identity_residual",
    "eigenfunction",
    "eigenfunction_matrix",
    "eigenvalue",
    "eigenvalue_asymptotic",
    "eigenvalue_table",
    "empirical_supnorm",
    "inner_product_rho",
    "kernel_exact",
    "kl_sample",
    "log_eigenvalue",
    "make_basis",
    "mercer_truncated",
    "natural_scale",
    "rho_density",
    "supnorm_bound",
    "tail_complete_k",
]


@dataclass(frozen=True)
class KernelSpec:
    """Squared-exponential kernel exp(-a^2 (x-x')^2) with Gaussian design parameter b."""

    a: float
    b: float = 0.25
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "sigma2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def c(self):
        return math.sqrt(self.b**2 + 2.0 * self.b * self.a**2)

    @property
    def _denom(self):
        return self.b + self.a**2 + self.c

    @property
    def decay_ratio(self):
        """Geometric ratio lambda_{j+1} / lambda_j."""
        return self.a**2 / self._denom

    @property
    def log_decay_ratio(self):
        # log(a^2) - log(denominator); avoids 1 - tiny cancellation for large a
        return 2.0 * math.log(self.a) - math.log(self._denom)

    @property
    def log_lambda1(self):
        return 0.5 * (math.log(2.0 * self.b) - math.log(self._denom))


def _check_index(j):
    j = np.asarray(j)
    if np.any(j < 1) or np.any(np.asarray(j, dtype=float) != np.floor(j)):
        raise ValueError("eigen-index j must be an integer >= 1")
    return j


def log_eigenvalue(spec, j):
    j = _check_index(j)
    out = spec.log_lambda1 + (j - 1) * spec.log_decay_ratio
    return float(out) if np.ndim(out) == 0 else out


def eigenvalue(spec, j):
    """Mercer eigenvalue lambda_j (j >= 1); may underflow to 0 for huge j."""
    return np.exp(log_eigenvalue(spec, j))


def eigenvalue_asymptotic(spec, j):
    """The comparison sequence exp(-j/a) / a."""
    j = _check_index(j)
    return np.exp(-j / spec.a) / spec.a


def asymptotic_ratio(spec, j):
    """lambda_j / (exp(-j/a) / a), computed in log space."""
    j = _check_index(j)
    return np.exp(log_eigenvalue(spec, j) + j / spec.a + math.log(spec.a))


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """The first k eigenpairs of a KernelSpec (eigenvalues stored as logs)."""

    spec: KernelSpec
    k: int
    log_lambda: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"truncation level k must be an integer >= 1, got {self.k!r}")
        if np.shape(self.log_lambda) != (self.k,):
            raise ValueError("log_lambda must have length k")

    @property
    def lambdas(self):
        return np.exp(self.log_lambda)

    @property
    def prior_variances(self):
        """sigma^2 lambda_j, the prior variances of the KL coefficients."""
        return self.spec.sigma2 * self.lambdas

    def design_matrix(self, x):
        return eigenfunction_matrix(self.spec, self.k, x)


def make_basis(spec, k):
    """Truncate the eigen-expansion of ``spec`` at level ``k``."""
    if int(k) != k or k < 1:
        raise ValueError(f"truncation level k must be an integer >= 1, got {k!r}")
    log_lambda = log_eigenvalue(spec, np.arange(1, int(k) + 1))
    log_lambda.setflags(write=False)
    return SpectralBasis(spec=spec, k=int(k), log_lambda=log_lambda)


def _log_envelope(spec, x):
    return 0.25 * math.log(spec.c / spec.b) - (spec.c - spec.b) * np.asarray(x, dtype=float) ** 2


def eigenfunction_matrix(spec, k, x):
    """phi_1..phi_k evaluated at x; shape ``np.shape(x) + (k,)``.

    The Gaussian envelope rides inside the normalized Hermite recurrence, so
    no 2^j j! factor is ever formed.
    """
    x = np.asarray(x, dtype=float)
    return normalized_hermite_table(math.sqrt(2.0 * spec.c) * x, int(k) - 1, _log_envelope(spec, x))


def eigenfunction(spec, j, x):
    """Single eigenfunction phi_j(x), j >= 1."""
    _check_index(j)
    out = eigenfunction_matrix(spec, int(j), x)[..., -1]
    return out[()] if out.ndim == 0 else out


def eigen_expansion(spec, coeffs, x):
    """sum_j coeffs[j-1] phi_j(x), streamed so long expansions stay cheap in memory."""
    x = np.asarray(x, dtype=float)
    out = normalized_hermite_series(math.sqrt(2.0 * spec.c) * x, coeffs, _log_envelope(spec, x))
    return out[()] if out.ndim == 0 else out


def kernel_exact(spec, x, x2):
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.exp(-spec.a**2 * (x - x2) ** 2)


def mercer_truncated(basis, x, x2):
    """sum_{j<=k} lambda_j phi_j(x) phi_j(x2)."""
    p1 = basis.design_matrix(x)
    p2 = basis.design_matrix(x2)
    return np.sum(basis.lambdas * p1 * p2, axis=-1)


def tail_complete_k(spec, tol):
    """Smallest k with sum_{j>k} lambda_j < tol (closed-form geometric tail)."""
    r = spec.decay_ratio
    # lambda_1 r^k / (1 - r) < tol
    k = (math.log(tol) + math.log1p(-r) - spec.log_lambda1) / spec.log_decay_ratio
    return max(1, int(math.floor(k)) + 1)


def kl_sample(basis, rng, size=None):
    """Draw KL coefficients theta_j ~ N(0, sigma^2 lambda_j).

    ``size`` prepends extra batch dimensions.
    """
    shape = (basis.k,) if size is None else tuple(np.atleast_1d(size)) + (basis.k,)
    return rng.standard_normal(shape) * np.sqrt(basis.prior_variances)


def supnorm_bound(spec, k):
    """Sup-norm envelope a^{1/4} exp(b k / a) for the leading k eigenfunctions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return spec.a**0.25 * math.exp(spec.b * k / spec.a)


def default_supnorm_grid(spec, k, points=4001):
    """Symmetric uniform grid on [-X, X] with X^2 = max(1, (60+k) max(1, 1/(c-b))).

    Past X the envelope exp(-(c-b) x^2) is below exp(-(60+k)), which beats
    the polynomial growth |H_{j-1}(sqrt(2c) x)| / sqrt(2^{j-1}(j-1)!) of every
    j <= k by many orders of magnitude, so the supremum is attained inside.
    """
    half = math.sqrt(max(1.0, (60.0 + k) * max(1.0, 1.0 / (spec.c - spec.b))))
    return np.linspace(-half, half, points)


def empirical_supnorm(spec, k, grid=None):
    """max_{j<=k} max_{x in grid} |phi_j(x)|."""
    if grid is None:
        grid = default_supnorm_grid(spec, k)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    return float(np.max(np.abs(eigenfunction_matrix(spec, k, grid))))


def rho_density(b, x):
    if b <= 0:
        raise ValueError("b must be positive")
    x = np.asarray(x, dtype=float)
    return math.sqrt(2.0 * b / math.pi) * np.exp(-2.0 * b * x**2)


def inner_product_rho(g1, g2, b, quad, scale=None):
    """<g1, g2> in L^2(rho) by Gauss-Hermite quadrature.

    By default the substitution u = sqrt(2b) x makes rho exactly the
    quadrature weight, giving (1/sqrt(pi)) sum_m w_m g1(x_m) g2(x_m).

    ``scale`` selects a different substitution u = scale * x. Use it when the
    integrand oscillates on a finer scale than rho (eigenfunctions with large
    a live on u = sqrt(2c) x). The density is then carried explicitly
    against exp(u^2)-rescaled weights, which stay finite because they are
    formed in log space.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    if scale is None:
        x = quad.nodes / math.sqrt(2.0 * b)
        return float(np.dot(quad.weights, g1(x) * g2(x)) / math.sqrt(math.pi))
    x = quad.nodes / scale
    vals = g1(x) * g2(x)
    # rho(x) e^{u^2} / scale, in logs
    log_factor = 0.5 * math.log(2.0 * b / math.pi) - 2.0 * b * x**2 + quad.log_weights + quad.nodes**2 - math.log(scale)
    return float(np.sum(vals * np.exp(log_factor)))


def natural_scale(spec):
    """The substitution scale sqrt(2c) under which phi_i phi_j rho is Gaussian-weighted."""
    return math.sqrt(2.0 * spec.c)


def eigen_identity_residual(spec, j, x, quad):
    """|int K(x, x') phi_j(x') rho(x') dx' - lambda_j phi_j(x)|."""
    if quad.order < 200:
        raise ValueError("eigen_identity_residual needs a quadrature order >= 200")
    j = int(j)
    lhs = inner_product_rho(
        lambda t: kernel_exact(spec, x, t),
        lambda t: eigenfunction(spec, j, t),
        spec.b,
        quad,
        scale=natural_scale(spec),
    )
    return abs(lhs - eigenvalue(spec, j) * eigenfunction(spec, j, x))


def eigenvalue_table(a_values, j_max, b=0.25):
    """Rows (a, j, lambda_j) for the eigenvalue-decay figure."""
    rows = []
    for a in a_values:
        spec = KernelSpec(a=float(a), b=b)
        lam = eigenvalue(spec, np.arange(1, j_max + 1))
        rows.extend({"a": float(a), "j": int(j), "lambda": float(v)} for j, v in zip(range(1, j_max + 1), lam))
    return rows
