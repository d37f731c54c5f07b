"""Truncated-GP regression in the Hermite eigenbasis.

Model: Y = Phi theta + eps with eps ~ N(0, sigma^2 I) and prior
theta ~ N(0, sigma^2 Lambda). The posterior is N(theta_tilde, Sigma_tilde) with

    theta_tilde = (Phi^T Phi + Lambda^{-1})^{-1} Phi^T Y
    Sigma_tilde = sigma^2 (Phi^T Phi + Lambda^{-1})^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConditioningError, DimensionError
from .spectrum import eigen_expansion

__all__ = [
    "DesignSample",
    "TgpPosterior",
    "TrueFunction",
    "build_design",
    "conjugate_posterior",
    "function_space_oracle",
    "l2rho_error",
    "make_true_function",
    "ols_estimate",
    "posterior",
    "posterior_sample",
    "predict",
    "rkhs_norm",
    "sample_covariates",
    "sobolev_norm",
    "whitened_posterior_covariance",
]


@dataclass(frozen=True, eq=False)
class DesignSample:
    """Covariates x (n,) and design matrix phi (n, k) with phi[i, j] = phi_{j+1}(x[i])."""

    x: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        n, k = np.shape(self.phi)
        if np.shape(self.x) != (n,):
            raise DimensionError("x must have one entry per design row")
        if n <= k:
            raise DimensionError(f"need more observations than basis functions (n={n}, k={k})")

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def k(self):
        return self.phi.shape[1]


@dataclass(frozen=True, eq=False)
class TrueFunction:
    """Regression truth f_0 = sum_j coeffs[j-1] phi_j with Sobolev smoothness alpha."""

    alpha: float
    coeffs: np.ndarray

    @property
    def J(self):
        return self.coeffs.size

    def head(self, k):
        """Leading coefficients theta_0^t (zero-padded if J < k)."""
        out = np.zeros(k)
        m = min(k, self.J)
        out[:m] = self.coeffs[:m]
        return out

    def tail_sq(self, k):
        """sum_{j>k} theta_{0j}^2, the squared L2(rho) truncation error."""
        return float(np.sum(self.coeffs[k:] ** 2))


@dataclass(frozen=True, eq=False)
class TgpPosterior:
    theta_tilde: np.ndarray
    sigma_tilde: np.ndarray

    @property
    def k(self):
        return self.theta_tilde.size


def sample_covariates(b, n, rng):
    """n i.i.d. draws from N(0, 1/(4b)), the Gaussian design density."""
    if b <= 0:
        raise ValueError("b must be positive")
    return rng.standard_normal(int(n)) / math.sqrt(4.0 * b)


def build_design(basis, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("x must be one-dimensional")
    if x.size <= basis.k:
        raise DimensionError(f"need more observations than basis functions (n={x.size}, k={basis.k})")
    return DesignSample(x=x, phi=basis.design_matrix(x))


def _spd_factor(a):
    """Cholesky factor of a, retrying once with jitter 1e-10 tr(a)/k."""
    try:
        return cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(a) / a.shape[0]
        try:
            return cho_factor(a + jitter * np.eye(a.shape[0]), lower=True)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"matrix not positive definite even with jitter {jitter:.3g}") from exc


def conjugate_posterior(phi, y, lambdas, sigma2):
    """Posterior of theta under Y ~ N(phi theta, sigma2 I), theta ~ N(0, sigma2 diag(lambdas))."""
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    if y.shape != (phi.shape[0],):
        raise DimensionError("y must have one entry per design row")
    if np.any(lambdas <= 0):
        raise ValueError("prior eigenvalues must be strictly positive")
    precision = phi.T @ phi
    precision[np.diag_indices_from(precision)] += 1.0 / lambdas
    factor = _spd_factor(precision)
    theta = cho_solve(factor, phi.T @ y)
    cov = sigma2 * cho_solve(factor, np.eye(lambdas.size))
    cov = 0.5 * (cov + cov.T)
    return TgpPosterior(theta_tilde=theta, sigma_tilde=cov)


def posterior(design, y, basis):
    if design.k != basis.k:
        raise DimensionError("design and basis disagree on k")
    return conjugate_posterior(design.phi, y, basis.lambdas, basis.spec.sigma2)


def ols_estimate(design, y):
    """Least-squares coefficients (Phi^T Phi)^{-1} Phi^T Y."""
    factor = _spd_factor(design.phi.T @ design.phi)
    return cho_solve(factor, design.phi.T @ np.asarray(y, dtype=float))


def posterior_sample(post, rng, size=None):
    """Draws from N(theta_tilde, Sigma_tilde); ``size`` adds leading batch dims."""
    chol = np.linalg.cholesky(post.sigma_tilde)
    shape = (post.k,) if size is None else tuple(np.atleast_1d(size)) + (post.k,)
    z = rng.standard_normal(shape)
    return post.theta_tilde + z @ chol.T


def predict(basis, theta, x):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (basis.k,):
        raise DimensionError("theta must have length k")
    return eigen_expansion(basis.spec, theta, x)


def l2rho_error(theta_hat, truth, k):
    """||f_hat - f_0||_{2,rho} for f_hat = sum_{j<=k} theta_hat_j phi_j, via Parseval.

    ``theta_hat`` may carry leading batch dimensions.
    """
    if truth.J < k:
        raise DimensionError("truth must have at least k coefficients")
    theta_hat = np.asarray(theta_hat, dtype=float)
    head = np.sum((theta_hat - truth.coeffs[:k]) ** 2, axis=-1)
    return np.sqrt(head + truth.tail_sq(k))


def rkhs_norm(theta0t, basis):
    """||Lambda^{-1/2} theta||, the RKHS norm of the truncated truth."""
    theta0t = np.asarray(theta0t, dtype=float)
    return float(math.sqrt(np.sum(theta0t**2 * np.exp(-basis.log_lambda[: theta0t.size]))))


def sobolev_norm(theta, alpha):
    theta = np.asarray(theta, dtype=float)
    j = np.arange(1, theta.size + 1, dtype=float)
    return float(math.sqrt(np.sum(j ** (2.0 * alpha) * theta**2)))


def make_true_function(alpha, J, mode="deterministic", rng=None):
    """Coefficients theta_{0j} = j^{-(alpha+1)}, optionally with random signs and scales.

    Both modes lie in the Sobolev class of order alpha because
    sum_j j^{2 alpha} j^{-2 alpha - 2} = sum_j j^{-2} converges.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    j = np.arange(1, int(J) + 1, dtype=float)
    coeffs = j ** -(alpha + 1.0)
    if mode == "random":
        if rng is None:
            raise ValueError("random mode needs an rng")
        signs = rng.choice([-1.0, 1.0], size=coeffs.size)
        coeffs = coeffs * signs * rng.uniform(0.5, 1.0, size=coeffs.size)
    elif mode != "deterministic":
        raise ValueError(f"unknown mode {mode!r}")
    coeffs.setflags(write=False)
    return TrueFunction(alpha=float(alpha), coeffs=coeffs)


def function_space_oracle(x_train, y, basis, x_test):
    """GP posterior mean with kernel sum_{j<=k} lambda_j phi_j phi_j and unit signal/noise ratio.

    Prior covariance sigma^2 K_t and noise sigma^2 I give
    m(x*) = k_t(x*)^T (K_t + I)^{-1} Y, which must coincide with
    Phi(x*) theta_tilde.
    """
    y = np.asarray(y, dtype=float)
    phi = basis.design_matrix(np.asarray(x_train, dtype=float))
    phi_star = basis.design_matrix(np.asarray(x_test, dtype=float))
    lam = basis.lambdas
    gram = (phi * lam) @ phi.T
    gram[np.diag_indices_from(gram)] += 1.0
    # LU rather than Cholesky keeps this route independent of the posterior solver
    alpha = np.linalg.solve(gram, y)
    return (phi_star * lam) @ (phi.T @ alpha)


def whitened_posterior_covariance(post, basis):
    """Lambda^{-1/2} (Sigma_tilde / sigma^2) Lambda^{-1/2}; dominated by I."""
    s = np.exp(-0.5 * basis.log_lambda)
    return (post.sigma_tilde / basis.spec.sigma2) * np.outer(s, s)

