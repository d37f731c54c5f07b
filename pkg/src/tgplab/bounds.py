"""Probability bounds paired with Monte Carlo estimators.

Each bound here has an estimator next to it so that "bound >= truth" can be
checked numerically: design-matrix concentration, Gaussian tail and small-ball
probabilities, and the Dirichlet simplex integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .gaussmetrics import chi2_tail
from .spectrum import tail_complete_k

__all__ = [
    "AnDiagnostics",
    "ProbabilityEstimate",
    "an_event_check",
    "an_failure_bound",
    "anderson_lower_bound",
    "dirichlet_integral_check",
    "matrix_bernstein_bound",
    "small_ball_mc",
    "t1n_bound_terms",
    "tail_truncation_level",
    "truncation_tail_bernstein",
    "truncation_tail_mc",
]


@dataclass(frozen=True)
class ProbabilityEstimate:
    mean: float
    stderr: float
    n_samples: int

    @classmethod
    def from_indicators(cls, hits):
        hits = np.asarray(hits, dtype=bool).ravel()
        if hits.size == 0:
            raise ValueError("need at least one indicator")
        p = float(hits.mean())
        return cls(mean=p, stderr=math.sqrt(p * (1.0 - p) / hits.size), n_samples=int(hits.size))


@dataclass(frozen=True)
class AnDiagnostics:
    """Spectral summary of the Gram matrix Phi^T Phi against n I."""

    holds: bool
    deviation: float
    op_norm: float
    smin: float
    cond: float
    trace_inv: float

    def event_consequences(self, n, k):
        """The four consequences of the event, as a dict of booleans."""
        return {
            "op_norm": self.op_norm <= 1.5 * n,
            "smin": self.smin >= 0.5 * n,
            "cond": self.cond <= 3.0,
            "trace_inv": self.trace_inv <= 2.0 * k / n,
        }


def an_event_check(design):
    """Check ||Phi^T Phi - n I||_2 < n/2 and report the related Gram-matrix quantities."""
    n, k = design.n, design.k
    gram = design.phi.T @ design.phi
    evals = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    deviation = float(np.max(np.abs(evals - n)))
    smin = max(float(evals[0]), 0.0)
    op = float(evals[-1])
    cond = op / smin if smin > 0 else math.inf
    trace_inv = float(np.sum(1.0 / evals)) if smin > 0 else math.inf
    return AnDiagnostics(
        holds=deviation < 0.5 * n,
        deviation=deviation,
        op_norm=op,
        smin=smin,
        cond=cond,
        trace_inv=trace_inv,
    )


def matrix_bernstein_bound(t, eta2, big_b, d):
    """min(1, d exp(-(t^2/2) / (eta2 + B t / 3)))."""
    if t <= 0 or eta2 <= 0 or big_b <= 0 or d < 1:
        raise ValueError("matrix Bernstein arguments must be positive")
    return min(1.0, d * math.exp(-(0.5 * t * t) / (eta2 + big_b * t / 3.0)))


def an_failure_bound(n, k, sup_norm):
    """Upper bound on P(||Phi^T Phi - n I||_2 >= n/2).

    Each summand x_i x_i^T - I (x_i the feature vector of one covariate) has
    operator norm at most 1 + k L^2 and the variance proxy of the sum is at
    most n (k L^2 + 1).
    """
    if n <= k:
        raise ValueError("need n > k")
    kl2 = k * sup_norm**2
    return matrix_bernstein_bound(t=0.5 * n, eta2=n * (kl2 + 1.0), big_b=1.0 + kl2, d=int(k))


def tail_truncation_level(spec, eps, rel_tol=1e-3):
    """Index J with sum_{j>J} lambda_j < rel_tol * eps^2."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return tail_complete_k(spec, rel_tol * eps * eps)


def truncation_tail_mc(lambdas_tail, sigma2, eps, trials, rng, batch=20000):
    """MC estimate of P(sum_j sigma2 lambda_j Z_j^2 > eps^2) for the listed eigenvalues.

    The caller truncates the infinite tail (see ``tail_truncation_level``).
    """
    lam = np.asarray(lambdas_tail, dtype=float) * sigma2
    if eps <= 0:
        return ProbabilityEstimate(mean=1.0, stderr=0.0, n_samples=int(trials))
    hits = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        z = rng.standard_normal((m, lam.size))
        hits += int(np.count_nonzero((z * z) @ lam > eps * eps))
        done += m
    p = hits / trials
    return ProbabilityEstimate(mean=p, stderr=math.sqrt(p * (1 - p) / trials), n_samples=int(trials))


def truncation_tail_bernstein(lambdas, eps, sub_exp_k=4.0, c_const=0.125):
    """Sub-exponential Bernstein bound on P(sum_j lambda_j Z_j^2 > eps^2).

    min(1, 2 exp(-c min(eps^4 / (K^2 sum lambda^2), eps^2 / (K max lambda)))).
    Centering removes sum lambda_j, so the bound is only claimed when that
    mean is at most eps^2 / 2; otherwise 1 is returned.
    """
    lam = np.asarray(lambdas, dtype=float)
    if eps <= 0:
        return 1.0
    if np.any(lam < 0) or sub_exp_k <= 0 or c_const <= 0:
        raise ValueError("eigenvalues and constants must be non-negative/positive")
    if lam.size == 0 or lam.max() == 0:
        return 0.0
    e2 = eps * eps
    if lam.sum() > 0.5 * e2:
        return 1.0
    expo = c_const * min(e2 * e2 / (sub_exp_k**2 * np.sum(lam**2)), e2 / (sub_exp_k * lam.max()))
    return min(1.0, 2.0 * math.exp(-expo))


def small_ball_mc(basis, theta0, eps, trials, rng, batch=20000):
    """MC estimate of P(||theta - theta0|| <= eps) under the truncated prior."""
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (basis.k,):
        raise ValueError("theta0 must have length k")
    if eps <= 0:
        return ProbabilityEstimate(mean=0.0, stderr=0.0, n_samples=int(trials))
    sd = np.sqrt(basis.prior_variances)
    hits = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        th = rng.standard_normal((m, basis.k)) * sd
        hits += int(np.count_nonzero(np.sum((th - theta0) ** 2, axis=1) <= eps * eps))
        done += m
    p = hits / trials
    return ProbabilityEstimate(mean=p, stderr=math.sqrt(p * (1 - p) / trials), n_samples=int(trials))


def anderson_lower_bound(basis, theta0, eps, centered_prob):
    """exp(-||theta0||_H^2 / 2) * centered_prob, with ||theta0||_H^2 = sum theta0^2 / (sigma^2 lambda).

    ``centered_prob`` should estimate P(||theta|| <= eps/2) for the centred prior.
    """
    del eps  # radius enters only through centered_prob
    theta0 = np.asarray(theta0, dtype=float)
    h2 = float(np.sum(theta0**2 / basis.prior_variances))
    return math.exp(-0.5 * h2) * float(centered_prob)


def dirichlet_integral_check(alphas, psi, mc_trials, rng):
    """Both sides of the simplex integral identity.

    LHS = int_{sum x <= 1} psi(sum x) prod x_j^{alpha_j - 1} dx by MC with
    uniform points on the simplex (first n coordinates of a flat Dirichlet in
    n+1 components), scaled by the simplex volume 1/n!.
    RHS = prod Gamma(alpha_j) / Gamma(sum alpha) * int_0^1 psi(t) t^{sum alpha - 1} dt.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas <= 0):
        raise ValueError("alphas must be a non-empty vector of positive reals")
    n = alphas.size
    x = rng.dirichlet(np.ones(n + 1), size=int(mc_trials))[:, :n]
    s = x.sum(axis=1)
    with np.errstate(divide="ignore"):
        logw = np.sum((alphas - 1.0) * np.log(x), axis=1)
    vals = np.asarray(psi(s), dtype=float) * np.exp(logw)
    vol = math.exp(-math.lgamma(n + 1.0))
    lhs = vol * float(vals.mean())
    lhs_se = vol * float(vals.std(ddof=1)) / math.sqrt(vals.size)
    total = float(alphas.sum())
    one_d, _ = integrate.quad(lambda t: psi(t) * t ** (total - 1.0), 0.0, 1.0)
    rhs = math.exp(float(np.sum(gammaln(alphas))) - math.lgamma(total)) * one_d
    return {"lhs_estimate": lhs, "lhs_stderr": lhs_se, "rhs_value": rhs}


def t1n_bound_terms(n, k, eps, m_const, w2_sq_estimate, an_fail):
    """4 W2^2 / (M^2 eps^2) + P(chi^2_k > M^2 n eps^2 / 4) + P(A_n^c)."""
    if min(n, k, eps, m_const) <= 0 or w2_sq_estimate < 0 or an_fail < 0:
        raise ValueError("arguments must be non-negative (n, k, eps, M positive)")
    m2e2 = m_const**2 * eps**2
    return 4.0 * w2_sq_estimate / m2e2 + chi2_tail(int(k), m2e2 * n / 4.0) + an_fail
