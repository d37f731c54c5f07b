"""Physicists' Hermite polynomials, Hermite functions and Gauss-Hermite rules.

Everything that can overflow is evaluated through the normalized polynomials

    q_m(u) = H_m(u) / sqrt(2^m m!),

which obey q_{m+1} = u sqrt(2/(m+1)) q_m - sqrt(m/(m+1)) q_{m-1}. The
recurrence is run with a per-point running log-scale, so a Gaussian envelope
(possibly far below the smallest double) can be folded in without underflow
or overflow at any intermediate step.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

__all__ = [
    "QuadratureRule",
    "cramer_bound",
    "gauss_hermite_rule",
    "hermite_eval",
    "hermite_weighted",
    "integral_representation_eval",
    "normalized_hermite_series",
    "normalized_hermite_table",
    "poly_bound",
]

MAX_DEGREE = 500
_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)
_LOG_PI = math.log(math.pi)


def _scaled_recurrence(u, m_max, log_envelope):
    """Yield ``(m, p, log_s)`` with ``q_m(u) * exp(log_envelope) == p * exp(log_s)``."""
    u = np.asarray(u, dtype=float)
    log_s = np.array(np.broadcast_to(log_envelope, u.shape), dtype=float)
    p_prev = np.zeros(u.shape)
    p_cur = np.ones(u.shape)
    yield 0, p_cur, log_s
    for m in range(m_max):
        p_next = u * math.sqrt(2.0 / (m + 1)) * p_cur - math.sqrt(m / (m + 1)) * p_prev
        p_prev, p_cur = p_cur, p_next
        big = np.abs(p_cur) > _RESCALE
        if big.any():
            p_prev = np.where(big, p_prev / _RESCALE, p_prev)
            p_cur = np.where(big, p_cur / _RESCALE, p_cur)
            log_s = np.where(big, log_s + _LOG_RESCALE, log_s)
        yield m + 1, p_cur, log_s


def _combine(p, log_s):
    with np.errstate(divide="ignore", over="ignore"):
        return np.sign(p) * np.exp(np.log(np.abs(p)) + log_s)


def normalized_hermite_table(u, m_max, log_envelope=0.0):
    """Return ``exp(log_envelope) * H_m(u) / sqrt(2^m m!)`` for m = 0..m_max.

    The degree runs along a new trailing axis, so the result has shape
    ``np.shape(u) + (m_max + 1,)``.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape + (m_max + 1,))
    for m, p, log_s in _scaled_recurrence(u, m_max, log_envelope):
        out[..., m] = _combine(p, log_s)
    return out


def normalized_hermite_series(u, coeffs, log_envelope=0.0):
    """Return ``sum_m coeffs[m] * exp(log_envelope) * q_m(u)`` without storing the table."""
    coeffs = np.asarray(coeffs, dtype=float)
    u = np.asarray(u, dtype=float)
    acc = np.zeros(u.shape)
    if coeffs.size == 0:
        return acc
    for m, p, log_s in _scaled_recurrence(u, coeffs.size - 1, log_envelope):
        if coeffs[m] != 0.0:
            acc += coeffs[m] * _combine(p, log_s)
    return acc


def _log_hermite_norm(j):
    # log sqrt(2^j j!)
    return 0.5 * (j * math.log(2.0) + math.lgamma(j + 1.0))


def _check_degree(j):
    if j < 0 or int(j) != j:
        raise ValueError(f"degree must be a non-negative integer, got {j!r}")
    return int(j)


def hermite_eval(j, z):
    """Physicists' Hermite polynomial H_j(z).

    Degrees up to 60 use the integer-coefficient three-term recurrence
    directly (exact on small integer inputs). Higher degrees go through the
    normalized recurrence and are rescaled in log space, so the only failure
    mode is a genuine overflow to +/-inf.
    """
    j = _check_degree(j)
    if j > MAX_DEGREE:
        raise ValueError(f"hermite_eval supports degrees up to {MAX_DEGREE}, got {j}")
    z = np.asarray(z, dtype=float)
    if j <= 60:
        h_prev, h = np.zeros_like(z), np.ones_like(z)
        with np.errstate(over="ignore", invalid="ignore"):
            for m in range(j):
                h_prev, h = h, 2.0 * z * h - 2.0 * m * h_prev
        if np.all(np.isfinite(h)):
            return h[()] if h.ndim == 0 else h
    last = None
    for _, p, log_s in _scaled_recurrence(z, j, _log_hermite_norm(j)):
        last = (p, log_s)
    h = _combine(*last)
    return h[()] if h.ndim == 0 else h


def hermite_weighted(j, z):
    """Hermite function psi_j(z) = H_j(z) exp(-z^2/2) / sqrt(2^j j! sqrt(pi)).

    Never overflows; |psi_j(z)| <= pi^{-1/4} < 1 everywhere.
    """
    j = _check_degree(j)
    z = np.asarray(z, dtype=float)
    last = None
    for _, p, log_s in _scaled_recurrence(z, j, -0.5 * z**2 - 0.25 * _LOG_PI):
        last = (p, log_s)
    out = _combine(*last)
    return out[()] if out.ndim == 0 else out


def cramer_bound(j, z):
    """Cramér's envelope 2 sqrt(2^j j!) exp(z^2/2), evaluated in log space.

    Returns +inf when the value is not representable.
    """
    j = np.asarray(j, dtype=float)
    z = np.asarray(z, dtype=float)
    log_val = math.log(2.0) + 0.5 * (j * math.log(2.0) + gammaln(j + 1.0)) + 0.5 * z**2
    with np.errstate(over="ignore"):
        out = np.exp(log_val)
    return out[()] if np.ndim(out) == 0 else out


def poly_bound(j, z):
    """Polynomial tail bound sqrt(2) 2^j |z|^j, valid when z^2 > j.

    Raises
    ------
    ValueError
        If ``j < 1`` or ``z**2 <= j`` anywhere.
    """
    j = np.asarray(j, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(j < 1):
        raise ValueError("poly_bound requires j >= 1")
    if np.any(z**2 <= j):
        raise ValueError("poly_bound is only valid where z**2 > j")
    log_val = 0.5 * math.log(2.0) + j * math.log(2.0) + j * np.log(np.abs(z))
    with np.errstate(over="ignore"):
        out = np.exp(log_val)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Hermite nodes and weights for integrals against exp(-u^2).

    ``log_weights`` keeps full relative precision where ``weights`` has
    underflowed to zero (outermost nodes of high-order rules).
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def integrate(self, f):
        """Approximate the integral of f(u) exp(-u^2) over the real line."""
        return float(np.dot(self.weights, f(self.nodes)))

    def scaled_weights(self):
        """Weights multiplied by exp(u^2), for integrands carrying their own envelope."""
        return np.exp(self.log_weights + self.nodes**2)


@functools.lru_cache(maxsize=32)
def gauss_hermite_rule(order):
    """Gauss-Hermite rule of the given order.

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix,
    polished by one Newton step on the normalized Hermite polynomial.
    Weights come from the Christoffel formula
    ``w_i = sqrt(pi) / (n q_{n-1}(x_i)^2)`` evaluated in log space.
    """
    if int(order) != order or not 1 <= order <= 1000:
        raise ValueError(f"order must be an integer in [1, 1000], got {order!r}")
    n = int(order)
    off = np.sqrt(np.arange(1, n) / 2.0)
    x = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)

    def last_two(nodes):
        prev = cur = None
        for m, p, log_s in _scaled_recurrence(nodes, n, 0.0):
            if m == n - 1:
                prev = (p.copy(), log_s.copy())
            if m == n:
                cur = (p, log_s)
        return prev, cur

    if n > 1:
        (p_nm1, s_nm1), (p_n, s_n) = last_two(x)
        # q_n' = sqrt(2n) q_{n-1}
        x = x - (p_n / (math.sqrt(2.0 * n) * p_nm1)) * np.exp(s_n - s_nm1)
        x = 0.5 * (x - x[::-1])
    (p_nm1, s_nm1), _ = last_two(x)
    log_w = 0.5 * _LOG_PI - math.log(n) - 2.0 * (np.log(np.abs(p_nm1)) + s_nm1)
    log_w = 0.5 * (log_w + log_w[::-1])
    for arr in (x, log_w):
        arr.setflags(write=False)
    w = np.exp(log_w)
    w.setflags(write=False)
    return QuadratureRule(order=n, nodes=x, weights=w, log_weights=log_w)


def integral_representation_eval(j, z, quad):
    """H_j(z) from its integral representation, by quadrature.

    Uses H_j(z) = (2^j / sqrt(pi)) * int (z + i t)^j exp(-t^2) dt. The
    imaginary part integrates to zero, and the real part is expanded
    binomially so only real moments of the quadrature rule are needed.
    """
    j = _check_degree(j)
    if quad.order < j + 10:
        raise ValueError(f"quadrature order {quad.order} too low for degree {j} (need >= {j + 10})")
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    for k in range(0, j + 1, 2):
        moment = quad.integrate(lambda t, k=k: t**k)
        total = total + math.comb(j, k) * (-1.0) ** (k // 2) * moment * z ** (j - k)
    out = 2.0**j / math.sqrt(math.pi) * total
    return out[()] if out.ndim == 0 else out
