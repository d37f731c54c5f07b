"""Invariant suite run by ``tgplab verify``.

Each check returns a row {module, check, passed, detail}. Sizes are kept
small enough for the whole suite to finish in well under a minute.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm

from . import bounds, gaussmetrics, hermite, spectrum, tgp
from .experiments import cell_rng, fit_loglog_slope, scaling_rules


def _row(module, check, passed, detail=""):
    return {"module": module, "check": check, "passed": bool(passed), "detail": detail}


def check_hermite():
    out = []
    for order in (1, 2, 10, 50, 200, 400):
        q = hermite.gauss_hermite_rule(order)
        err = abs(math.exp(np.logaddexp.reduce(q.log_weights)) - math.sqrt(math.pi))
        ok = err < 1e-12 and np.all(np.diff(q.nodes) > 0) and np.allclose(q.nodes, -q.nodes[::-1], atol=1e-13)
        out.append(_row("hermite", f"rule order {order}: weight sum, sorted symmetric nodes", ok, f"{err:.2e}"))
    z = np.linspace(-30, 30, 601)
    table = hermite.normalized_hermite_table(z, 100, -0.5 * z**2)
    out.append(_row("hermite", "Cramer envelope |H_j(z)| <= 2 sqrt(2^j j!) e^{z^2/2}, j<=100",
                    np.all(np.abs(table) <= 2.0), f"max ratio/2 {np.abs(table).max() / 2:.3f}"))
    q = hermite.normalized_hermite_table(z, 100)
    worst = -np.inf
    for j in range(1, 101):
        mask = z**2 > j
        lhs = np.log(np.abs(q[mask, j]) + 1e-300) + 0.5 * (j * math.log(2) + math.lgamma(j + 1))
        rhs = 0.5 * math.log(2) + j * math.log(2) + j * np.log(np.abs(z[mask]))
        worst = max(worst, float(np.max(lhs - rhs)))
    out.append(_row("hermite", "polynomial tail bound where z^2 > j, j<=100", worst <= 1e-12, f"max log excess {worst:.3f}"))
    psi = np.array([hermite.hermite_weighted(j, z) for j in (0, 5, 50, 300)])
    out.append(_row("hermite", "Hermite functions bounded by pi^{-1/4}", np.all(np.abs(psi) <= math.pi**-0.25 + 1e-12)))
    quad = hermite.gauss_hermite_rule(60)
    zz = np.linspace(-2, 2, 9)
    diff = max(float(np.max(np.abs(hermite.integral_representation_eval(j, zz, quad) - hermite.hermite_eval(j, zz))
                            / np.maximum(1.0, np.abs(hermite.hermite_eval(j, zz))))) for j in range(0, 15))
    out.append(_row("hermite", "integral representation matches recurrence (j<15)", diff < 1e-9, f"{diff:.2e}"))
    return out


def check_spectrum():
    out = []
    quad = hermite.gauss_hermite_rule(400)
    for a in (1.0, 4.0, 16.0):
        spec = spectrum.KernelSpec(a=a)
        s = spectrum.natural_scale(spec)
        x = quad.nodes / s
        phi = spectrum.eigenfunction_matrix(spec, 40, x)
        logf = (0.5 * math.log(2 * spec.b / math.pi) - 2 * spec.b * x**2 + quad.log_weights + quad.nodes**2 - math.log(s))
        gram = (phi * np.exp(logf)[:, None]).T @ phi
        err = float(np.max(np.abs(gram - np.eye(40))))
        out.append(_row("spectrum", f"orthonormality j<=40, a={a:g}", err < 1e-6, f"{err:.2e}"))
        k = spectrum.tail_complete_k(spec, 1e-9)
        g = np.linspace(-2, 2, 21)
        X, Y = np.meshgrid(g, g)
        merr = float(np.max(np.abs(spectrum.mercer_truncated(spectrum.make_basis(spec, k), X, Y)
                                   - spectrum.kernel_exact(spec, X, Y))))
        out.append(_row("spectrum", f"Mercer reconstruction a={a:g}, k={k}", merr < 1e-6, f"{merr:.2e}"))
    spec = spectrum.KernelSpec(a=1.0)
    res = max(spectrum.eigen_identity_residual(spec, j, x0, quad) for j in (1, 5, 10, 20) for x0 in (-1.5, 0.0, 0.7))
    out.append(_row("spectrum", "eigen-identity residual a=1", res < 1e-6, f"{res:.2e}"))
    lam = spectrum.eigenvalue(spec, np.arange(1, 51))
    rel = float(np.max(np.abs(lam / 2.0 ** -np.arange(1, 51) - 1)))
    out.append(_row("spectrum", "lambda_j = 2^-j at a=1, b=1/4", rel < 1e-12, f"{rel:.2e}"))
    ratios = [spectrum.KernelSpec(a=a).decay_ratio for a in (1, 2, 4, 8)]
    out.append(_row("spectrum", "decay ratio increasing in a", all(np.diff(ratios) > 0)))
    worst = 0.0
    for a in (4.0, 16.0, 64.0):
        sp = spectrum.KernelSpec(a=a)
        for t in (0.5, 1.0, 2.0):
            k = int(math.floor(a * t))
            worst = max(worst, spectrum.empirical_supnorm(sp, k) / spectrum.supnorm_bound(sp, k))
    out.append(_row("spectrum", "sup-norm / a^{1/4} e^{bk/a} <= 10", worst <= 10, f"max {worst:.3f}"))
    return out


def check_tgp():
    out = []
    sp = spectrum.KernelSpec(a=1.0)
    basis = spectrum.make_basis(sp, 8)
    worst = 0.0
    whiten_ok = True
    for rep in range(5):
        rng = cell_rng(0, "rate", 50, rep)
        x = tgp.sample_covariates(sp.b, 50, rng)
        y = rng.standard_normal(50)
        post = tgp.posterior(tgp.build_design(basis, x), y, basis)
        xt = rng.uniform(-3, 3, 20)
        worst = max(worst, float(np.max(np.abs(tgp.predict(basis, post.theta_tilde, xt)
                                               - tgp.function_space_oracle(x, y, basis, xt)))))
        w = tgp.whitened_posterior_covariance(post, basis)
        whiten_ok &= bool(np.linalg.eigvalsh(np.eye(8) - w).min() > -1e-10)
    out.append(_row("tgp", "weight-space = function-space predictions", worst < 1e-8, f"{worst:.2e}"))
    out.append(_row("tgp", "whitened posterior covariance <= I", whiten_ok))
    post = tgp.conjugate_posterior(np.ones((2, 1)), np.array([1.0, 3.0]), np.array([1.0]), 1.0)
    out.append(_row("tgp", "hand example theta=4/3, Sigma=1/3",
                    abs(post.theta_tilde[0] - 4 / 3) < 1e-12 and abs(post.sigma_tilde[0, 0] - 1 / 3) < 1e-12))
    return out


def check_gaussmetrics():
    out = []
    rng = cell_rng(0, "smallball", 1, 1)
    tri_ok = True
    for _ in range(20):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        ms = [gaussmetrics.GaussianMeasure(rng.standard_normal(4), (q * rng.uniform(0.1, 3, 4)) @ q.T) for _ in range(3)]
        d = gaussmetrics.w2_commuting
        tri_ok &= d(ms[0], ms[2]) <= d(ms[0], ms[1]) + d(ms[1], ms[2]) + 1e-10
        tri_ok &= d(ms[0], ms[1]) == d(ms[1], ms[0])
    out.append(_row("gaussmetrics", "W2 symmetric and triangle inequality on commuting triples", tri_ok))
    worst = 0.0
    for _ in range(10):
        m1, m2 = rng.normal(0, 2, 2)
        s1, s2 = rng.uniform(0.5, 3, 2)
        exact = gaussmetrics.w2_commuting(gaussmetrics.GaussianMeasure([m1], [[s1 * s1]]),
                                          gaussmetrics.GaussianMeasure([m2], [[s2 * s2]]))
        emp = gaussmetrics.empirical_w2_1d(rng.normal(m1, s1, 100000), rng.normal(m2, s2, 100000))
        worst = max(worst, abs(emp / exact - 1))
    out.append(_row("gaussmetrics", "closed-form W2 vs sorted-sample W2 (1e5 draws)", worst < 0.02, f"max rel {worst:.4f}"))
    ts = np.linspace(0.1, 40, 200)
    dec = all(np.all(np.diff([gaussmetrics.chi2_tail(k, t) for t in ts]) < 0) for k in (1, 3, 10))
    inc = all(gaussmetrics.chi2_tail(k, 30.0) < gaussmetrics.chi2_tail(k + 1, 30.0) for k in range(1, 25))
    out.append(_row("gaussmetrics", "chi2 tail decreasing in t, increasing in k", dec and inc))
    closed = max(abs(gaussmetrics.chi2_tail(2, 2 * math.log(2)) - 0.5),
                 abs(gaussmetrics.chi2_tail(1, 1.0) - 2 * norm.sf(1.0)))
    out.append(_row("gaussmetrics", "chi2 tail closed forms k=1,2", closed < 1e-10, f"{closed:.2e}"))
    ok = True
    for _ in range(50):
        A, B = rng.standard_normal((2, 5, 5))
        na, nb = gaussmetrics.matrix_norms(A), gaussmetrics.matrix_norms(B)
        ok &= na.smin * nb.frobenius <= np.linalg.norm(A @ B) * (1 + 1e-12) <= na.operator * nb.frobenius * (1 + 1e-12)
        ok &= na.smin * nb.operator <= np.linalg.norm(A @ B, 2) * (1 + 1e-12) <= na.operator * nb.operator * (1 + 1e-12)
        Bs = B * (0.9 * na.smin / nb.operator)
        ok &= np.linalg.svd(A - Bs, compute_uv=False).min() >= na.smin - np.linalg.norm(Bs, 2) - 1e-12
    out.append(_row("gaussmetrics", "matrix product and perturbation inequalities on 50 pairs", ok))
    return out


def check_bounds():
    out = []
    sp = spectrum.KernelSpec(a=1.0)
    basis = spectrum.make_basis(sp, 10)
    chain_ok = True
    for rep in range(20):
        d = tgp.build_design(basis, tgp.sample_covariates(sp.b, 2000, cell_rng(0, "concentration", 2000, rep)))
        diag = bounds.an_event_check(d)
        if diag.holds:
            chain_ok &= all(diag.event_consequences(d.n, d.k).values())
    out.append(_row("bounds", "consequences of the concentration event hold on drawn designs", chain_ok))
    rng = cell_rng(0, "tail", 1, 1)
    sandwich = True
    for _ in range(10):
        a = rng.uniform(0.5, 8)
        spec = spectrum.KernelSpec(a=a)
        k = int(rng.integers(2, 30))
        lam = spectrum.eigenvalue(spec, np.arange(k + 1, k + 400))
        eps = math.sqrt(lam.sum()) * rng.uniform(1.5, 4)
        mc = bounds.truncation_tail_mc(lam, 1.0, eps, 20000, rng)
        sandwich &= mc.mean <= bounds.truncation_tail_bernstein(lam, eps)
    out.append(_row("bounds", "prior tail MC <= sub-exponential bound", sandwich))
    sb = spectrum.make_basis(sp, 4)
    ok = True
    for _ in range(5):
        theta0 = rng.uniform(-0.4, 0.4, 4) * np.sqrt(sb.prior_variances)
        eps = rng.uniform(0.6, 1.4)
        p = bounds.small_ball_mc(sb, theta0, eps, 40000, rng)
        c = bounds.small_ball_mc(sb, np.zeros(4), eps / 2, 40000, rng)
        low = bounds.anderson_lower_bound(sb, theta0, eps, c.mean)
        ok &= p.mean >= low - 3 * math.hypot(p.stderr, c.stderr)
    out.append(_row("bounds", "shifted small-ball MC >= Anderson-type lower bound", ok))
    ok = True
    for alphas, psi in (((1.0, 1.0), np.ones_like), ((1.0, 1.0, 1.0), lambda t: t), ((2.0, 0.5), np.exp)):
        r = bounds.dirichlet_integral_check(alphas, psi, 200000, rng)
        ok &= abs(r["lhs_estimate"] - r["rhs_value"]) <= 3 * r["lhs_stderr"] + 1e-12
    out.append(_row("bounds", "simplex integral LHS (MC) vs RHS (formula)", ok))
    return out


def check_experiments():
    out = []
    r = scaling_rules(1000, 1.0)
    out.append(_row("experiments", "scaling rules at n=1000", r["k_n"] == 47 and abs(r["eps_n"] - 0.6908) < 1e-4))
    xs = np.array([256, 512, 1024, 2048], dtype=float)
    fit = fit_loglog_slope(xs, xs ** (-1 / 3))
    out.append(_row("experiments", "log-log fit recovers exact power law", abs(fit["slope"] + 1 / 3) < 1e-12))
    return out


SUITES = (check_hermite, check_spectrum, check_tgp, check_gaussmetrics, check_bounds, check_experiments)


def run_all():
    rows = []
    for suite in SUITES:
        rows.extend(suite())
    return rows
