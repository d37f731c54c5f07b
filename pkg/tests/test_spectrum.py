import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermval

from tgplab.hermite import gauss_hermite_rule
from tgplab.spectrum import (
    KernelSpec,
    asymptotic_ratio,
    default_supnorm_grid,
    eigen_expansion,
    eigen_identity_residual,
    eigenfunction,
    eigenfunction_matrix,
    eigenvalue,
    eigenvalue_asymptotic,
    eigenvalue_table,
    empirical_supnorm,
    inner_product_rho,
    kernel_exact,
    kl_sample,
    log_eigenvalue,
    make_basis,
    mercer_truncated,
    natural_scale,
    rho_density,
    supnorm_bound,
    tail_complete_k,
)

Q400 = gauss_hermite_rule(400)
UNIT = KernelSpec(a=1.0)


def _phi_direct(spec, j, x):
    """Closed-form eigenfunction via numpy's Hermite series (fine for small j)."""
    c = np.zeros(j)
    c[-1] = 1.0
    return ((spec.c / spec.b) ** 0.25 * np.exp(-(spec.c - spec.b) * x**2)
            * hermval(math.sqrt(2 * spec.c) * x, c) / math.sqrt(2.0 ** (j - 1) * math.factorial(j - 1)))


class TestKernelSpec:
    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(1e-3, 1e3), b=st.floats(1e-3, 10))
    def test_invariants(self, a, b):
        s = KernelSpec(a=a, b=b)
        assert s.c > b
        assert 0 < s.decay_ratio < 1
        np.testing.assert_allclose(math.exp(s.log_decay_ratio), s.decay_ratio, rtol=1e-12)

    def test_unit_c(self):
        assert UNIT.c == pytest.approx(0.75)

    @pytest.mark.parametrize("kw", [{"a": 0}, {"a": -1}, {"a": 1, "b": 0}, {"a": 1, "sigma2": -2}, {"a": float("nan")}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            KernelSpec(**kw)


class TestEigenvalues:
    def test_powers_of_two(self):
        j = np.arange(1, 51)
        np.testing.assert_allclose(eigenvalue(UNIT, j), 2.0**-j, rtol=1e-12)
        assert eigenvalue(UNIT, 1) == pytest.approx(0.5)
        assert eigenvalue(UNIT, 3) / eigenvalue(UNIT, 2) == pytest.approx(0.5)

    @pytest.mark.parametrize("a", [0.3, 1.0, 7.0, 50.0])
    def test_geometric_structure(self, a):
        s = KernelSpec(a=a)
        basis = make_basis(s, 30)
        d = np.diff(basis.log_lambda)
        assert np.all(d < 0)
        np.testing.assert_allclose(d, math.log(s.decay_ratio), atol=1e-14)
        np.testing.assert_allclose(basis.lambdas[0], math.sqrt(2 * s.b / (s.b + a * a + s.c)), rtol=1e-14)
        assert basis.lambdas[0] <= 1
        total = basis.lambdas[0] / (1 - s.decay_ratio)
        assert math.isfinite(total)

    def test_log_accessor_survives_underflow(self):
        assert eigenvalue(UNIT, 5000) == 0.0
        assert log_eigenvalue(UNIT, 5000) == pytest.approx(-5000 * math.log(2))

    def test_asymptotic(self):
        s = KernelSpec(a=10.0)
        assert eigenvalue_asymptotic(s, 10) == pytest.approx(0.1 / math.e, rel=1e-12)
        for a in (4.0, 16.0, 64.0):
            r = asymptotic_ratio(KernelSpec(a=a), np.arange(1, int(3 * a) + 1))
            assert r.min() >= 0.1 and r.max() <= 10

    @pytest.mark.parametrize("j", [0, -3, 1.5])
    def test_bad_index(self, j):
        with pytest.raises(ValueError):
            eigenvalue(UNIT, j)
        with pytest.raises(ValueError):
            eigenvalue_asymptotic(UNIT, j)

    def test_figure_monotonicity(self):
        r = [KernelSpec(a=a).decay_ratio for a in (1, 2, 4, 8)]
        assert all(np.diff(r) > 0)

    def test_table_rows(self):
        rows = eigenvalue_table([1.0, 2.0], 5)
        assert len(rows) == 10
        assert rows[0] == {"a": 1.0, "j": 1, "lambda": pytest.approx(0.5)}


class TestEigenfunctions:
    def test_point_values(self):
        assert eigenfunction(UNIT, 1, 0.0) == pytest.approx(3**0.25, rel=1e-14)
        for a in (0.5, 3.0):
            assert eigenfunction(KernelSpec(a=a), 2, 0.0) == 0.0

    @pytest.mark.parametrize("a", [0.5, 1.0, 4.0])
    def test_matches_closed_form(self, a):
        s = KernelSpec(a=a)
        x = np.linspace(-3, 3, 25)
        mat = eigenfunction_matrix(s, 12, x)
        for j in range(1, 13):
            np.testing.assert_allclose(mat[:, j - 1], _phi_direct(s, j, x), rtol=1e-10, atol=1e-12)

    def test_shapes(self):
        assert eigenfunction_matrix(UNIT, 5, np.zeros((2, 3))).shape == (2, 3, 5)
        assert np.ndim(eigenfunction(UNIT, 3, 0.4)) == 0

    def test_high_index_finite(self):
        x = np.linspace(-40, 40, 801)
        m = eigenfunction_matrix(KernelSpec(a=30.0), 400, x)
        assert np.all(np.isfinite(m))

    def test_expansion_matches_matrix(self):
        rng = np.random.default_rng(0)
        coeffs = rng.normal(size=30)
        x = rng.normal(size=40)
        np.testing.assert_allclose(eigen_expansion(UNIT, coeffs, x), eigenfunction_matrix(UNIT, 30, x) @ coeffs,
                                   rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("a", [1.0, 4.0, 16.0])
    def test_orthonormality(self, a):
        s = KernelSpec(a=a)
        sc = natural_scale(s)
        x = Q400.nodes / sc
        phi = eigenfunction_matrix(s, 40, x)
        w = np.exp(0.5 * math.log(2 * s.b / math.pi) - 2 * s.b * x**2 + Q400.log_weights + Q400.nodes**2 - math.log(sc))
        gram = (phi * w[:, None]).T @ phi
        assert np.abs(gram - np.eye(40)).max() < 1e-6

    def test_orthonormality_via_inner_product(self):
        s = KernelSpec(a=4.0)
        for i, j in [(1, 1), (3, 7), (20, 20), (40, 39)]:
            val = inner_product_rho(lambda t: eigenfunction(s, i, t), lambda t: eigenfunction(s, j, t), s.b, Q400,
                                    scale=natural_scale(s))
            assert val == pytest.approx(float(i == j), abs=1e-10)


class TestKernelAndMercer:
    def test_kernel(self):
        assert kernel_exact(UNIT, 0.3, 0.3) == 1.0
        assert kernel_exact(UNIT, 0.0, 1.0) == pytest.approx(math.exp(-1))
        assert kernel_exact(UNIT, 0.2, -1.1) == kernel_exact(UNIT, -1.1, 0.2)

    def test_origin_tail(self):
        basis = make_basis(UNIT, 60)
        assert abs(mercer_truncated(basis, 0.0, 0.0) - 1.0) < 1e-12

    @pytest.mark.parametrize("a", [1.0, 4.0, 16.0])
    def test_reconstruction(self, a):
        s = KernelSpec(a=a)
        k = tail_complete_k(s, 1e-9)
        g = np.linspace(-2, 2, 9)
        X, Y = np.meshgrid(g, g)
        err = np.abs(mercer_truncated(make_basis(s, k), X, Y) - kernel_exact(s, X, Y)).max()
        assert err < 1e-6

    def test_tail_complete_k_is_minimal(self):
        for a in (0.5, 1.0, 4.0):
            s = KernelSpec(a=a)
            k = tail_complete_k(s, 1e-9)
            tail = lambda m: eigenvalue(s, m + 1) / (1 - s.decay_ratio)
            assert tail(k) < 1e-9 <= tail(k - 1)

    def test_diagonal_monotone_and_bounded(self):
        x = np.linspace(-3, 3, 13)
        prev = np.zeros_like(x)
        for k in (1, 5, 20, 60):
            d = mercer_truncated(make_basis(UNIT, k), x, x)
            assert np.all(d >= prev - 1e-15)
            assert np.all(d <= 1 + 1e-9)
            prev = d

    def test_zero_k_rejected(self):
        with pytest.raises(ValueError):
            make_basis(UNIT, 0)


class TestEigenIdentity:
    def test_examples(self):
        assert eigen_identity_residual(UNIT, 1, 0.0, Q400) < 1e-8
        assert eigen_identity_residual(UNIT, 2, 0.0, Q400) < 1e-8

    @pytest.mark.parametrize("a", [1.0, 4.0])
    def test_sweep(self, a):
        s = KernelSpec(a=a)
        worst = max(eigen_identity_residual(s, j, x, Q400) for j in range(1, 21) for x in (-2, -1, 0, 1, 2))
        assert worst < 1e-6

    def test_needs_order_200(self):
        with pytest.raises(ValueError):
            eigen_identity_residual(UNIT, 1, 0.0, gauss_hermite_rule(100))


class TestSampling:
    def test_moments(self):
        s = KernelSpec(a=1.0, sigma2=2.0)
        basis = make_basis(s, 6)
        th = kl_sample(basis, np.random.default_rng(11), size=100_000)
        se = np.sqrt(basis.prior_variances / th.shape[0])
        assert np.all(np.abs(th.mean(axis=0)) < 4 * se)
        np.testing.assert_allclose(th.var(axis=0)[:5], basis.prior_variances[:5], rtol=0.05)

    def test_tail_energy(self):
        s = KernelSpec(a=2.0)
        k, kp = 3, 30
        th = kl_sample(make_basis(s, kp), np.random.default_rng(5), size=100_000)
        energy = np.sum(th[:, k:] ** 2, axis=1)
        expected = s.sigma2 * eigenvalue(s, np.arange(k + 1, kp + 1)).sum()
        assert abs(energy.mean() - expected) < 4 * energy.std() / math.sqrt(energy.size)

    def test_single_draw_shape(self):
        assert kl_sample(make_basis(UNIT, 4), np.random.default_rng(0)).shape == (4,)


class TestSupNorm:
    def test_formula(self):
        assert supnorm_bound(KernelSpec(a=16.0), 16) == pytest.approx(2 * math.exp(0.25))
        s = KernelSpec(a=3.0)
        vals = [supnorm_bound(s, k) for k in range(1, 20)]
        assert all(np.diff(vals) >= 0)

    def test_empirical_values(self):
        assert empirical_supnorm(UNIT, 1) == pytest.approx(3**0.25, rel=1e-12)
        grid = default_supnorm_grid(UNIT, 8)
        assert empirical_supnorm(UNIT, 8, grid) == empirical_supnorm(UNIT, 8, -grid)
        vals = [empirical_supnorm(UNIT, k) for k in (1, 2, 5, 9)]
        assert all(np.diff(vals) >= 0)

    def test_grid_covers_peaks(self):
        # doubling the grid half-width must not reveal a larger value
        s = KernelSpec(a=4.0)
        g = default_supnorm_grid(s, 16)
        wide = np.linspace(2 * g[0], 2 * g[-1], 8001)
        assert empirical_supnorm(s, 16, wide) <= empirical_supnorm(s, 16, g) * (1 + 1e-3)

    @pytest.mark.parametrize("a", [4.0, 16.0, 64.0])
    def test_bounded_ratio(self, a):
        s = KernelSpec(a=a)
        for t in (0.5, 1.0, 2.0):
            k = int(math.floor(a * t))
            assert empirical_supnorm(s, k) <= 10 * supnorm_bound(s, k)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            empirical_supnorm(UNIT, 3, [])


class TestDensity:
    def test_peak(self):
        assert rho_density(0.25, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))

    @pytest.mark.parametrize("b", [0.1, 0.25, 2.0])
    def test_mass_and_variance(self, b):
        one = inner_product_rho(np.ones_like, np.ones_like, b, Q400)
        var = inner_product_rho(lambda x: x, lambda x: x, b, Q400)
        assert one == pytest.approx(1.0, abs=1e-10)
        assert var == pytest.approx(1 / (4 * b), rel=1e-9)

    def test_default_scale_orthogonality(self):
        v = inner_product_rho(lambda t: eigenfunction(UNIT, 2, t), lambda t: eigenfunction(UNIT, 3, t), 0.25, Q400)
        assert abs(v) < 1e-8

    def test_explicit_scale_matches_default(self):
        f = lambda x: np.cos(x) + x**2
        a = inner_product_rho(f, f, 0.25, Q400)
        b = inner_product_rho(f, f, 0.25, Q400, scale=1.3)
        assert a == pytest.approx(b, rel=1e-10)

    def test_rejects_bad_b(self):
        with pytest.raises(ValueError):
            rho_density(0.0, 1.0)
