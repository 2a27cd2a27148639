import math
from fractions import Fraction

import numpy as np
import pytest

from krrlab import (BoundConstants, KernelSpec, SpectralProfile, TargetSpec,
                    cross_gram, decay_profile, estimate_bias,
                    estimate_variance, fit, fit_gram, gram, gaussian_features,
                    mercer_spectrum, rate_predictions, risk_bounds,
                    sample_sphere, target_degree_norms, theta_norms,
                    variance_from_features)


class TestFit:
    def test_single_point_closed_form(self):
        spec = KernelSpec.rbf(0.375)
        X = np.array([[0.0, 0.0, 1.0]])
        y = np.array([2.0])
        gamma = 0.5
        predictor = fit(spec, X, y, gamma)
        T = sample_sphere(20, 3, 0)
        kvals = cross_gram(spec, T, X)[:, 0]
        # kappa = K(x1, x1) = 1, n = 1
        assert np.allclose(predictor.predict(T), kvals * 2.0 / (1.0 + gamma),
                           rtol=1e-12)

    def test_huge_regularization_shrinks_to_zero(self):
        spec = KernelSpec.ntk(2)
        X = sample_sphere(16, 8, 0)
        y = np.ones(16)
        predictor = fit(spec, X, y, 1e9)
        assert np.max(np.abs(predictor.predict(sample_sphere(10, 8, 1)))) < 1e-8

    def test_interpolation_at_zero_gamma(self):
        spec = KernelSpec.ntk(3)
        X = sample_sphere(40, 8, 3)
        rng = np.random.default_rng(0)
        y = rng.standard_normal(40)
        predictor = fit(spec, X, y, 0.0)
        assert np.linalg.norm(predictor.predict(X) - y) <= 1e-6 * np.linalg.norm(y)

    def test_rank_recorded_for_rank_deficient_gram(self):
        d = 8
        spec = KernelSpec.polynomial(1, 1.0, 0.0)    # rank <= d + 1
        X = sample_sphere(30, d, 1)
        y = X[:, 0]
        predictor = fit(spec, X, y, 0.0)
        assert predictor.rank <= d + 1

    @pytest.mark.parametrize("seed,spec,d,n", [
        (0, KernelSpec.ntk(3), 8, 32), (1, KernelSpec.ntk(3), 16, 48),
        (2, KernelSpec.gpk(2), 8, 40), (3, KernelSpec.gpk(3), 16, 32),
        (4, KernelSpec.ntk(2), 8, 64), (5, KernelSpec.gpk(2), 16, 64),
        (6, KernelSpec.ntk(3), 8, 48), (7, KernelSpec.gpk(3), 8, 56),
        (8, KernelSpec.ntk(2), 16, 32), (9, KernelSpec.gpk(2), 8, 24),
    ])
    def test_ridge_limit_matches_min_norm(self, seed, spec, d, n):
        # tiny-ridge solve and pseudo-inverse interpolation agree on test
        # predictions for well-conditioned Grams
        X = sample_sphere(n, d, seed)
        rng = np.random.default_rng(seed + 1000)
        y = rng.standard_normal(n)
        T = sample_sphere(64, d, seed + 2000)
        ridge = fit(spec, X, y, 1e-10).predict(T)
        min_norm = fit(spec, X, y, 0.0).predict(T)
        scale = np.linalg.norm(min_norm)
        assert np.linalg.norm(ridge - min_norm) <= 1e-6 * scale


class TestVariance:
    def test_zero_noise(self):
        spec = KernelSpec.gpk(2)
        X = sample_sphere(10, 8, 0)
        assert estimate_variance(spec, X, 0.1, 0.0, sample_sphere(5, 8, 1)) == (0.0, 0.0)

    def test_single_point_closed_form(self):
        spec = KernelSpec.rbf(0.375)
        X = np.array([[1.0, 0.0, 0.0]])
        T = sample_sphere(200, 3, 0)
        sigma = 0.7
        V, _ = estimate_variance(spec, X, 0.0, sigma, T)
        kvals = cross_gram(spec, T, X)[:, 0]
        assert V == pytest.approx(sigma**2 * np.mean(kvals**2), rel=1e-12)

    def test_closed_form_matches_monte_carlo(self):
        spec = KernelSpec.ntk(3)
        X = sample_sphere(128, 16, 0)
        T = sample_sphere(400, 16, 1)
        cf, cf_se = estimate_variance(spec, X, 0.0, 1.0, T, mode="closed_form")
        mc, mc_se = estimate_variance(spec, X, 0.0, 1.0, T, mode="monte_carlo",
                                      trials=400, seed=7)
        assert abs(cf - mc) <= 3 * math.hypot(cf_se, mc_se)

    def test_monotone_in_regularization(self):
        spec = KernelSpec.gpk(3)
        X = sample_sphere(64, 8, 2)
        T = sample_sphere(300, 8, 3)
        gammas = np.logspace(-3, 1, 10)
        values = [estimate_variance(spec, X, g, 1.0, T)[0] for g in gammas]
        assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))

    def test_exact_feature_variance_against_dense_formula(self):
        lam = np.array([1.0, 0.5, 0.25, 0.125])
        phi = gaussian_features(lam, 6, 0)
        gamma, sigma = 0.05, 1.3
        V = variance_from_features(phi, lam, gamma, sigma)
        K = phi @ phi.T
        A = np.linalg.inv(K + 6 * gamma * np.eye(6))
        M = phi @ np.diag(lam) @ phi.T
        assert V == pytest.approx(sigma**2 * np.trace(A @ M @ A), rel=1e-10)


class TestBias:
    def test_zero_target(self):
        spec = KernelSpec.ntk(2)
        X = sample_sphere(20, 8, 0)
        target = TargetSpec(coeffs=(), anchor=sample_sphere(1, 8, 1)[0])
        B, se = estimate_bias(spec, X, target, 0.0, sample_sphere(50, 8, 2))
        assert B == 0.0

    @pytest.mark.parametrize("n", [32, 64])
    def test_constant_interpolation(self, n):
        # finite-rank kernel with a constant component drives the bias of a
        # constant target far below 1e-4 once n exceeds a few dozen
        d = 8
        spec = KernelSpec.polynomial(3, 1.0 / d, 1.0)
        X = sample_sphere(n, d, 0)
        target = TargetSpec(coeffs=((0, 1.0),), anchor=sample_sphere(1, d, 2)[0])
        B, _ = estimate_bias(spec, X, target, 0.0, sample_sphere(500, d, 1))
        assert B <= 1e-4

    def test_unlearnable_high_degree_component(self):
        # a degree-5 target is orthogonal to the range of a degree-3
        # polynomial kernel, so its full mass persists in the bias
        d = 8
        spec = KernelSpec.polynomial(3, 1.0 / d, 1.0)
        X = sample_sphere(64, d, 0)
        target = TargetSpec(coeffs=((5, 1.0),), anchor=sample_sphere(1, d, 2)[0])
        B, se = estimate_bias(spec, X, target, 0.0, sample_sphere(1000, d, 1))
        assert B >= 1.0 - 3 * se

    def test_bias_variance_additivity(self):
        # MSE against the target on noisy fits decomposes into bias +
        # variance up to a zero-mean cross term
        d = 8
        spec = KernelSpec.ntk(3)
        n, m = 64, 400
        X = sample_sphere(n, d, 0)
        T = sample_sphere(m, d, 1)
        target = TargetSpec(coeffs=((0, 1.0), (1, 0.5)), anchor=sample_sphere(1, d, 2)[0])
        sigma = 1.0
        B, B_se = estimate_bias(spec, X, target, 0.0, T)
        V, V_se = estimate_variance(spec, X, 0.0, sigma, T)
        from krrlab import synthesize_target
        f_star = synthesize_target(target)
        y_clean = f_star(X)
        f_test = f_star(T)
        K = gram(spec, X)
        C = cross_gram(spec, T, X)
        rng = np.random.default_rng(5)
        mses = []
        for _ in range(20):
            coef, _ = fit_gram(K, y_clean + sigma * rng.standard_normal(n), 0.0)
            mses.append(float(np.mean((C @ coef - f_test) ** 2)))
        mse = float(np.mean(mses))
        mse_se = float(np.std(mses, ddof=1) / math.sqrt(len(mses)))
        tol = 4 * math.sqrt(mse_se**2 + B_se**2 + V_se**2)
        assert abs(mse - B - V) <= tol


class TestRiskBounds:
    def test_zero_noise_zeroes_variance_bound(self):
        profile = decay_profile("polynomial", 1.0, 1000)
        report = risk_bounds(profile, n=64, k=8, gamma=0.0, rho=2.0, sigma_eps=0.0)
        assert report.v_bound == 0.0

    def test_zero_tail_zeroes_bias_bound(self):
        profile = SpectralProfile.explicit([1.0, 0.5, 0.25])
        report = risk_bounds(profile, n=64, k=3, gamma=0.0, rho=1.5,
                             sigma_eps=1.0,
                             theta=np.array([1.0, 1.0, 1.0]))
        assert report.b_bound == 0.0
        assert report.tail_trace == 0.0

    def test_geometric_profile_against_raw_sums(self):
        # independent recomputation of both bounds from materialized sums
        lam = 2.0 ** -np.arange(1, 2001, dtype=float)
        profile = SpectralProfile.explicit(lam)
        k, n, rho, delta, sigma = 8, 256, 2.0, 0.1, 1.0
        theta = np.zeros(2000)
        theta[:12] = 0.3
        report = risk_bounds(profile, n=n, k=k, gamma=0.0, rho=rho,
                             sigma_eps=sigma, delta=delta, theta=theta)
        tail = lam[k:]
        r_k_sq = (tail**2).sum() / tail.max() ** 2
        R_k = tail.sum() ** 2 / (tail**2).sum()
        v_expected = rho**2 * sigma**2 * (k / n + min(r_k_sq / n, n / R_k))
        head_norm = float(np.sum(theta[:k] ** 2 / lam[:k]))
        tail_norm = float(np.sum(theta[k:] ** 2 * lam[k:]))
        b_expected = rho**3 * (tail_norm / delta + head_norm * (tail.sum() / n) ** 2)
        assert report.v_bound == pytest.approx(v_expected, rel=1e-12)
        assert report.b_bound == pytest.approx(b_expected, rel=1e-12)
        assert report.status == "ok"

    def test_alpha_zero_degrades_min(self):
        profile = decay_profile("polynomial", 0.5, 4000)
        with_alpha = risk_bounds(profile, 128, 8, 0.0, 1.0, 1.0, alpha_k=1.0)
        without = risk_bounds(profile, 128, 8, 0.0, 1.0, 1.0, alpha_k=0.0)
        assert without.v_bound >= with_alpha.v_bound

    def test_precondition_advisory(self):
        profile = decay_profile("polynomial", 1.0, 1000)
        report = risk_bounds(profile, n=16, k=12, gamma=0.0, rho=1.0, sigma_eps=1.0,
                             constants=BoundConstants(C=100.0))
        assert report.status == "advisory"

    def test_degree_anchored_target_norms(self):
        d = 8
        profile = mercer_spectrum(KernelSpec.ntk(3), d, 8)
        target = TargetSpec(coeffs=((0, 1.0), (1, 0.5), (3, 0.25)),
                            anchor=sample_sphere(1, d, 0)[0])
        k = profile.boundary_index(1)
        head, tail = target_degree_norms(profile, target, k)
        sigma0 = profile.degree_mass(0)
        sigma1 = profile.degree_mass(1) / d
        assert head == pytest.approx(1.0 / sigma0**2 + 0.25 / sigma1**2, rel=1e-12)
        assert tail == pytest.approx(0.25**2, rel=1e-12)

    def test_theta_norms_helper(self):
        lam = np.array([1.0, 0.5, 0.25, 0.125])
        theta = np.array([1.0, 2.0, 3.0, 4.0])
        head, tail = theta_norms(lam, theta, 2)
        assert head == pytest.approx(1.0 + 8.0, rel=1e-14)
        assert tail == pytest.approx(9 * 0.25 + 16 * 0.125, rel=1e-14)


class TestRatePredictions:
    def test_fixed_dim_interp_example(self):
        pred = rate_predictions("fixed_dim_interp", a=Fraction(1, 15), r=Fraction(3, 2))
        assert pred.variance_exponents == (Fraction(2, 15),)
        assert pred.bias_exponent == Fraction(29, 15)
        assert pred.variance_grows

    def test_fixed_dim_reg_example(self):
        pred = rate_predictions("fixed_dim_reg", a="1/2", b=0, r=1)
        assert pred.variance_exponents == (Fraction(1, 3),)

    def test_time_mapped_example(self):
        pred = rate_predictions("time_mapped", a="1/2", r=2, s=1)
        assert pred.variance_exponents == (Fraction(1, 3),)
        assert pred.bias_exponent == Fraction(2)

    def test_high_dim_split(self):
        pred = rate_predictions("high_dim", tau="3/2")
        assert pred.variance_exponents == (Fraction(1, 2), Fraction(1, 2))
        assert pred.bias_exponent == Fraction(1)
        assert pred.axis == "d"

    def test_constraint_violations_named(self):
        with pytest.raises(ValueError, match="integer"):
            rate_predictions("high_dim", tau=2)
        with pytest.raises(ValueError, match="r > a"):
            rate_predictions("fixed_dim_interp", a=1, r="1/2")
        with pytest.raises(ValueError, match=r"b in \(-1, a\)"):
            rate_predictions("fixed_dim_reg", a="1/2", b=1, r=1)
        with pytest.raises(ValueError, match=r"s in \(0, 1 \+ a\)"):
            rate_predictions("time_mapped", a="1/2", r=1, s=2)
        with pytest.raises(ValueError, match="unknown regime"):
            rate_predictions("thermodynamic")

    def test_log_flag_at_boundary(self):
        pred = rate_predictions("fixed_dim_reg", a="1/2", b=0, r="5/4")
        assert pred.log_factors        # r = 1 + a/2 exactly
