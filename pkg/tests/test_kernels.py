import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krrlab import (KernelSpec, cross_gram, eval_dot_kernel, eval_pair, gram,
                    kappa1, sample_sphere)

# hand evaluation of the three-step arccos recursion at u = -1:
# kappa1(-1) = 0, kappa1(0) = 1/pi, then kappa1(1/pi) (40-digit arithmetic)
GPK3_ANTIPODAL = 0.49373109020037154


class TestEvalDotKernel:
    def test_gpk_depth1_at_one(self):
        assert eval_dot_kernel(KernelSpec.gpk(1), 1.0) == 1.0

    def test_ntk_depth1_at_zero(self):
        assert eval_dot_kernel(KernelSpec.ntk(1), 0.0) == pytest.approx(1.0 / math.pi, rel=1e-15)

    def test_polynomial_example(self):
        spec = KernelSpec.polynomial(3, inner_scale=0.25, offset=1.0)
        assert eval_dot_kernel(spec, 1.0) == pytest.approx(1.953125, abs=0)

    def test_gpk_depth3_antipodal(self):
        spec = KernelSpec.gpk(3)
        assert eval_dot_kernel(spec, -1.0) == pytest.approx(GPK3_ANTIPODAL, rel=1e-13)
        assert kappa1(-1.0) == 0.0

    def test_series_is_horner_polynomial(self):
        spec = KernelSpec.dot_product_series([0.5, 0.0, 2.0, 1.0])
        u = 0.3
        assert eval_dot_kernel(spec, u) == pytest.approx(0.5 + 2.0 * u**2 + u**3, rel=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError, match="exceeds"):
            eval_dot_kernel(KernelSpec.ntk(2), 1.0 + 1e-9)

    def test_boundary_band_clamps(self):
        assert eval_dot_kernel(KernelSpec.gpk(2), 1.0 + 1e-13) == 1.0

    def test_rbf_rejected(self):
        with pytest.raises(ValueError, match="not a dot-product"):
            eval_dot_kernel(KernelSpec.rbf(0.375), 0.5)


class TestEvalPair:
    def test_rbf_zero_distance(self):
        x = sample_sphere(1, 4, 0)[0]
        assert eval_pair(KernelSpec.rbf(0.375), x, x) == 1.0

    def test_laplace_zero_distance(self):
        x = np.array([0.3, 0.4, 0.5])
        assert eval_pair(KernelSpec.laplace(1.0), x, x) == 1.0

    def test_rbf_known_value(self):
        x = np.zeros(3)
        y = np.array([2.0, 0.0, 0.0])
        assert eval_pair(KernelSpec.rbf(0.375), x, y) == pytest.approx(math.exp(-1.5), rel=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shapes"):
            eval_pair(KernelSpec.ntk(1), np.ones(3), np.ones(4))

    def test_non_unit_rejected_without_zonal(self):
        x = np.array([1.0, 1.0, 0.0])
        with pytest.raises(ValueError, match="unit sphere"):
            eval_pair(KernelSpec.ntk(2), x, x)

    def test_zonal_extension(self):
        spec = KernelSpec.gpk(3)
        x = np.array([0.6, 0.0, 0.0])
        y = np.array([0.0, 0.25, 0.0])
        expected = 0.6 * 0.25 * eval_dot_kernel(spec, 0.0)
        assert eval_pair(spec, x, y, zonal=True) == pytest.approx(expected, rel=1e-14)

    def test_diagonal_matches_scalar_profile_exactly(self):
        X = sample_sphere(8, 5, 3)
        for spec in (KernelSpec.ntk(3), KernelSpec.gpk(2),
                     KernelSpec.polynomial(3, 0.2, 1.0)):
            h1 = eval_dot_kernel(spec, 1.0)
            for row in X:
                assert eval_pair(spec, row, row) == h1


class TestGram:
    def test_single_point_is_h1(self):
        X = sample_sphere(1, 6, 1)
        spec = KernelSpec.ntk(2)
        G = gram(spec, X)
        assert G.shape == (1, 1)
        assert G[0, 0] == eval_dot_kernel(spec, 1.0)

    def test_duplicate_point_rank_deficient(self):
        X = sample_sphere(4, 5, 2)
        X[1] = X[0]
        G = gram(KernelSpec.gpk(2), X)
        assert np.array_equal(G[0], G[1])
        assert np.linalg.matrix_rank(G, tol=1e-10) < 4

    def test_matches_naive_double_loop(self):
        spec = KernelSpec.ntk(2)
        X = sample_sphere(5, 7, 11)
        G = gram(spec, X)
        naive = np.empty((5, 5))
        for i in range(5):
            for j in range(5):
                naive[i, j] = eval_pair(spec, X[i], X[j])
        # mirrored assembly and the exact diagonal agree with per-entry
        # evaluation to round-off
        assert np.allclose(G, naive, atol=1e-12)
        assert np.array_equal(G, G.T)

    def test_trace_identity_exact(self):
        X = sample_sphere(17, 9, 4)
        for spec in (KernelSpec.ntk(3), KernelSpec.polynomial(2, 0.5, 1.0)):
            G = gram(spec, X)
            assert np.trace(G) / 17 == eval_dot_kernel(spec, 1.0)

    def test_cross_gram_consistency(self):
        spec = KernelSpec.gpk(3)
        A = sample_sphere(4, 5, 0)
        B = sample_sphere(3, 5, 1)
        C = cross_gram(spec, A, B)
        assert C.shape == (4, 3)
        assert C[2, 1] == pytest.approx(eval_pair(spec, A[2], B[1]), rel=1e-14)

    def test_propagates_bad_rows(self):
        X = np.eye(4) * 2.0
        with pytest.raises(ValueError, match="gram assembly failed"):
            gram(KernelSpec.ntk(1), X)


class TestRecursionInvariants:
    GRID = np.linspace(-1.0, 1.0, 10_001)

    def test_kappa1_maps_into_unit_interval(self):
        vals = kappa1(self.GRID)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert kappa1(1.0) == 1.0

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_gpk_stays_in_unit_interval(self, depth):
        vals = eval_dot_kernel(KernelSpec.gpk(depth), self.GRID)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_ntk_dominates_gpk_on_nonnegatives(self, depth):
        u = self.GRID[self.GRID >= 0.0]
        ntk = eval_dot_kernel(KernelSpec.ntk(depth), u)
        gpk = eval_dot_kernel(KernelSpec.gpk(depth), u)
        assert np.all(ntk >= gpk - 1e-15)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=6),
           st.integers(0, 2**31 - 1))
    def test_nonnegative_series_gram_is_psd(self, coeffs, seed):
        spec = KernelSpec.dot_product_series(coeffs)
        X = sample_sphere(12, 4, seed)
        G = gram(spec, X)
        floor = -1e-8 * 12 * max(eval_dot_kernel(spec, 1.0), 1e-30)
        assert np.linalg.eigvalsh(G).min() >= floor


class TestSpecValidation:
    def test_bad_family(self):
        with pytest.raises(ValueError):
            KernelSpec(family="matern")

    def test_bad_depth(self):
        with pytest.raises(ValueError):
            KernelSpec.ntk(0)

    def test_negative_series_coefficient(self):
        with pytest.raises(ValueError, match="nonnegative"):
            KernelSpec.dot_product_series([1.0, -0.1])

    def test_config_round_trip(self):
        for spec in (KernelSpec.rbf(0.375), KernelSpec.laplace(2.0),
                     KernelSpec.polynomial(3, 0.125, 1.0),
                     KernelSpec.dot_product_series([0.0, 1.0]),
                     KernelSpec.gpk(2), KernelSpec.ntk(3)):
            assert KernelSpec.from_config(spec.to_config()) == spec

    def test_spec_is_hashable_and_immutable(self):
        spec = KernelSpec.ntk(3)
        assert hash(spec) == hash(KernelSpec.ntk(3))
        with pytest.raises(Exception):
            spec.depth = 4
