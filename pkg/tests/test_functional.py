import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fofpoly import (FunctionalData, FunctionalSample, GridMismatchError, InvalidArgumentError,
                     cosine_basis, feature_inner, gram_matrix, l2_inner, l2_norm, make_grid,
                     read_csv, write_csv)
from fofpoly.bruteforce import brute_feature_inner


def sample(grid, f):
    return FunctionalSample(grid, f(grid.points))


class TestMakeGrid:
    def test_two_points(self):
        g = make_grid(0, 1, 2)
        np.testing.assert_array_equal(g.points, [0.0, 1.0])
        np.testing.assert_array_equal(g.weights, [0.5, 0.5])

    def test_three_points(self):
        np.testing.assert_allclose(make_grid(0, 1, 3).weights, [0.25, 0.5, 0.25], rtol=0,
                                   atol=1e-15)

    def test_weight_sum(self):
        assert make_grid(0, 2, 5).weights.sum() == 2.0

    @pytest.mark.parametrize("args", [(0, 1, 1), (1, 1, 5), (2, 1, 5), (0, 1, 2.5)])
    def test_invalid(self, args):
        with pytest.raises(InvalidArgumentError):
            make_grid(*args)

    @given(lo=st.floats(-100, 100), width=st.floats(1e-3, 100), m=st.integers(2, 500))
    @settings(max_examples=60, deadline=None)
    def test_invariants(self, lo, width, m):
        g = make_grid(lo, lo + width, m)
        assert np.all(np.diff(g.points) > 0)
        assert g.points[0] >= g.lo and g.points[-1] <= g.hi
        assert np.all(g.weights > 0)
        assert abs(g.weights.sum() - (g.hi - g.lo)) <= 1e-12 * (g.hi - g.lo)

    def test_equality_and_hash(self):
        assert make_grid(0, 1, 11) == make_grid(0, 1, 11)
        assert hash(make_grid(0, 1, 11)) == hash(make_grid(0, 1, 11))
        assert make_grid(0, 1, 11) != make_grid(0, 1, 12)


class TestInner:
    def test_constant(self):
        g = make_grid(0, 1, 17)
        one = sample(g, np.ones_like)
        assert l2_inner(one, one) == pytest.approx(1.0, abs=1e-15)

    def test_sin_cos_orthogonal(self):
        g = make_grid(0, 1, 201)
        f = sample(g, lambda s: np.sin(2 * np.pi * s))
        h = sample(g, lambda s: np.cos(2 * np.pi * s))
        assert abs(l2_inner(f, h)) < 1e-6

    def test_linear_squared(self):
        g = make_grid(0, 1, 201)
        f = sample(g, lambda s: s)
        assert l2_inner(f, f) == pytest.approx(1 / 3, abs=1e-4)
        assert l2_norm(f) == pytest.approx(np.sqrt(1 / 3), abs=1e-4)

    def test_grid_mismatch(self):
        f = sample(make_grid(0, 1, 5), np.sin)
        h = sample(make_grid(0, 1, 6), np.sin)
        with pytest.raises(GridMismatchError):
            l2_inner(f, h)

    def test_exact_for_piecewise_linear(self, rng):
        g = make_grid(0, 1, 9)
        a, b = rng.normal(size=9), rng.normal(size=9)
        # product of two piecewise-linear interpolants is not linear; a single
        # piecewise-linear integrand is integrated exactly
        exact = sum((a[k] + a[k + 1]) / 2 * (1 / 8) for k in range(8))
        one = FunctionalSample(g, np.ones(9))
        assert l2_inner(FunctionalSample(g, a), one) == pytest.approx(exact, abs=1e-14)
        assert np.isfinite(b).all()

    def test_second_order_convergence(self):
        errs = []
        for m in (21, 41, 81, 161):
            g = make_grid(0, 1, m)
            f = sample(g, np.exp)
            errs.append(abs(l2_inner(f, f) - (np.e**2 - 1) / 2))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        # halving h divides the error by ~4
        assert np.all((ratios > 3.5) & (ratios < 4.5))


class TestFeatureInner:
    def test_orthogonal(self):
        g = make_grid(0, 1, 201)
        x1 = sample(g, lambda s: np.sqrt(2) * np.cos(np.pi * s))
        x2 = sample(g, lambda s: np.sqrt(2) * np.cos(2 * np.pi * s))
        assert feature_inner(x1, x2, 3) == pytest.approx(1.0, abs=1e-12)

    def test_unit_norm(self):
        g = make_grid(0, 1, 11)
        x = FunctionalSample(g, np.ones(11))
        assert feature_inner(x, x, 2) == pytest.approx(3.0, abs=1e-14)

    def test_half(self):
        g = make_grid(0, 1, 11)
        x1 = FunctionalSample(g, np.ones(11))
        x2 = FunctionalSample(g, np.full(11, 0.5))
        assert feature_inner(x1, x2, 3) == pytest.approx(1.875, abs=1e-14)

    def test_zero_power_zero(self):
        g = make_grid(0, 1, 5)
        z = FunctionalSample(g, np.zeros(5))
        assert feature_inner(z, z, 0) == 1.0

    @pytest.mark.parametrize("p", [0, 1, 2, 3])
    def test_kernel_identity(self, rng, p):
        g = make_grid(0, 1, 7)
        for _ in range(5):
            a, b = rng.normal(size=7), rng.normal(size=7)
            fast = feature_inner(FunctionalSample(g, a), FunctionalSample(g, b), p)
            brute = brute_feature_inner(a, b, g.weights, p)
            assert fast == pytest.approx(brute, rel=1e-10, abs=1e-12)


class TestGram:
    def test_single(self):
        g = make_grid(0, 1, 11)
        G = gram_matrix([FunctionalSample(g, np.ones(11))], 1)
        np.testing.assert_allclose(G.entries, [[2.0]], atol=1e-14)

    def test_orthogonal_pair(self):
        g = make_grid(0, 1, 201)
        xs = [sample(g, lambda s, k=k: np.sqrt(2) * np.cos(k * np.pi * s)) for k in (1, 2)]
        G = gram_matrix(xs, 2).entries
        np.testing.assert_allclose(np.diag(G), [3.0, 3.0], atol=1e-12)
        assert G[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_brute_force(self, rng):
        g = make_grid(0, 1, 9)
        X = rng.normal(size=(4, 9))
        G = gram_matrix(FunctionalData(g, X), 2).entries
        for i in range(4):
            for j in range(4):
                assert G[i, j] == pytest.approx(brute_feature_inner(X[i], X[j], g.weights, 2),
                                                rel=1e-10)

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            gram_matrix([], 1)

    def test_mixed_grids(self):
        with pytest.raises(GridMismatchError):
            gram_matrix([FunctionalSample(make_grid(0, 1, 3), np.ones(3)),
                         FunctionalSample(make_grid(0, 1, 4), np.ones(4))], 1)

    @given(n=st.integers(1, 12), p=st.integers(0, 4), seed=st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_properties(self, n, p, seed):
        g = make_grid(0, 1, 13)
        X = np.random.default_rng(seed).normal(size=(n, 13))
        data = FunctionalData(g, X)
        G = gram_matrix(data, p)
        M = G.entries
        np.testing.assert_array_equal(M, M.T)
        assert np.all(np.diag(M) >= 1.0)
        ev = np.linalg.eigvalsh(M)
        assert ev[0] >= -1e-10 * ev[-1]
        for i in range(n):
            for j in range(n):
                assert M[i, j] == pytest.approx(feature_inner(data[i], data[j], p), rel=1e-14,
                                                abs=1e-14)


class TestBasisAndCsv:
    def test_cosine_orthonormal(self):
        g = make_grid(0, 1, 51)
        E = cosine_basis(g, 25)
        np.testing.assert_allclose((E * g.weights) @ E.T, np.eye(25), atol=1e-12)

    def test_csv_roundtrip(self, tmp_path, rng):
        g = make_grid(-1, 2, 7)
        data = FunctionalData(g, rng.normal(size=(3, 7)))
        back = read_csv(write_csv(data, tmp_path / "x.csv"))
        assert back.grid == g
        np.testing.assert_array_equal(back.values, data.values)

    def test_csv_rejects_uneven(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0,0.3,1\n1,2,3\n")
        with pytest.raises(InvalidArgumentError):
            read_csv(p)

    def test_sample_validation(self):
        g = make_grid(0, 1, 3)
        with pytest.raises(InvalidArgumentError):
            FunctionalSample(g, [1.0, 2.0])
        with pytest.raises(InvalidArgumentError):
            FunctionalSample(g, [1.0, np.nan, 2.0])
