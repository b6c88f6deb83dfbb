import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fofpoly import (GridMismatchError, Holder, InvalidArgumentError, NoiseSpec,
                     OutOfRangeError, ProcessSpec, SpectralPolyRegressor, Tabulated,
                     build_oracle, effective_dimension, estimation_error, gen_dataset,
                     make_grid, make_target, oracle_basis_error, prediction_error, psi,
                     rate_fit, theoretical_lambda, theoretical_rate)
from fofpoly.bruteforce import components_norm, estimate_components, target_components


def fitted(oracle, target, spec, gx, gy, n, lam, family="tikhonov", sigma2=1.0, seed=0):
    X, Y = gen_dataset(oracle, target, spec, NoiseSpec(sigma2), n, gy, seed)
    return SpectralPolyRegressor(oracle.degree, lam, family, gx, gy).fit(X.values, Y.values)


class TestEstimationError:
    def test_zero_estimator(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 3, seed=1)
        probe = fitted(oracle, t, spec, gx, gy, 10, 1.0, "cutoff")
        est = probe.with_alpha(2 * probe.eig_.eigenvalues[0])
        err = estimation_error(est, oracle, t)
        mu = oracle.eigenvalues[:3]
        expected = np.sqrt(np.sum((mu[:, None] * t.coefficients) ** 2))
        assert err.value == pytest.approx(expected, rel=1e-10)
        assert err.method == "gram-exact" and err.s == 0.0

    def test_zero_target(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 2, coefficients=np.zeros((2, 3)))
        est = fitted(oracle, t, spec, gx, gy, 10, 0.1, sigma2=0.0)
        assert estimation_error(est, oracle, t).value <= 1e-10

    def test_tensor_grid(self):
        gx, gy = make_grid(0, 1, 9), make_grid(0, 1, 7)
        spec = ProcessSpec(K=4, a=2.0, kappa=5.0)
        oracle = build_oracle(spec, gx, 200, 2, seed=3)
        t = make_target(oracle, Holder(1.0), 1.0, 4, seed=2)
        est = fitted(oracle, t, spec, gx, gy, 4, 0.05, seed=9)
        diff = [a - b for a, b in zip(estimate_components(est), target_components(oracle, t, gy))]
        brute = components_norm(diff, gx, gy)
        assert estimation_error(est, oracle, t).value == pytest.approx(brute, rel=1e-6)

    def test_in_span_methods_agree(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 3, seed=4)
        est = fitted(oracle, t, spec, gx, gy, 30, 0.01)
        a = estimation_error(est, oracle, t).value
        b = oracle_basis_error(est, oracle, t, 0.0).value
        assert a == pytest.approx(b, rel=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_error_ordering(self, small_setup, seed):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 3, seed=seed)
        est = fitted(oracle, t, spec, gx, gy, 20, 0.05, seed=seed)
        e0 = oracle_basis_error(est, oracle, t, 0.0).value
        e1 = oracle_basis_error(est, oracle, t, 0.5).value
        assert e1 <= np.sqrt(oracle.eigenvalues[0] + 1e-12) * e0

    def test_mismatch(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 2, seed=0)
        X, Y = gen_dataset(oracle, t, spec, NoiseSpec(1.0), 5, gy, 0)
        est = SpectralPolyRegressor(2, 0.1, "tikhonov", gx, gy).fit(X.values, Y.values)
        with pytest.raises(InvalidArgumentError):
            estimation_error(est, oracle, t)
        g2 = make_grid(0, 2, 41)
        est = SpectralPolyRegressor(1, 0.1, "tikhonov", g2, gy).fit(X.values, Y.values)
        with pytest.raises(GridMismatchError):
            estimation_error(est, oracle, t)


@pytest.fixture(scope="module")
def big_oracle():
    gx, gy = make_grid(0.0, 1.0, 41), make_grid(0.0, 1.0, 21)
    spec = ProcessSpec(K=10, a=2.0, kappa=10.0)
    return spec, gx, gy, build_oracle(spec, gx, 3000, 1, seed=21)


class TestPredictionError:
    def test_exact_recovery(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 3, seed=3)
        probe = fitted(oracle, t, spec, gx, gy, 40, 1.0, "cutoff", sigma2=0.0)
        est = probe.with_alpha(0.5 * probe.eig_.smallest_positive())
        assert estimation_error(est, oracle, t).value <= 1e-6
        err = prediction_error(est, oracle, t, spec, n_test=200, seed=1)
        assert err.value <= 1e-7 and err.method == "holdout-MC" and err.n_test == 200

    def test_pure_noise_stability(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 2, coefficients=np.zeros((2, 3)))
        est = fitted(oracle, t, spec, gx, gy, 15, 0.1, sigma2=1.0)
        a = prediction_error(est, oracle, t, spec, n_test=1000, seed=5)
        b = prediction_error(est, oracle, t, spec, n_test=2000, seed=6)
        assert abs(a.value - b.value) < 3 * np.hypot(a.stderr, b.stderr)

    def test_matches_gram_half_norm(self, big_oracle):
        spec, gx, gy, oracle = big_oracle
        t = make_target(oracle, Holder(1.0), 1.0, 3, seed=7)
        est = fitted(oracle, t, spec, gx, gy, 25, 0.02, sigma2=0.5, seed=2)
        mc = prediction_error(est, oracle, t, spec, n_test=5000, seed=3).value
        exact = oracle_basis_error(est, oracle, t, 0.5).value
        assert mc == pytest.approx(exact, rel=0.05)

    def test_n_test_minimum(self, small_setup):
        spec, gx, gy, oracle = small_setup
        t = make_target(oracle, Holder(1.0), 1.0, 2, seed=0)
        est = fitted(oracle, t, spec, gx, gy, 5, 0.1)
        with pytest.raises(InvalidArgumentError):
            prediction_error(est, oracle, t, spec, n_test=99)


class TestEffectiveDimension:
    def test_single(self):
        assert effective_dimension([0.3], 0.3) == 0.5

    def test_slope(self):
        mu = np.arange(1, 10_001, dtype=float) ** -2
        lams = np.logspace(-4, -1, 20)
        N = [effective_dimension(mu, l) for l in lams]
        slope = np.polyfit(np.log(lams), np.log(N), 1)[0]
        assert abs(slope + 0.5) <= 0.1

    def test_large_lambda(self):
        mu = np.arange(1, 50, dtype=float) ** -2
        vals = [effective_dimension(mu, l) for l in np.logspace(0, 12, 13)]
        assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-11

    @given(mu=st.lists(st.floats(0, 10), min_size=1, max_size=30),
           lams=st.lists(st.floats(1e-6, 1e3), min_size=2, max_size=6, unique=True))
    @settings(max_examples=100, deadline=None)
    def test_monotone_and_rank_bound(self, mu, lams):
        lams = sorted(lams)
        vals = [effective_dimension(mu, l) for l in lams]
        rank = np.count_nonzero(mu)
        assert all(v <= rank + 1e-12 for v in vals)
        if rank:
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            effective_dimension([1.0], 0.0)
        with pytest.raises(InvalidArgumentError):
            effective_dimension([-1.0], 1.0)


class TestTheoreticalLambda:
    def test_closed_form(self):
        lam = theoretical_lambda(1000, Holder(1.0), 2.0)
        assert lam == pytest.approx(1000 ** (-2 / 7), rel=1e-9)

    def test_half_holder(self):
        lam = theoretical_lambda(16, Holder(0.5), 2.0)
        assert lam == pytest.approx(16 ** (-0.5 / 1.25), rel=1e-9)

    def test_monotone(self):
        lams = [theoretical_lambda(n, Holder(1.0), 2.0) for n in (1, 10, 100, 10**4, 10**8)]
        assert all(a > b for a, b in zip(lams, lams[1:]))

    @given(n=st.integers(1, 10**9), r=st.floats(0.25, 3), b=st.floats(1.1, 5))
    @settings(max_examples=100, deadline=None)
    def test_consistency(self, n, r, b):
        phi = Holder(r)
        lam = theoretical_lambda(n, phi, b)
        assert psi(lam, phi, b) == pytest.approx(n**-0.5, rel=1e-9)

    def test_tabulated(self):
        phi = Tabulated([0, 0.5, 1.0], [0, 0.25, 1.0])
        lam = theoretical_lambda(50, phi, 2.0)
        assert float(psi(lam, phi, 2.0)) == pytest.approx(50**-0.5, rel=1e-9)

    def test_out_of_range(self):
        phi = Tabulated([0, 1.0], [0, 0.01])
        with pytest.raises(OutOfRangeError):
            theoretical_lambda(2, phi, 2.0)
        with pytest.raises(OutOfRangeError):
            theoretical_lambda(10**300, Holder(1.0), 2.0)
        with pytest.raises(InvalidArgumentError):
            theoretical_lambda(10, Holder(1.0), 1.0)


class TestRates:
    def test_examples(self):
        assert theoretical_rate(2, 1, 0) == pytest.approx(-2 / 7, abs=1e-15)
        assert theoretical_rate(2, 1, 0.5) == pytest.approx(-3 / 7, abs=1e-15)
        assert theoretical_rate(2, 1e9, 0) == pytest.approx(-0.5, abs=1e-8)
        with pytest.raises(InvalidArgumentError):
            theoretical_rate(2, 1, 0.75)

    def test_exact_power(self):
        ns = [64, 128, 256, 512, 1024]
        rep = rate_fit([(n, 3.0 * n ** (-1 / 3)) for n in ns], theoretical_slope=-1 / 3)
        assert rep.fitted_slope == pytest.approx(-1 / 3, abs=1e-12)
        assert rep.slope_gap < 1e-12
        assert np.max(np.abs(rep.residuals)) < 1e-12

    def test_perturbed_power(self):
        rng = np.random.default_rng(0)
        ns = np.array([64, 128, 256, 512, 1024])
        errs = 2.0 * ns ** (-1 / 3) * (1 + 0.01 * rng.standard_normal(ns.size))
        rep = rate_fit(list(zip(ns, errs)))
        assert abs(rep.fitted_slope + 1 / 3) <= 0.02

    def test_constant(self):
        rep = rate_fit([(n, 0.7, 0.1) for n in (10, 20, 40, 80)], replicates=20)
        assert rep.fitted_slope == pytest.approx(0.0, abs=1e-12)
        assert rep.stds == [0.1] * 4 and rep.replicates == 20
        d = rep.to_dict()
        for key in ("n_values", "means", "stds", "fitted_slope", "theoretical_slope",
                    "replicates"):
            assert key in d

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            rate_fit([(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)])
        with pytest.raises(InvalidArgumentError):
            rate_fit([(1, 1.0), (2, 1.0), (3, 1.0)])
