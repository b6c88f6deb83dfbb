"""Acceptance criteria; the terminal summary lists one PASS/FAIL line per criterion."""

import time

import numpy as np
import pytest

from fofpoly import (Holder, ProcessSpec, SpectralPolyRegressor, build_oracle, check_family,
                     estimation_error, make_grid, make_target, oracle_basis_error,
                     source_coefficients, theoretical_rate)
from fofpoly.config import load_config
from fofpoly.experiments import run_experiment, write_outputs
from fofpoly.minimax import _search
from fofpoly.synth import clean_response

SLOPE_TOL = 0.15


@pytest.fixture(scope="module")
def default_sweep(tmp_path_factory):
    """The default rate sweep run twice into separate directories."""
    out = []
    for tag in ("first", "second"):
        result = run_experiment("rate-sweep", load_config())
        d = tmp_path_factory.mktemp(tag)
        write_outputs(result, d)
        out.append((result, d))
    return out


def test_criterion_1_gram_oracle_equivalence():
    t0 = time.perf_counter()
    result = run_experiment("oracle-test", load_config())
    elapsed = time.perf_counter() - t0
    rep = result.report
    assert len(rep["instances"]) == 10
    for inst in rep["instances"]:
        assert inst["n"] <= 5 and inst["degree"] <= 2
        assert inst["m1"] <= 9 and inst["m2"] <= 9
        assert inst["lambda"] in (0.01, 0.1, 1.0)
    assert rep["max_relative_deviation"] <= 1e-8
    assert elapsed < 10.0


def test_criterion_2_regularization_families():
    t0 = time.perf_counter()
    reps = {name: check_family(name) for name in ("tikhonov", "cutoff", "landweber")}
    elapsed = time.perf_counter() - t0
    for rep in reps.values():
        assert rep.sigma_grid.size == 200 and rep.lambda_grid.size == 20
        assert rep.satisfies(A=1.0, B=2.0, D=1.0)
    tik = reps["tikhonov"].qualification_pass
    assert tik[1] and not tik[2]
    for name in ("cutoff", "landweber"):
        assert all(reps[name].qualification_pass[q] for q in (1, 2, 4))
    assert elapsed < 5.0


def test_criterion_3_convergence_rates(default_sweep):
    rep = default_sweep[0][0].report
    b_hat = rep["oracle"]["b_hat"]
    assert 1.8 <= b_hat <= 2.2
    cfg = rep["config"]
    assert cfg["n_list"] == [64, 128, 256, 512, 1024]
    assert cfg["replicates"] >= 20 and cfg["n_test"] == 500
    assert cfg["family"] == "tikhonov" and cfg["lambda_rule"]["kind"] == "theoretical"
    assert rep["r"] == 1.0
    est, pred = rep["estimation"], rep["prediction"]
    assert est["s"] == 0.0 and pred["s"] == 0.5 and pred["method"] == "holdout-MC"
    assert est["theoretical_slope"] == pytest.approx(theoretical_rate(b_hat, 1.0, 0.0))
    assert pred["theoretical_slope"] == pytest.approx(theoretical_rate(b_hat, 1.0, 0.5))
    assert abs(est["fitted_slope"] - est["theoretical_slope"]) <= SLOPE_TOL
    assert abs(pred["fitted_slope"] - pred["theoretical_slope"]) <= SLOPE_TOL


def test_criterion_4_effective_dimension():
    t0 = time.perf_counter()
    result = run_experiment("effdim", load_config())
    elapsed = time.perf_counter() - t0
    decays = result.report["decays"]
    assert [d["b"] for d in decays] == [1.5, 2.0, 3.0]
    for d in decays:
        assert d["lambdas"][0] == pytest.approx(1e-4) and d["lambdas"][-1] == pytest.approx(0.1)
        assert abs(d["fitted_slope"] + 1.0 / d["b"]) <= 0.1
    assert elapsed < 1.0


def test_criterion_5_minimax_construction():
    _search.cache_clear()
    t0 = time.perf_counter()
    result = run_experiment("minimax", load_config())
    elapsed = time.perf_counter() - t0
    reps = result.report["reports"]
    assert result.report["b"] == 2.0
    assert sorted((r["M"], r["s"]) for r in reps) == [(8, 0.0), (8, 0.5), (16, 0.0), (16, 0.5)]
    for r in reps:
        assert r["min_separation"] >= r["epsilon"] ** 2 / 8
        assert r["max_kl_over_log_N"] <= 0.1
        assert r["tsybakov_bound"] > 0
    assert elapsed < 5.0


@pytest.mark.parametrize("degree", [1, 2])
def test_criterion_6_interpolation(degree):
    gx, gy = make_grid(0.0, 1.0, 41), make_grid(0.0, 1.0, 21)
    oracle = build_oracle(ProcessSpec(K=6, a=2.0, kappa=10.0), gx, 100, degree, seed=3)
    target = make_target(oracle, Holder(1.0), 1.0, 3, seed=4)
    # training on the oracle inputs puts beta* in the span of the training features
    X = oracle.inputs.values
    Y = clean_response(oracle, target, X, gy)
    probe = SpectralPolyRegressor(degree, 1.0, "cutoff", gx, gy).fit(X, Y)
    est = probe.with_alpha(0.5 * probe.eig_.smallest_positive())
    assert estimation_error(est, oracle, target).value <= 1e-6
    assert oracle_basis_error(est, oracle, target).value <= 1e-6
    assert np.abs(est.predict(X) - Y).max() <= 1e-8


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_criterion_7_source_roundtrip(small_setup, r):
    _, _, gy, oracle = small_setup
    target = make_target(oracle, Holder(r), 1.0, 3, seed=21)
    v = source_coefficients(oracle, target, gy)
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-8


def test_criterion_8_determinism(default_sweep):
    (_, a), (_, b) = default_sweep
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
