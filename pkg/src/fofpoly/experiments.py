"""Batch experiments behind the command-line runner.

Every runner takes a validated :class:`ExperimentConfig` and returns an
:class:`ExperimentResult`; nothing here touches the filesystem except
:func:`write_outputs`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bruteforce import (brute_predict, components_inner, components_norm, direct_tikhonov,
                         estimate_components, split_components)
from .config import ExperimentConfig
from .estimator import SpectralPolyRegressor
from .exceptions import ConfigError, DegenerateOracleError, InvalidArgumentError
from .functional import make_grid
from .io import loglog_svg, write_json, write_table
from .metrics import (effective_dimension, estimation_error, prediction_error, rate_fit,
                      theoretical_lambda, theoretical_rate)
from .minimax import lower_bound_report
from .regularization import FAMILY_NAMES, check_family, g_apply, get_family, standard_grids
from .source import Holder, index_function_from_spec
from .synth import NoiseSpec, ProcessSpec, build_oracle, gen_dataset, make_target

__all__ = [
    "ExperimentResult",
    "run_experiment",
    "run_rate_sweep",
    "run_oracle_test",
    "run_check_reg",
    "run_minimax",
    "run_effdim",
    "write_outputs",
]

# seed-stream tags, so that each random object has its own SeedSequence
_ORACLE, _TARGET, _DATA, _HOLDOUT, _INSTANCES = range(1, 6)


@dataclass
class ExperimentResult:
    name: str
    report: dict
    header: list
    rows: list
    series: list = field(default_factory=list)
    plot: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)
    ok: bool = True


def _config_record(cfg: ExperimentConfig) -> dict:
    # the output location is not part of the experiment
    return cfg.model_dump(mode="json", exclude={"output_dir"})


def _index_function(cfg: ExperimentConfig):
    spec = cfg.index_function
    try:
        if spec.kind == "holder":
            return Holder(spec.r)
        return index_function_from_spec({"kind": "table", "x": spec.x, "y": spec.y})
    except InvalidArgumentError as exc:
        raise ConfigError(f"index_function: {exc}") from exc


def _grids(cfg: ExperimentConfig):
    g = cfg.grid
    return make_grid(g.s1_lo, g.s1_hi, g.s1_points), make_grid(g.s2_lo, g.s2_hi, g.s2_points)


def _seed(cfg, *tags):
    return np.random.SeedSequence([cfg.seed, *tags])


# -- rate sweep ---------------------------------------------------------------

def run_rate_sweep(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Mean estimation and prediction error over replicates, then log-log slopes."""
    gx, gy = _grids(cfg)
    spec = ProcessSpec(cfg.process.K, cfg.process.a, cfg.process.kappa)
    phi = _index_function(cfg)
    oracle = build_oracle(spec, gx, cfg.oracle.N, cfg.degree, _seed(cfg, _ORACLE))
    target = make_target(oracle, phi, cfg.R, cfg.oracle.n_modes, seed=_seed(cfg, _TARGET),
                         n_basis=cfg.oracle.n_basis)
    noise = NoiseSpec(cfg.sigma2, cfg.noise_modes)
    b_used = cfg.b if cfg.b is not None else oracle.decay
    if not np.isfinite(b_used):
        raise DegenerateOracleError(f"oracle rank {oracle.rank} is too small to estimate b; "
                                    "set b in the config", rank=oracle.rank)
    rule = cfg.lambda_rule

    if rule.kind == "theoretical":
        lambdas = {n: theoretical_lambda(n, phi, b_used) for n in cfg.n_list}
        candidates = None
    else:
        if not rule.lo < rule.hi:
            raise ConfigError("lambda_rule needs lo < hi")
        candidates = np.logspace(math.log10(rule.lo), math.log10(rule.hi), rule.num)
        lambdas = {}

    def replicate(task):
        n, rep = task
        X, Y = gen_dataset(oracle, target, spec, noise, n, gy, _seed(cfg, _DATA, n, rep))
        if candidates is None:
            lam = lambdas[n]
            est = SpectralPolyRegressor(cfg.degree, lam, cfg.family, gx, gy).fit(X.values, Y.values)
        else:
            # best lambda against the known target
            est = SpectralPolyRegressor(cfg.degree, candidates[0], cfg.family, gx, gy)
            est.fit(X.values, Y.values)
            errs = [estimation_error(est.with_alpha(l), oracle, target).value for l in candidates]
            lam = float(candidates[int(np.argmin(errs))])
            est = est.with_alpha(lam)
        e0 = estimation_error(est, oracle, target).value
        e1 = prediction_error(est, oracle, target, spec, cfg.n_test,
                              seed=_seed(cfg, _HOLDOUT, n, rep)).value
        return n, rep, lam, e0, e1

    tasks = [(n, rep) for n in cfg.n_list for rep in range(cfg.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(replicate, tasks))
    else:
        results = [replicate(t) for t in tasks]
    results.sort(key=lambda t: (t[0], t[1]))

    rows, pts0, pts1, lam_used = [], [], [], {}
    ddof = 1 if cfg.replicates > 1 else 0
    for n in cfg.n_list:
        sub = [r for r in results if r[0] == n]
        lam_n = np.array([r[2] for r in sub])
        e0 = np.array([r[3] for r in sub])
        e1 = np.array([r[4] for r in sub])
        lam_used[n] = float(lam_n[0]) if candidates is None else float(np.exp(np.mean(np.log(lam_n))))
        pts0.append((n, float(e0.mean()), float(e0.std(ddof=ddof))))
        pts1.append((n, float(e1.mean()), float(e1.std(ddof=ddof))))
        rows.append([n, lam_used[n], pts0[-1][1], pts0[-1][2], pts1[-1][1], pts1[-1][2], len(sub)])

    r = phi.r if isinstance(phi, Holder) else None
    slope0 = theoretical_rate(b_used, r, 0.0) if r is not None else None
    slope1 = theoretical_rate(b_used, r, 0.5) if r is not None else None
    est_report = rate_fit(pts0, slope0, cfg.replicates)
    pred_report = rate_fit(pts1, slope1, cfg.replicates)

    report = {
        "experiment": "rate-sweep",
        "config": _config_record(cfg),
        "oracle": {"N": oracle.N, "rank": oracle.rank, "b_hat": oracle.decay,
                   "top_eigenvalues": oracle.eigenvalues[:5].tolist()},
        "b_used": b_used,
        "r": r,
        "target_norm": target.norm(oracle, gy),
        "lambda_rule": rule.kind,
        "lambdas": [{"n": n, "lambda": lam_used[n]} for n in cfg.n_list],
        "estimation": dict(est_report.to_dict(), s=0.0, method="gram-exact",
                           slope_gap=est_report.slope_gap),
        "prediction": dict(pred_report.to_dict(), s=0.5, method="holdout-MC",
                           n_test=cfg.n_test, slope_gap=pred_report.slope_gap),
    }
    ns = np.array(cfg.n_list, dtype=float)
    series = [("estimation (s=0)", ns, [p[1] for p in pts0], "o-"),
              ("prediction (s=1/2)", ns, [p[1] for p in pts1], "s-")]
    for label, rep_, slope in (("s=0", est_report, slope0), ("s=1/2", pred_report, slope1)):
        if slope is not None:
            ref = rep_.means[0] * (ns / ns[0]) ** slope
            series.append((f"reference n^{slope:.3f} ({label})", ns, ref, "--"))
    lines = [f"b_hat = {oracle.decay:.4f} (rank {oracle.rank})"]
    for label, rep_ in (("s=0", est_report), ("s=1/2", pred_report)):
        theo = "n/a" if rep_.theoretical_slope is None else f"{rep_.theoretical_slope:.4f}"
        lines.append(f"{label}: fitted slope {rep_.fitted_slope:.4f}, theoretical {theo}")
    return ExperimentResult(
        "rate-sweep", report,
        ["n", "lambda", "est_mean", "est_std", "pred_mean", "pred_std", "replicates"],
        rows, series, {"title": "error vs sample size", "ylabel": "mean error"}, lines,
    )


# -- oracle test ----------------------------------------------------------------

def run_oracle_test(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Gram eigen-path against a direct tensor-grid Tikhonov solve on random instances."""
    ot = cfg.oracle_test
    rng = np.random.default_rng(_seed(cfg, _INSTANCES))
    rows, max_dev = [], 0.0
    for i in range(ot.instances):
        n = int(rng.integers(1, ot.max_n + 1))
        p = i % (ot.max_degree + 1)
        m1 = int(rng.integers(2, ot.max_grid_points + 1))
        m2 = int(rng.integers(2, ot.max_grid_points + 1))
        lam = float(ot.lambdas[i % len(ot.lambdas)])
        gx, gy = make_grid(0.0, 1.0, m1), make_grid(0.0, 1.0, m2)
        X, Y = rng.normal(size=(n, m1)), rng.normal(size=(n, m2))
        x_new = rng.normal(size=m1)

        est = SpectralPolyRegressor(p, lam, "tikhonov", gx, gy).fit(X, Y)
        gram_path = estimate_components(est)
        direct = split_components(direct_tikhonov(X, Y, gx, gy, p, lam), m1, p)
        diff = [a - b for a, b in zip(gram_path, direct)]
        ref = components_norm(direct, gx, gy)
        est_dev = components_norm(diff, gx, gy) / ref
        pred_a = est.predict(x_new[None, :])[0]
        pred_b = brute_predict(direct, x_new, gx)
        pred_dev = math.sqrt(float(np.sum((pred_a - pred_b) ** 2 * gy.weights))
                             / max(float(np.sum(pred_b**2 * gy.weights)), 1e-300))
        # norm identity: Gram-side norm vs quadrature of the materialized components
        norm_dev = abs(est.norm() - math.sqrt(components_inner(gram_path, gram_path, gx, gy)))
        norm_dev /= max(est.norm(), 1e-300)
        dev = max(est_dev, pred_dev, norm_dev)
        max_dev = max(max_dev, dev)
        rows.append([i, n, p, m1, m2, lam, est_dev, pred_dev, norm_dev])

    ok = max_dev <= ot.tolerance
    report = {
        "experiment": "oracle-test",
        "config": _config_record(cfg),
        "instances": [dict(zip(["instance", "n", "degree", "m1", "m2", "lambda",
                                "estimate_rel_dev", "prediction_rel_dev", "norm_rel_dev"], r))
                      for r in rows],
        "max_relative_deviation": max_dev,
        "tolerance": ot.tolerance,
        "passed": ok,
    }
    series = [("estimate", [r[0] + 1 for r in rows], [max(r[6], 1e-18) for r in rows], "o"),
              ("prediction", [r[0] + 1 for r in rows], [max(r[7], 1e-18) for r in rows], "s")]
    return ExperimentResult(
        "oracle-test", report,
        ["instance", "n", "degree", "m1", "m2", "lambda", "estimate_rel_dev",
         "prediction_rel_dev", "norm_rel_dev"],
        rows, series,
        {"title": "Gram path vs direct solve", "xlabel": "instance",
         "ylabel": "relative deviation", "logx": False},
        [f"max relative deviation = {max_dev:.3e} (tolerance {ot.tolerance:g})"], ok,
    )


# -- regularization checks --------------------------------------------------------

def run_check_reg(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    cr = cfg.check_reg
    sig, lams = standard_grids(cr.n_sigma, cr.n_lambda)
    reports, rows, lines, ok = [], [], [], True
    for name in FAMILY_NAMES:
        rep = check_family(name, sig, lams, tuple(cr.exponents), threshold=cr.threshold)
        d = rep.to_dict()
        d["declared_constants_ok"] = rep.satisfies()
        ok = ok and d["declared_constants_ok"]
        reports.append(d)
        rows.append([rep.family, rep.measured_A, rep.measured_B_times_lambda_sup, rep.measured_D]
                    + [bool(rep.qualification_pass[q]) for q in cr.exponents])
        lines.append(f"{rep.family}: A={rep.measured_A:.4g} B={rep.measured_B_times_lambda_sup:.4g}"
                     f" D={rep.measured_D:.4g}")
        for q in cr.exponents:
            lines.append(f"{rep.family} qualification_pass[{q:g}] = "
                         f"{str(bool(rep.qualification_pass[q])).lower()}")
    lam = 1e-2
    series = [(f"{get_family(n).name}: sigma*g(sigma), lambda={lam:g}", sig,
               sig * np.asarray(g_apply(get_family(n), lam, sig)), "-") for n in FAMILY_NAMES]
    report = {"experiment": "check-reg", "config": _config_record(cfg), "families": reports,
              "passed": ok}
    return ExperimentResult(
        "check-reg", report,
        ["family", "measured_A", "measured_B", "measured_D"]
        + [f"qualification_{q:g}" for q in cr.exponents],
        rows, series,
        {"title": "filter functions", "xlabel": "sigma", "ylabel": "sigma g(sigma)",
         "logy": False},
        lines, ok,
    )


# -- minimax construction ------------------------------------------------------------

def run_minimax(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    mm = cfg.minimax
    if not cfg.sigma2 > 0:
        raise ConfigError("the minimax construction needs sigma2 > 0")
    b = cfg.b if cfg.b is not None else 2.0
    phi = _index_function(cfg)
    entries, rows, lines, ok = [], [], [], True
    for M in mm.M_values:
        for s in mm.s_values:
            rep = lower_bound_report(M, b=b, s=s, phi=phi, R=cfg.R, sigma2=cfg.sigma2, u=mm.u,
                                     b0=mm.b0, b1=mm.b1, seed=cfg.seed)
            passed = (rep["min_separation"] >= rep["separation_threshold"]
                      and rep["kl_budget_ok"] and rep["tsybakov_bound"] > 0)
            rep["passed"] = passed
            ok = ok and passed
            entries.append(rep)
            rows.append([M, s, rep["N"], rep["n"], rep["epsilon"], rep["min_separation"],
                         rep["separation_threshold"], rep["max_kl_over_log_N"],
                         rep["tsybakov_bound"], passed])
            lines.append(f"M={M} s={s:g}: N={rep['N']} eps={rep['epsilon']:.4g} "
                         f"min sep={rep['min_separation']:.4g} (>= {rep['separation_threshold']:.4g})"
                         f" max KL/log N={rep['max_kl_over_log_N']:.4g} (<= {mm.u:g})"
                         f" bound={rep['tsybakov_bound']:.4f}")
    series = []
    for s in mm.s_values:
        sub = [r for r in entries if r["s"] == s]
        series.append((f"max KL / log N, s={s:g}", [r["M"] for r in sub],
                       [r["max_kl_over_log_N"] for r in sub], "o-"))
    series.append((f"budget u={mm.u:g}", mm.M_values, [mm.u] * len(mm.M_values), "--"))
    report = {"experiment": "minimax", "config": _config_record(cfg), "b": b,
              "reports": entries, "passed": ok}
    return ExperimentResult(
        "minimax", report,
        ["M", "s", "N", "n", "epsilon", "min_separation", "separation_threshold",
         "max_kl_over_log_N", "tsybakov_bound", "passed"],
        rows, series, {"title": "KL budget of the hypothesis family", "xlabel": "M",
                       "ylabel": "max KL / log N", "logx": False},
        lines, ok,
    )


# -- effective dimension ----------------------------------------------------------------

def run_effdim(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    ed = cfg.effdim
    if not ed.lambda_lo < ed.lambda_hi:
        raise ConfigError("effdim needs lambda_lo < lambda_hi")
    lams = np.logspace(math.log10(ed.lambda_lo), math.log10(ed.lambda_hi), ed.num)
    m = np.arange(1, ed.m_max + 1, dtype=float)
    entries, rows, series, lines = [], [], [], []
    for b in ed.b_values:
        mu = m**-b
        N = np.array([effective_dimension(mu, lam) for lam in lams])
        slope, intercept = np.polyfit(np.log(lams), np.log(N), 1)
        # sum over the dropped modes is below m_max^{1-b} / ((b-1) lambda)
        tail = ed.m_max ** (1 - b) / ((b - 1) * lams[0])
        entries.append({"b": b, "fitted_slope": float(slope), "theoretical_slope": -1.0 / b,
                        "slope_gap": abs(float(slope) + 1.0 / b), "intercept": float(intercept),
                        "truncation_tail_bound": tail / N[0],
                        "lambdas": lams.tolist(), "N": N.tolist()})
        rows.extend([b, float(l), float(v)] for l, v in zip(lams, N))
        series.append((f"b={b:g}", lams, N, "o-"))
        lines.append(f"b={b:g}: fitted slope {slope:.4f}, -1/b = {-1.0 / b:.4f}")
    report = {"experiment": "effdim", "config": _config_record(cfg), "m_max": ed.m_max,
              "decays": entries}
    return ExperimentResult(
        "effdim", report, ["b", "lambda", "N"], rows, series,
        {"title": "effective dimension", "xlabel": "lambda", "ylabel": "N(lambda)"}, lines,
    )


RUNNERS = {
    "rate-sweep": run_rate_sweep,
    "oracle-test": run_oracle_test,
    "check-reg": run_check_reg,
    "minimax": run_minimax,
    "effdim": run_effdim,
}


def run_experiment(name: str, cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(RUNNERS)}")
    if int(threads) != threads or threads < 1:
        raise ConfigError("threads must be a positive integer")
    return RUNNERS[name](cfg, int(threads))


def write_outputs(result: ExperimentResult, out_dir) -> dict:
    """Write ``report.json``, ``table.csv`` and ``plot.svg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": write_json(result.report, out / "report.json"),
        "table": write_table(result.rows, result.header, out / "table.csv"),
    }
    paths["plot"] = loglog_svg(out / "plot.svg", result.series, **result.plot)
    return paths
