"""Release gate: one test per pinned claim, with explicit tolerances and budgets.

Every test here freezes a scenario (sizes, seeds, run counts) and a numeric
band or bound. Monte-Carlo scenarios use enough replicates that the bands
hold with margin under any healthy build; the algebraic and numeric checks
(truncation equivalence, CDF accuracy, MLE stationarity, determinism) are
exact up to stated tolerances. Failures print the measured values.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
import scipy.stats

from asics import (
    FittedLogistic,
    SelectiveReport,
    SelectiveTest,
    SimScenario,
    SyntheticDesign,
    generate_synthetic,
    run_scenario,
)
from asics import selective
from asics.cli import main as cli_main
from asics.logistic import FitConfig, fit_mle, score
from asics.screening import select_top_k
from asics.selftest import tn_cdf_quadrature
from asics.sim import expand_pattern, power_for_tpr, replicate_report
from asics.truncnorm import TruncatedNormalParams, cdf

THREADS = min(8, os.cpu_count() or 1)


def _null_cell(method, d=200, k=1, n=100, rho=0.0, runs=1000):
    return SimScenario(
        n=n, d=d, rho=rho, beta_pattern="null", k=k, runs=runs,
        master_seed=0, method=method,
    )


def test_01_null_rejection_rates_at_desk_scale():
    started = time.monotonic()
    rates = {
        method: run_scenario(_null_cell(method), threads=1).rejection_rate
        for method in ("asics", "data_splitting", "nominal")
    }
    elapsed = time.monotonic() - started

    assert elapsed < 300.0, f"single-threaded runtime {elapsed:.1f}s exceeds 300s"
    assert 0.03 <= rates["asics"] <= 0.07, (
        f"selective null rejection {rates['asics']:.3f} outside [0.03, 0.07]"
    )
    assert 0.00 <= rates["data_splitting"] <= 0.04, (
        f"data-splitting null rejection {rates['data_splitting']:.3f} outside [0.00, 0.04]"
    )
    assert 0.15 <= rates["nominal"] <= 0.32, (
        f"nominal null rejection {rates['nominal']:.3f} outside [0.15, 0.32]"
    )


def test_02_nominal_inflation_grows_with_dimension():
    rates = [
        run_scenario(_null_cell("nominal", d=d), threads=THREADS).rejection_rate
        for d in (200, 500, 1000)
    ]
    assert rates[0] <= rates[1] <= rates[2], (
        f"nominal null rejection not non-decreasing across d=200,500,1000: {rates}"
    )


def _null_p_values(method):
    sc = _null_cell(method)
    with ProcessPoolExecutor(max_workers=THREADS) as pool:
        reports = pool.map(partial(replicate_report, sc), range(sc.runs), chunksize=16)
        return np.array([r.tests[0].p_value for r in reports])


def test_03_selective_pivot_uniform_nominal_pivot_not():
    critical = scipy.stats.kstwobign.isf(0.01) / math.sqrt(1000.0)

    selective_ks = scipy.stats.kstest(_null_p_values("asics"), "uniform")
    assert selective_ks.pvalue > 0.01, (
        f"selective p-values reject uniformity: KS stat {selective_ks.statistic:.4f}, "
        f"p {selective_ks.pvalue:.4f}"
    )

    nominal_ks = scipy.stats.kstest(_null_p_values("nominal"), "uniform")
    assert nominal_ks.statistic >= 3.0 * critical, (
        f"nominal KS stat {nominal_ks.statistic:.4f} below 3x critical {critical:.4f}"
    )


def test_04_familywise_error_controlled():
    for method in ("asics", "data_splitting"):
        for k in (5, 10):
            for rho in (0.0, 0.5):
                sc = _null_cell(method, k=k, n=500, rho=rho)
                m = run_scenario(sc, threads=THREADS)
                assert m.fwer <= 0.08, (
                    f"{method} fwer {m.fwer:.3f} > 0.08 at k={k}, rho={rho}"
                )


def test_05_power_margin_over_data_splitting():
    powers = {}
    for method in ("asics", "data_splitting"):
        sc = SimScenario(
            n=500, d=200, rho=0.5, beta_pattern="model1", k=10, runs=500,
            master_seed=0, method=method,
        )
        powers[method] = run_scenario(sc, threads=THREADS).power
    gap = powers["asics"] - powers["data_splitting"]
    assert gap >= 0.05, (
        f"power gap {gap:.3f} < 0.05 (selective {powers['asics']:.3f}, "
        f"data splitting {powers['data_splitting']:.3f}); both near ceiling at n=500"
    )


def test_06_screening_bound_caps_power():
    sc = SimScenario(
        n=500, d=200, rho=0.5, beta_pattern="model2", k=5, runs=500,
        master_seed=0, method="asics",
    )
    m = run_scenario(sc, threads=THREADS)
    assert m.power <= 0.5, f"power {m.power:.3f} exceeds the k/s* cap of 0.5"

    # the cap binds exactly: 5 selected, all true, all rejected is 5 of 10
    d = 20
    beta_star = expand_pattern("model2", d)
    z = np.zeros(d)
    z[:5] = np.array([9.0, 8.0, 7.0, 6.0, 5.0])
    eye = np.eye(5)
    report = SelectiveReport(
        selection=select_top_k(z, 5),
        fit=FittedLogistic(
            beta_hat=np.zeros(5), info=eye, info_inv=eye,
            iterations=0, grad_sup=0.0, bounded=False,
        ),
        tests=tuple(
            SelectiveTest(
                feature_index=j, t_stat=5.0, sigma2=1.0, lower=0.0,
                upper=math.inf, p_value=0.0, adjusted_p=0.0,
                saturated=False, separation_flag=False,
            )
            for j in range(5)
        ),
        method="asics",
        alpha=0.05,
        n_inference=500,
    )
    assert power_for_tpr(report, beta_star, 0.05) == 0.5


def test_07_closed_form_matches_polyhedral_oracle():
    rng = np.random.default_rng(7001)
    started = time.monotonic()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(20, 501))
        d = int(rng.integers(10, 2001))
        rho = float(rng.choice([0.0, 0.5, 0.9]))
        beta_star = np.zeros(d)
        signals = int(rng.integers(0, min(5, d) + 1))
        if signals:
            beta_star[rng.choice(d, size=signals, replace=False)] = rng.normal(
                0.0, 1.5, size=signals
            )
        ds = generate_synthetic(
            SyntheticDesign(n=n, d=d, rho=rho, beta_star=beta_star), rng
        )
        k = int(rng.integers(1, min(20, d) + 1))
        sel = select_top_k(ds.x.T @ ds.y, k)
        j_local = int(rng.integers(0, k))
        t_stat = float(rng.normal(0.0, 3.0))
        sigma2 = float(np.exp(rng.uniform(-3.0, 3.0)))

        closed = selective.closed_truncation(sel, j_local, t_stat, sigma2, n)
        lower, upper, slack = selective.polyhedral_truncation_oracle(
            sel, j_local, t_stat, sigma2, n
        )
        assert slack >= 0.0
        for a, b in zip(closed, (lower, upper)):
            if math.isinf(a) or math.isinf(b):
                assert a == b, f"endpoint mismatch: closed {closed}, oracle ({lower}, {upper})"
            else:
                worst = max(worst, abs(a - b))
    elapsed = time.monotonic() - started
    assert worst <= 1e-10, f"worst endpoint disagreement {worst:.3e} > 1e-10"
    assert elapsed < 120.0, f"1000 instances took {elapsed:.1f}s, budget 120s"


def test_08_truncated_cdf_matches_quadrature_on_grid():
    param_sets = [
        TruncatedNormalParams(0.0, 1.0, 5.0, 7.0),
        TruncatedNormalParams(0.0, 1.0, -7.0, -5.0),
        TruncatedNormalParams(0.0, 1.0, -math.inf, math.inf),
        TruncatedNormalParams(0.0, 1.0, -1.5, 1.5),
        TruncatedNormalParams(0.0, 1.0, 2.0, math.inf),
        TruncatedNormalParams(0.0, 1.0, -math.inf, -2.0),
        TruncatedNormalParams(1.5, 4.0, -2.0, 9.0),
        TruncatedNormalParams(-2.0, 0.25, -3.5, -0.5),
    ]
    grid = []
    for params in param_sets:
        lo = params.lower if math.isfinite(params.lower) else params.mu - 4.0
        hi = params.upper if math.isfinite(params.upper) else params.mu + 4.0
        for frac in np.linspace(0.02, 0.98, 25):
            grid.append((lo + float(frac) * (hi - lo), params))
    assert len(grid) == 200

    worst = 0.0
    for x, params in grid:
        got = cdf(x, params)
        assert math.isfinite(got), f"non-finite cdf at x={x}, params={params}"
        want = tn_cdf_quadrature(x, params.mu, params.sigma2, params.lower, params.upper)
        worst = max(worst, abs(got - want))
    assert worst < 1e-10, f"worst |cdf - quadrature| {worst:.3e} >= 1e-10"


def test_09_mle_stationarity_curvature_and_restarts():
    rng = np.random.default_rng(9001)
    checked = 0
    attempts = 0
    while checked < 100:
        attempts += 1
        assert attempts < 1000, "could not find 100 instances with a finite MLE"
        n = int(rng.integers(40, 201))
        k = int(rng.integers(1, 6))
        xs = rng.normal(size=(n, k))
        beta = rng.normal(0.0, 0.8, size=k)
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-(xs @ beta)))).astype(float)

        fit = fit_mle(xs, y)
        if fit.bounded:
            continue
        checked += 1

        grad_sup = float(np.max(np.abs(score(fit.beta_hat, xs, y)))) * math.sqrt(n)
        assert grad_sup < 1e-8 * n, f"stationarity violated: {grad_sup:.3e} vs {1e-8 * n:.3e}"
        np.linalg.cholesky(fit.info)  # raises if not positive definite

        start = rng.normal(0.0, 0.3, size=k)
        while np.max(np.abs(xs @ start)) >= FitConfig().xi_tilde:
            start *= 0.5
        refit = fit_mle(xs, y, start=start)
        gap = float(np.max(np.abs(refit.beta_hat - fit.beta_hat)))
        assert gap < 1e-6, f"restart moved the fit by {gap:.3e}"


def test_10_simulate_output_is_byte_identical(capsys):
    argv = [
        "simulate",
        "--n", "60",
        "--d", "40",
        "--rho", "0.0,0.5",
        "--method", "asics,data_splitting",
        "--k", "2",
        "--runs", "64",
        "--seed", "9",
    ]
    outputs = []
    for threads in ("1", "8", "1"):
        assert cli_main(argv + ["--threads", threads]) == 0
        outputs.append(capsys.readouterr().out.encode("utf-8"))
    assert outputs[0] == outputs[1], "threads=1 and threads=8 outputs differ"
    assert outputs[0] == outputs[2], "repeated runs differ"
    assert b"\r" not in outputs[0]
