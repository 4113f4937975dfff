"""Embedded oracle suites behind the `selftest` CLI command.

Each suite re-derives a core quantity by an independent route and compares:
the truncated-normal CDF against high-precision quadrature, the closed-form
truncation endpoints against the generic polyhedral enumeration, and the
analytic score/information against finite differences of the log-likelihood.
A corrupted implementation fails loudly here before any simulation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import selective
from .data import SyntheticDesign, generate_synthetic
from .logistic import log_likelihood, observed_information, score
from .screening import select_top_k
from .truncnorm import TruncatedNormalParams, cdf


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def tn_cdf_quadrature(
    x: float, mu: float, sigma2: float, lower: float, upper: float, dps: int = 40
) -> float:
    """Truncated-normal CDF by direct quadrature of the normal density.

    Shares no code path with truncnorm.cdf: the density is integrated
    numerically at `dps` decimal digits, so agreement between the two routes
    checks both the formula and its floating-point realization.
    """
    with mpmath.workdps(dps):
        s = mpmath.sqrt(mpmath.mpf(sigma2))
        l = -mpmath.inf if lower == -math.inf else (mpmath.mpf(lower) - mu) / s
        u = mpmath.inf if upper == math.inf else (mpmath.mpf(upper) - mu) / s
        xs = (mpmath.mpf(x) - mu) / s
        xs = max(l, min(u, xs))
        dens = lambda t: mpmath.exp(-t * t / 2)
        num = mpmath.quad(dens, [l, xs])
        den = mpmath.quad(dens, [l, u])
        return float(num / den)


def _quadrature_grid() -> list[tuple[float, TruncatedNormalParams]]:
    cases: list[tuple[float, TruncatedNormalParams]] = []
    for params in (
        TruncatedNormalParams(0.0, 1.0, -math.inf, math.inf),
        TruncatedNormalParams(0.0, 1.0, 0.0, 2.0),
        TruncatedNormalParams(0.0, 1.0, 5.0, 7.0),
        TruncatedNormalParams(0.0, 1.0, -7.0, -5.0),
        TruncatedNormalParams(0.0, 1.0, 3.0, math.inf),
        TruncatedNormalParams(0.0, 1.0, -math.inf, -3.0),
        TruncatedNormalParams(1.5, 4.0, -2.0, 9.0),
        TruncatedNormalParams(-2.0, 0.25, -1.0, math.inf),
    ):
        lo = params.lower if math.isfinite(params.lower) else params.mu - 4.0
        hi = params.upper if math.isfinite(params.upper) else params.mu + 4.0
        for frac in (0.1, 0.35, 0.5, 0.8, 0.95):
            cases.append((lo + frac * (hi - lo), params))
    return cases


def truncated_normal_suite(tol: float = 1e-10) -> SuiteResult:
    worst = 0.0
    for x, params in _quadrature_grid():
        got = cdf(x, params)
        want = tn_cdf_quadrature(x, params.mu, params.sigma2, params.lower, params.upper)
        if not math.isfinite(got):
            return SuiteResult(
                "truncated-normal cdf vs quadrature",
                False,
                f"non-finite cdf at x={x}, params={params}",
            )
        worst = max(worst, abs(got - want))
    return SuiteResult(
        "truncated-normal cdf vs quadrature",
        worst < tol,
        f"max abs err {worst:.3e} over {len(_quadrature_grid())} points",
    )


def random_truncation_instance(
    rng: np.random.Generator,
    n_range: tuple[int, int] = (20, 200),
    d_range: tuple[int, int] = (10, 400),
    k_max: int = 10,
) -> tuple:
    """One randomized (selection, j_local, t_stat, sigma2, n) instance.

    The dataset is a real synthetic draw so the screening outcome is
    realistic; the statistic and its variance are drawn directly because the
    endpoint identity must hold for every (t_stat, sigma2 > 0), not only for
    fitted ones.
    """
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    rho = float(rng.choice([0.0, 0.5, 0.9]))
    beta_star = np.zeros(d)
    n_signals = int(rng.integers(0, min(5, d) + 1))
    if n_signals:
        beta_star[rng.choice(d, size=n_signals, replace=False)] = rng.normal(
            0.0, 1.5, size=n_signals
        )
    design = SyntheticDesign(n=n, d=d, rho=rho, beta_star=beta_star)
    ds = generate_synthetic(design, rng)
    k = int(rng.integers(1, min(k_max, d) + 1))
    sel = select_top_k(ds.x.T @ ds.y, k)
    j_local = int(rng.integers(0, k))
    t_stat = float(rng.normal(0.0, 3.0))
    sigma2 = float(np.exp(rng.uniform(-3.0, 3.0)))
    return sel, j_local, t_stat, sigma2, n


def truncation_equivalence_suite(
    instances: int = 40, tol: float = 1e-10, seed: int = 20240803
) -> SuiteResult:
    """Closed-form endpoints against the row-by-row polyhedral enumeration.

    Calls the closed form through the module attribute on purpose: a
    corrupted selective.closed_truncation must fail this suite.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        sel, j_local, t_stat, sigma2, n = random_truncation_instance(rng)
        closed = selective.closed_truncation(sel, j_local, t_stat, sigma2, n)
        lower, upper, slack = selective.polyhedral_truncation_oracle(
            sel, j_local, t_stat, sigma2, n
        )
        if slack < 0.0:
            return SuiteResult(
                "closed-form vs polyhedral truncation",
                False,
                f"negative slack {slack}",
            )
        for a, b in zip(closed, (lower, upper)):
            if math.isinf(a) and math.isinf(b) and a == b:
                continue
            err = abs(a - b)
            if not err < tol:
                return SuiteResult(
                    "closed-form vs polyhedral truncation",
                    False,
                    f"endpoint mismatch: closed={closed}, oracle=({lower}, {upper})",
                )
            worst = max(worst, err)
    return SuiteResult(
        "closed-form vs polyhedral truncation",
        True,
        f"max endpoint err {worst:.3e} over {instances} instances",
    )


def gradient_suite(
    instances: int = 20,
    score_tol: float = 1e-6,
    info_tol: float = 1e-5,
    seed: int = 20240804,
) -> SuiteResult:
    """Analytic score and information against central finite differences."""
    rng = np.random.default_rng(seed)
    step = 1e-5
    worst_score = 0.0
    worst_info = 0.0
    for _ in range(instances):
        n = int(rng.integers(20, 80))
        k = int(rng.integers(1, 5))
        xs = rng.normal(size=(n, k))
        y = (rng.random(n) < 0.5).astype(float)
        beta = rng.normal(0.0, 0.5, size=k)
        sqrt_n = math.sqrt(n)

        got_score = score(beta, xs, y)
        got_info = observed_information(beta, xs)
        for j in range(k):
            e = np.zeros(k)
            e[j] = step
            fd_grad = (
                log_likelihood(beta + e, xs, y) - log_likelihood(beta - e, xs, y)
            ) / (2 * step * sqrt_n)
            worst_score = max(worst_score, abs(fd_grad - got_score[j]))
            # d(score)/d(beta_j) = -sqrt(n) * information column j
            fd_col = (score(beta + e, xs, y) - score(beta - e, xs, y)) / (2 * step)
            worst_info = max(
                worst_info, float(np.max(np.abs(fd_col / -sqrt_n - got_info[:, j])))
            )
    passed = worst_score < score_tol and worst_info < info_tol
    return SuiteResult(
        "score and information vs finite differences",
        passed,
        f"max score err {worst_score:.3e}, max info err {worst_info:.3e}",
    )


def run_all() -> list[SuiteResult]:
    return [
        truncated_normal_suite(),
        truncation_equivalence_suite(),
        gradient_suite(),
    ]
