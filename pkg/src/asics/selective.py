"""Selective tests for logistic regression after marginal screening.

The statistic for a selected feature j is t = sqrt(n) * beta_hat_j with
variance sigma2 = (information^{-1})_jj. Conditioning on the screening
outcome truncates its null law to an interval: the closed form below gives
the endpoints directly from the score gap, and a generic polyhedral routine
recomputes them from every event row as a cross-check. The two routes must
agree to 1e-10; the polyhedral one is the arbiter and is kept as a permanent
regression check, never collapsed into the closed form.

Two baselines share the report type: data splitting (screen on one half,
test on the other, classical Wald) and the nominal test (full-data Wald that
ignores selection entirely).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .logistic import FitConfig, FittedLogistic, fit_mle
from .screening import (
    ScreeningSelection,
    block_row_values,
    marginal_scores,
    select_top_k,
)
from .truncnorm import DegenerateIntervalError, TruncatedNormalParams, cdf

METHOD_TAGS = ("asics", "data_splitting", "nominal")


@dataclass(frozen=True)
class SelectiveTest:
    """One per-feature test: statistic, truncation interval, p-values.

    feature_index is the 0-based column in the original design. lower and
    upper bracket t_stat, with exactly one endpoint infinite for truncated
    tests and both infinite for the Wald baselines. saturated means the
    truncation interval carried no representable probability mass, so the
    p-value collapsed to 0 and should be read together with that flag.
    separation_flag is copied from the fit and marks the p-value unreliable.
    """

    feature_index: int
    t_stat: float
    sigma2: float
    lower: float
    upper: float
    p_value: float
    adjusted_p: float
    saturated: bool
    separation_flag: bool


@dataclass(frozen=True, eq=False)
class SelectiveReport:
    """Everything one method produced on one dataset.

    tests are sorted by feature_index; n_inference is the number of rows the
    inference stage actually used (the second half under data splitting).
    """

    selection: ScreeningSelection
    fit: FittedLogistic
    tests: tuple[SelectiveTest, ...]
    method: str
    alpha: float
    n_inference: int


def closed_truncation(
    sel: ScreeningSelection, j_local: int, t_stat: float, sigma2: float, n: int
) -> tuple[float, float]:
    """Truncation endpoints for one selected feature, in closed form.

    The score gap g = (sigma2 / sqrt(n)) * (|z_j| - max off-support |z_k|) is
    nonnegative by construction of the selection. A positive score sign
    truncates from below at t_stat - g; a negative one truncates from above
    at t_stat + g. The observed statistic therefore always lies inside the
    interval, and exactly one endpoint is infinite.
    """
    z_j = float(sel.z[sel.s_indices[j_local]])
    gap = (sigma2 / math.sqrt(n)) * (abs(z_j) - sel.max_abs_z_complement)
    if sel.signs[j_local] > 0.0:
        return t_stat - gap, math.inf
    return -math.inf, t_stat + gap


def polyhedral_truncation_oracle(
    sel: ScreeningSelection, j_local: int, t_stat: float, sigma2: float, n: int
) -> tuple[float, float, float]:
    """Truncation endpoints recomputed from every selection-event row.

    For each row l the decomposition of the event into a statement about the
    statistic gives the ratio (numerator_l / denominator_l) with
    numerator_l = -(Az)_l / sqrt(n) + t_stat * denominator_l and
    denominator_l = -s_j / sigma2 on the rows of feature j's own block and 0
    on every other block. The lower endpoint is the max ratio over negative
    denominators, the upper the min over positive ones, and zero-denominator
    rows only contribute slack that must be nonnegative at the observed data.

    Returns (lower, upper, slack); slack is +inf when no zero-denominator
    rows exist (K = 1). Raises RuntimeError when the slack check fails, since
    that means the selection event does not hold at the data it came from.
    """
    if not 0 <= j_local < sel.k:
        raise ValueError(f"j_local must lie in [0, {sel.k}), got {j_local}")
    sqrt_n = math.sqrt(n)
    denom = float(-sel.signs[j_local] / sigma2)

    lower = -math.inf
    upper = math.inf
    slack = math.inf
    for block in range(sel.k):
        az = block_row_values(sel, block)
        if block == j_local:
            ratios = (-az / sqrt_n + t_stat * denom) / denom
            if denom < 0.0:
                lower = max(lower, float(np.max(ratios)))
            else:
                upper = min(upper, float(np.min(ratios)))
        else:
            slack = min(slack, float(np.min(-az / sqrt_n)))

    if slack < -1e-12:
        raise RuntimeError(
            f"selection event violated: zero-denominator slack {slack} < 0"
        )
    return lower, upper, slack


def selective_p_value(
    t_stat: float, sigma2: float, lower: float, upper: float
) -> tuple[float, bool]:
    """Two-sided p-value from the truncated normal pivot.

    p = 2 min(F, 1 - F) with F the TN(0, sigma2, lower, upper) CDF at t_stat.
    A degenerate interval (mass below the representable floor) saturates the
    pivot at whichever endpoint is nearer, so the two-sided p-value is 0; it
    is reported as exactly that with saturated=True rather than an error,
    because error-rate accounting downstream needs a number plus a flag.
    """
    params = TruncatedNormalParams(mu=0.0, sigma2=sigma2, lower=lower, upper=upper)
    try:
        f = cdf(t_stat, params)
    except DegenerateIntervalError:
        return 0.0, True
    return 2.0 * min(f, 1.0 - f), False


def _wald_p_value(t_stat: float, sigma2: float) -> float:
    p, _ = selective_p_value(t_stat, sigma2, -math.inf, math.inf)
    return p


def run_asics(
    ds: Dataset,
    k: int,
    alpha: float = 0.05,
    config: FitConfig = FitConfig(),
) -> SelectiveReport:
    """Screen, fit, and test on the full data with truncation-corrected p-values.

    Pipeline: z = X'y, keep the top k by |z_j|, fit the logistic MLE on the
    selected columns, then for each selected feature form the statistic, its
    closed-form truncation interval, the selective p-value, and the
    Bonferroni-adjusted p-value min(1, k * p).
    """
    sel = select_top_k(marginal_scores(ds), k)
    fit = fit_mle(ds.x[:, sel.s_indices], ds.y, config)
    n = ds.n

    tests = []
    for j_local in range(k):
        t_stat = math.sqrt(n) * float(fit.beta_hat[j_local])
        sigma2 = float(fit.info_inv[j_local, j_local])
        lower, upper = closed_truncation(sel, j_local, t_stat, sigma2, n)
        p, saturated = selective_p_value(t_stat, sigma2, lower, upper)
        tests.append(
            SelectiveTest(
                feature_index=int(sel.s_indices[j_local]),
                t_stat=t_stat,
                sigma2=sigma2,
                lower=lower,
                upper=upper,
                p_value=p,
                adjusted_p=min(1.0, k * p),
                saturated=saturated,
                separation_flag=fit.bounded,
            )
        )
    return SelectiveReport(
        selection=sel,
        fit=fit,
        tests=tuple(tests),
        method="asics",
        alpha=alpha,
        n_inference=n,
    )


def run_data_splitting(
    ds: Dataset,
    k: int,
    rng: np.random.Generator,
    alpha: float = 0.05,
    config: FitConfig = FitConfig(),
) -> SelectiveReport:
    """Screen on a random half, test on the other half with classical Wald.

    The split is a uniformly random permutation prefix: floor(n/2) rows go to
    screening and the remaining ceil(n/2) to inference (the extra row of an
    odd n helps the testing stage). Because selection and inference see
    disjoint data, no truncation is needed; both interval endpoints are
    infinite.
    """
    n = ds.n
    if n < 4:
        raise ValueError(f"data splitting needs n >= 4, got n={n}")
    perm = rng.permutation(n)
    screen_rows = perm[: n // 2]
    infer_rows = perm[n // 2 :]

    z = ds.x[screen_rows].T @ ds.y[screen_rows]
    sel = select_top_k(z, k)
    fit = fit_mle(ds.x[infer_rows][:, sel.s_indices], ds.y[infer_rows], config)
    n2 = infer_rows.shape[0]

    tests = []
    for j_local in range(k):
        t_stat = math.sqrt(n2) * float(fit.beta_hat[j_local])
        sigma2 = float(fit.info_inv[j_local, j_local])
        p = _wald_p_value(t_stat, sigma2)
        tests.append(
            SelectiveTest(
                feature_index=int(sel.s_indices[j_local]),
                t_stat=t_stat,
                sigma2=sigma2,
                lower=-math.inf,
                upper=math.inf,
                p_value=p,
                adjusted_p=min(1.0, k * p),
                saturated=False,
                separation_flag=fit.bounded,
            )
        )
    return SelectiveReport(
        selection=sel,
        fit=fit,
        tests=tuple(tests),
        method="data_splitting",
        alpha=alpha,
        n_inference=n2,
    )


def run_nominal(
    ds: Dataset,
    k: int,
    alpha: float = 0.05,
    config: FitConfig = FitConfig(),
) -> SelectiveReport:
    """Screen and fit on the full data, then pretend no selection happened.

    Classical two-sided Wald p-values on the selected model. This baseline is
    anti-conservative by construction; it exists to quantify the selection
    bias the truncated test removes. Adjusted p-values still follow
    min(1, k * p) so every report satisfies the same invariants.
    """
    sel = select_top_k(marginal_scores(ds), k)
    fit = fit_mle(ds.x[:, sel.s_indices], ds.y, config)
    n = ds.n

    tests = []
    for j_local in range(k):
        t_stat = math.sqrt(n) * float(fit.beta_hat[j_local])
        sigma2 = float(fit.info_inv[j_local, j_local])
        p = _wald_p_value(t_stat, sigma2)
        tests.append(
            SelectiveTest(
                feature_index=int(sel.s_indices[j_local]),
                t_stat=t_stat,
                sigma2=sigma2,
                lower=-math.inf,
                upper=math.inf,
                p_value=p,
                adjusted_p=min(1.0, k * p),
                saturated=False,
                separation_flag=fit.bounded,
            )
        )
    return SelectiveReport(
        selection=sel,
        fit=fit,
        tests=tuple(tests),
        method="nominal",
        alpha=alpha,
        n_inference=n,
    )
