"""Monte-Carlo harness: error rates and power over replicated synthetic draws.

Determinism is the core contract here. Every replicate r derives its own
generator from (master_seed, r) through a counter-based construction
(SeedSequence spawn key feeding Philox), so results do not depend on thread
count or scheduling order; the aggregation is an ordered reduction over exact
indicator sums plus an order-insensitive exact float sum for power.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import SyntheticDesign, generate_synthetic
from .selective import (
    METHOD_TAGS,
    SelectiveReport,
    run_asics,
    run_data_splitting,
    run_nominal,
)

PATTERNS = ("null", "model1", "model2")


def expand_pattern(pattern: str, d: int) -> np.ndarray:
    """True coefficient vector for a named pattern.

    null is all zeros; model1 sets the first 5 coefficients to 2; model2 sets
    the first 5 to 2 and the next 5 to -2.
    """
    beta = np.zeros(d)
    if pattern == "null":
        return beta
    if pattern == "model1":
        if d < 5:
            raise ValueError(f"model1 needs d >= 5, got d={d}")
        beta[:5] = 2.0
        return beta
    if pattern == "model2":
        if d < 10:
            raise ValueError(f"model2 needs d >= 10, got d={d}")
        beta[:5] = 2.0
        beta[5:10] = -2.0
        return beta
    raise ValueError(f"unknown pattern {pattern!r}; expected one of {PATTERNS}")


@dataclass(frozen=True)
class SimScenario:
    """One fully specified simulation cell."""

    n: int
    d: int
    rho: float
    beta_pattern: str
    k: int
    runs: int
    alpha: float = 0.05
    master_seed: int = 0
    method: str = "asics"

    def __post_init__(self) -> None:
        if self.n < 2 or self.d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={self.n}, d={self.d}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not 1 <= self.k <= self.d:
            raise ValueError(f"need 1 <= k <= d, got k={self.k}, d={self.d}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.method not in METHOD_TAGS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {METHOD_TAGS}"
            )
        expand_pattern(self.beta_pattern, self.d)  # validates the pattern


@dataclass(frozen=True)
class SimMetrics:
    """Aggregates over replicates; every rate lies in [0, 1]."""

    rejection_rate: float
    rejection_sd: float
    fwer: float
    power: float
    separation_rate: float
    runs_completed: int


def replicate_stream(master_seed: int, r: int) -> np.random.Generator:
    """Independent generator for replicate r, stable under parallel scheduling."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(r,)))
    )


def power_for_tpr(
    report: SelectiveReport, beta_star: np.ndarray, alpha: float
) -> float:
    """Fraction of ALL true signals that were selected and rejected.

    The denominator is the total number of nonzero coefficients, not the
    number of selected ones: a true signal the screen missed counts as a
    miss. Raises ValueError under a global null, where power is undefined
    (use the FWER path there).
    """
    s_star = int(np.count_nonzero(beta_star))
    if s_star == 0:
        raise ValueError("power is undefined when beta_star has no nonzero entries")
    hits = sum(
        1
        for t in report.tests
        if beta_star[t.feature_index] != 0.0 and t.adjusted_p <= alpha
    )
    return hits / s_star


def fwer_indicator(
    report: SelectiveReport, beta_star: np.ndarray, alpha: float
) -> int:
    """1 iff some selected feature with a zero true coefficient was rejected."""
    return int(
        any(
            beta_star[t.feature_index] == 0.0 and t.adjusted_p <= alpha
            for t in report.tests
        )
    )


def replicate_report(sc: SimScenario, r: int) -> SelectiveReport:
    """Dataset draw plus method run for replicate r of a scenario.

    Exposed separately from run_scenario so callers can harvest per-replicate
    p-values (for pivot-uniformity checks) from exactly the streams the
    aggregate metrics use. The data-splitting split permutation is drawn from
    the same replicate stream, after the dataset.
    """
    rng = replicate_stream(sc.master_seed, r)
    beta_star = expand_pattern(sc.beta_pattern, sc.d)
    design = SyntheticDesign(
        n=sc.n, d=sc.d, rho=sc.rho, beta_star=beta_star, seed=sc.master_seed
    )
    ds = generate_synthetic(design, rng)
    if sc.method == "asics":
        return run_asics(ds, sc.k, sc.alpha)
    if sc.method == "data_splitting":
        return run_data_splitting(ds, sc.k, rng, sc.alpha)
    return run_nominal(ds, sc.k, sc.alpha)


def _replicate_outcome(args: tuple[SimScenario, int]) -> tuple[int, int, float, int]:
    sc, r = args
    report = replicate_report(sc, r)
    beta_star = expand_pattern(sc.beta_pattern, sc.d)
    rejected_any = int(any(t.adjusted_p <= sc.alpha for t in report.tests))
    fwer = fwer_indicator(report, beta_star, sc.alpha)
    if np.any(beta_star != 0.0):
        power = power_for_tpr(report, beta_star, sc.alpha)
    else:
        power = 0.0
    separated = int(report.fit.bounded)
    return rejected_any, fwer, power, separated


def run_scenario(sc: SimScenario, threads: int = 1) -> SimMetrics:
    """Run every replicate of a scenario and aggregate.

    Replicates whose fit hit the separation boundary are retained with their
    flagged p-values (dropping them would bias the rates); separation_rate
    reports how often that happened. With threads > 1 the replicates run in a
    process pool, mapped in index order, and the reduction below is exact in
    integers (math.fsum for power), so output is bit-identical for any thread
    count.
    """
    jobs = ((sc, r) for r in range(sc.runs))
    if threads <= 1:
        outcomes = [_replicate_outcome(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, sc.runs // (threads * 8))
            outcomes = list(pool.map(_replicate_outcome, jobs, chunksize=chunk))

    rejected = sum(o[0] for o in outcomes)
    fwer_hits = sum(o[1] for o in outcomes)
    power_sum = math.fsum(o[2] for o in outcomes)
    separated = sum(o[3] for o in outcomes)

    rate = rejected / sc.runs
    return SimMetrics(
        rejection_rate=rate,
        rejection_sd=math.sqrt(rate * (1.0 - rate)),
        fwer=fwer_hits / sc.runs,
        power=power_sum / sc.runs,
        separation_rate=separated / sc.runs,
        runs_completed=sc.runs,
    )
