"""Dataset ingestion, standardization, and synthetic data generation.

Input data arrives as LIBSVM text (sparse, 1-based indices); it is densified
on parse because every downstream computation is dense: the full matrix is
only touched once for the marginal scores, and all model fitting happens on
n x K blocks with small K.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import expit


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LabelAlphabetError(ValueError):
    """Labels mix the {0,1} and {-1,+1} alphabets in one file."""


class ConstantColumnWarning(UserWarning):
    """A design column was constant and got centered to all zeros."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix (n x d) with a binary response vector.

    Invariants enforced on construction: y entries are exactly 0 or 1, all
    x entries are finite, n >= 2 and d >= 1.
    """

    x: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"x must be 2-dimensional, got shape {x.shape}")
        if y.ndim != 1:
            raise ValueError(f"y must be 1-dimensional, got shape {y.shape}")
        n, d = x.shape
        if y.shape[0] != n:
            raise ValueError(f"x has {n} rows but y has {y.shape[0]} entries")
        if n < 2 or d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x contains non-finite entries")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("y entries must be exactly 0 or 1")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise ValueError(
                f"feature_names has {len(self.feature_names)} entries for d={d}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True, eq=False)
class SyntheticDesign:
    """Recipe for one synthetic draw: AR(1) Gaussian design, logistic response.

    seed is bookkeeping for reports; generation always takes an explicit
    generator argument so the caller owns stream splitting.
    """

    n: int
    d: int
    rho: float
    beta_star: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2 or self.d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={self.n}, d={self.d}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        beta = np.ascontiguousarray(self.beta_star, dtype=np.float64)
        if beta.shape != (self.d,):
            raise ValueError(
                f"beta_star must have length d={self.d}, got shape {beta.shape}"
            )
        object.__setattr__(self, "beta_star", beta)


def parse_libsvm(source: str | Iterable[str], d_hint: int | None = None) -> Dataset:
    """Parse LIBSVM text into a dense Dataset.

    Each nonempty line is ``<label> <idx>:<val> ...`` with strictly increasing
    1-based indices; ``#`` starts a comment running to end of line. Labels may
    use either the {0,1} or the {-1,+1} alphabet (-1 maps to 0), but not both
    in one file. d is the largest observed index unless d_hint is larger.
    """
    lines = source.splitlines() if isinstance(source, str) else source

    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    saw_minus_one = False
    saw_zero = False
    d_max = 0

    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0]
        tokens = text.split()
        if not tokens:
            continue

        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"bad label {tokens[0]!r}", lineno) from None
        if label == -1.0:
            saw_minus_one = True
            label = 0.0
        elif label == 0.0:
            saw_zero = True
        elif label != 1.0:
            raise LibsvmParseError(
                f"label must be 0, 1, or -1, got {tokens[0]!r}", lineno
            )

        entries: list[tuple[int, float]] = []
        prev = 0
        for token in tokens[1:]:
            idx_text, sep, val_text = token.partition(":")
            if not sep:
                raise LibsvmParseError(f"expected idx:value, got {token!r}", lineno)
            try:
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise LibsvmParseError(f"bad feature entry {token!r}", lineno) from None
            if idx < 1:
                raise LibsvmParseError(f"indices are 1-based, got {idx}", lineno)
            if idx <= prev:
                raise LibsvmParseError(
                    f"indices must be strictly increasing, got {idx} after {prev}",
                    lineno,
                )
            if not math.isfinite(val):
                raise LibsvmParseError(f"non-finite value {val_text!r}", lineno)
            entries.append((idx, val))
            prev = idx

        d_max = max(d_max, prev)
        labels.append(label)
        rows.append(entries)

    if not rows:
        raise LibsvmParseError("empty dataset")
    if saw_minus_one and saw_zero:
        raise LabelAlphabetError("labels mix the {0,1} and {-1,+1} alphabets")

    d = max(d_max, d_hint or 0)
    if d == 0:
        raise LibsvmParseError("no feature indices observed and no d_hint given")

    x = np.zeros((len(rows), d), dtype=np.float64)
    for i, entries in enumerate(rows):
        for idx, val in entries:
            x[i, idx - 1] = val
    return Dataset(x=x, y=np.asarray(labels))


def serialize_libsvm(ds: Dataset) -> str:
    """Render a Dataset back to LIBSVM text with {0,1} labels.

    Exact zeros are dropped, so parse(serialize(ds), d_hint=ds.d) round-trips.
    """
    out: list[str] = []
    for i in range(ds.n):
        parts = [str(int(ds.y[i]))]
        row = ds.x[i]
        for j in np.flatnonzero(row != 0.0):
            parts.append(f"{j + 1}:{float(row[j])!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def standardize(ds: Dataset) -> Dataset:
    """Center each column and scale it to unit population standard deviation.

    The population convention divides by sqrt(sum((x - mean)^2) / n). Constant
    columns are centered to all zeros and reported through a single
    ConstantColumnWarning listing their indices; the relative tolerance keeps
    near-constant float columns from exploding under division by a rounding
    residual.
    """
    mean = ds.x.mean(axis=0)
    centered = ds.x - mean
    sd = np.sqrt(np.mean(centered**2, axis=0))
    col_scale = np.max(np.abs(ds.x), axis=0, initial=0.0)
    constant = sd <= 1e-12 * np.maximum(col_scale, 1.0)
    if np.any(constant):
        cols = np.flatnonzero(constant)
        warnings.warn(
            ConstantColumnWarning(
                f"constant columns centered to zero: {cols.tolist()}"
            ),
            stacklevel=2,
        )
        centered[:, constant] = 0.0
    safe_sd = np.where(constant, 1.0, sd)
    return Dataset(x=centered / safe_sd, y=ds.y, feature_names=ds.feature_names)


def generate_synthetic(design: SyntheticDesign, rng: np.random.Generator) -> Dataset:
    """Draw one dataset: AR(1) rows, Bernoulli response through the sigmoid.

    Rows are mean-zero Gaussian with covariance rho^|j-k|, built column by
    column from the stationary recursion x_1 = eps_1,
    x_j = rho * x_{j-1} + sqrt(1 - rho^2) * eps_j. This is O(n d) and exact,
    no d x d factorization is ever formed.
    """
    eps = rng.standard_normal((design.n, design.d))
    x = np.empty_like(eps)
    x[:, 0] = eps[:, 0]
    innov = math.sqrt(1.0 - design.rho**2)
    for j in range(1, design.d):
        x[:, j] = design.rho * x[:, j - 1] + innov * eps[:, j]
    probs = expit(x @ design.beta_star)
    y = (rng.random(design.n) < probs).astype(np.float64)
    return Dataset(x=x, y=y)
