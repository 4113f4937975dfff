"""Marginal screening and the affine selection event it induces.

Screening keeps the K features with the largest |z_j|, z = X'y. Conditioning
on that choice (together with the score signs) is conditioning on a polyhedron
{Az <= 0} whose rows compare each selected score against every off-support
score. The full matrix A has 2K(d-K) + K rows and is never stored; rows are
streamed per selected feature on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .data import Dataset


@dataclass(frozen=True, eq=False)
class ScreeningSelection:
    """Outcome of top-K screening on a marginal score vector.

    s_indices is the selected set, sorted ascending; signs holds the score
    signs on the selected set (same order); z is the full score vector;
    max_abs_z_complement is the largest |z_k| off the selected set (0 when
    the selection exhausts all features).
    """

    s_indices: np.ndarray
    signs: np.ndarray
    z: np.ndarray
    k: int
    max_abs_z_complement: float

    @property
    def d(self) -> int:
        return self.z.shape[0]


def marginal_scores(ds: Dataset) -> np.ndarray:
    """Score each feature by its inner product with the response: z = X'y."""
    return ds.x.T @ ds.y


def select_top_k(z: np.ndarray, k: int) -> ScreeningSelection:
    """Select the k features with the largest |z_j|.

    Ties break toward the smaller index and sign(0) counts as +1; both rules
    are measure-zero under continuous designs but must be pinned down so
    results are reproducible bit for bit.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    d = z.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")

    # Stable sort on -|z| keeps the original order within ties, which is
    # exactly the smaller-index rule.
    order = np.argsort(-np.abs(z), kind="stable")
    chosen = np.sort(order[:k])
    rest = order[k:]
    max_comp = float(np.max(np.abs(z[rest]))) if rest.size else 0.0
    signs = np.where(z[chosen] >= 0.0, 1.0, -1.0)
    return ScreeningSelection(
        s_indices=chosen, signs=signs, z=z, k=k, max_abs_z_complement=max_comp
    )


def _complement(sel: ScreeningSelection) -> np.ndarray:
    mask = np.ones(sel.d, dtype=bool)
    mask[sel.s_indices] = False
    return np.flatnonzero(mask)


def block_row_values(sel: ScreeningSelection, j_local: int) -> np.ndarray:
    """Evaluations (Az)_l of the 2(d-K)+1 event rows tied to one selected feature.

    The rows are: -s_j z_j, then the pair (z_k - s_j z_j, -z_k - s_j z_j) for
    every off-support feature k. All values are <= 0 at the observed z, that
    is what being selected means.
    """
    if not 0 <= j_local < sel.k:
        raise ValueError(f"j_local must lie in [0, {sel.k}), got {j_local}")
    sz = float(sel.signs[j_local] * sel.z[sel.s_indices[j_local]])
    comp = sel.z[_complement(sel)]
    values = np.empty(2 * comp.shape[0] + 1, dtype=np.float64)
    values[0] = -sz
    values[1::2] = comp - sz
    values[2::2] = -comp - sz
    return values


def selection_event_rows(sel: ScreeningSelection, j_local: int) -> Iterator[float]:
    """Stream the event-row evaluations for one selected feature, row by row."""
    yield from block_row_values(sel, j_local).tolist()
