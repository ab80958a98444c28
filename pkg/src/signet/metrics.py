"""Graph-recovery metrics and the reproducibility protocol.

Hamming distance scores estimates against a known truth, ROC curves sweep
an estimator's scalar path parameter, and split-half reproducibility
measures how much an estimator's graph depends on which half of the data
it saw, with each half independently re-calibrated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    BothEmpty,
    DimensionMismatch,
    EmptyTruth,
    LengthMismatch,
    SignetError,
)
from .estimators import EdgeSet
from .rng import substream, substream_seed

if TYPE_CHECKING:
    from .tuning import ScalePath


def hamming(a: EdgeSet, b: EdgeSet) -> int:
    """Size of the symmetric difference of the two edge sets."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"edge sets have dims {a.dim} and {b.dim}")
    return len(a.edges ^ b.edges)


def agreement_percent(a: EdgeSet, b: EdgeSet) -> float:
    """(1 - hamming / (|a| + |b|)) * 100; undefined when both are empty."""
    total = a.n_edges + b.n_edges
    if total == 0:
        raise BothEmpty("agreement of two empty edge sets is 0/0")
    return (1.0 - hamming(a, b) / total) * 100.0


@dataclass(frozen=True)
class RocCurve:
    """ROC points in path order, with the parameter that produced each.

    The curve always carries the appended endpoints: parameter +inf for
    (0, 0) (infinite penalty, empty graph) and 0 for (1, 1) (no penalty,
    complete graph). auc integrates by trapezoid over points sorted by
    (fpr, tpr).
    """

    params: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def __post_init__(self) -> None:
        p = np.asarray(self.params, dtype=np.float64)
        f = np.asarray(self.fpr, dtype=np.float64)
        t = np.asarray(self.tpr, dtype=np.float64)
        if not (p.size == f.size == t.size):
            raise LengthMismatch("params, fpr and tpr must have equal length")
        if np.any((f < 0) | (f > 1)) or np.any((t < 0) | (t > 1)):
            raise SignetError("fpr and tpr must lie in [0, 1]")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "fpr", f)
        object.__setattr__(self, "tpr", t)

    @staticmethod
    def _auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
        order = np.lexsort((tpr, fpr))
        return float(trapezoid(tpr[order], fpr[order]))

    @classmethod
    def from_points(
        cls, params: np.ndarray, fpr: np.ndarray, tpr: np.ndarray
    ) -> "RocCurve":
        f = np.asarray(fpr, dtype=np.float64)
        t = np.asarray(tpr, dtype=np.float64)
        if f.size != t.size:
            raise LengthMismatch("params, fpr and tpr must have equal length")
        return cls(params=params, fpr=f, tpr=t, auc=cls._auc(f, t))

    @property
    def size(self) -> int:
        return self.params.size


def _rates(est: EdgeSet, truth: EdgeSet) -> tuple[float, float]:
    pairs = truth.dim * (truth.dim - 1) // 2
    negatives = pairs - truth.n_edges
    if negatives == 0:
        raise SignetError("truth is the complete graph; FPR undefined")
    tp = len(est.edges & truth.edges)
    fp = len(est.edges - truth.edges)
    return fp / negatives, tp / truth.n_edges


def roc_from_edge_sets(
    params: Sequence[float],
    edge_sets: Sequence[EdgeSet | None],
    truth: EdgeSet,
) -> RocCurve:
    """Curve from precomputed path estimates; None entries are skipped.

    Appends the endpoints (0, 0) at parameter +inf and (1, 1) at 0.
    """
    if truth.n_edges == 0:
        raise EmptyTruth("ROC needs a nonempty truth")
    if len(params) != len(edge_sets):
        raise LengthMismatch("params and edge_sets must have equal length")
    ps = [np.inf]
    fs = [0.0]
    ts = [0.0]
    for param, est in zip(params, edge_sets):
        if est is None:
            continue
        f, t = _rates(est, truth)
        ps.append(float(param))
        fs.append(f)
        ts.append(t)
    ps.append(0.0)
    fs.append(1.0)
    ts.append(1.0)
    return RocCurve.from_points(np.array(ps), np.array(fs), np.array(ts))


def roc_over_path(
    method: Callable[[np.ndarray, float], EdgeSet],
    data: np.ndarray,
    truth: EdgeSet,
    grid: "ScalePath",
) -> RocCurve:
    """Sweep method(data, param) over the grid and score against truth.

    For the neighborhood estimators the parameter is a global multiplier
    on the per-node lambda_max anchors; for thresholding it is the
    threshold; for the graphical lasso the penalty.
    """
    if truth.n_edges == 0:
        raise EmptyTruth("ROC needs a nonempty truth")
    x = np.asarray(data, dtype=np.float64)
    sets = [method(x, float(v)) for v in grid.values]
    return roc_from_edge_sets([float(v) for v in grid.values], sets, truth)


def average_roc(curves: Sequence[RocCurve]) -> RocCurve:
    """Pointwise mean of curves sharing one grid, by path index."""
    if len(curves) == 0:
        raise LengthMismatch("need at least one curve")
    size = curves[0].size
    for c in curves:
        if c.size != size:
            raise LengthMismatch(f"curve lengths differ: {c.size} vs {size}")
    params = np.mean([c.params for c in curves], axis=0)
    fpr = np.mean([c.fpr for c in curves], axis=0)
    tpr = np.mean([c.tpr for c in curves], axis=0)
    return RocCurve.from_points(params, fpr, tpr)


@dataclass(frozen=True)
class ReproducibilityReport:
    """Agreement percentages across data splits, with their mean and SD.

    per_split holds only the defined values; splits where both halves gave
    an empty graph are counted in n_undefined and excluded. SD uses the
    n-1 divisor and is 0 for fewer than two values.
    """

    per_split: tuple
    mean: float
    sd: float
    n_splits: int
    n_undefined: int = 0

    def __post_init__(self) -> None:
        vals = np.asarray(self.per_split, dtype=np.float64)
        if vals.size and (np.any(vals < 0) or np.any(vals > 100)):
            raise SignetError("agreement values must lie in [0, 100]")
        if vals.size:
            if abs(float(np.mean(vals)) - self.mean) > 1e-9:
                raise SignetError("mean inconsistent with per_split values")
            sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
            if abs(sd - self.sd) > 1e-9:
                raise SignetError("sd inconsistent with per_split values")
        if self.n_undefined + vals.size != self.n_splits:
            raise SignetError("split counts do not add up")

    @classmethod
    def from_values(
        cls, values: Sequence[float], n_splits: int, n_undefined: int = 0
    ) -> "ReproducibilityReport":
        vals = np.asarray(values, dtype=np.float64)
        if vals.size == 0:
            return cls(
                per_split=(),
                mean=float("nan"),
                sd=float("nan"),
                n_splits=n_splits,
                n_undefined=n_undefined,
            )
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        return cls(
            per_split=tuple(float(v) for v in vals),
            mean=mean,
            sd=sd,
            n_splits=n_splits,
            n_undefined=n_undefined,
        )


def split_half_reproducibility(
    method: Callable[[np.ndarray, int], EdgeSet],
    data: np.ndarray,
    n_splits: int = 20,
    seed: int = 0,
) -> ReproducibilityReport:
    """Agreement between graphs estimated on random halves of the rows.

    Per split s, rows are shuffled by stream (seed, 3s); the first
    floor(n/2) rows form one half and the rest the other. method(half,
    half_seed) must estimate and calibrate on its half alone; the half
    seeds are streams (seed, 3s+1) and (seed, 3s+2), so every half of
    every split calibrates independently.
    """
    x = np.asarray(data, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise SignetError(f"need at least 4 rows to split, got {n}")
    values = []
    undefined = 0
    for s in range(n_splits):
        perm = substream(seed, 3 * s).permutation(n)
        first = x[perm[: n // 2]]
        second = x[perm[n // 2 :]]
        e1 = method(first, substream_seed(seed, 3 * s + 1))
        e2 = method(second, substream_seed(seed, 3 * s + 2))
        try:
            values.append(agreement_percent(e1, e2))
        except BothEmpty:
            undefined += 1
    return ReproducibilityReport.from_values(values, n_splits, undefined)
