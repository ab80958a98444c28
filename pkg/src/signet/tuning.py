"""Calibration of the free parameters.

SI and MB tune one scale per node by 10-fold cross-validation on that
node's regression; the grid is geometric, anchored at the node's smallest
all-zero scale (lambda_max) and reaching down to a fixed fraction of it.
The graphical lasso is calibrated by BIC, thresholding by matching a
target edge count, and simulations support oracle tuning to minimal
Hamming distance against the known truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllWeightsZero,
    DidNotConverge,
    DimensionMismatch,
    SignetError,
)
from .estimators import (
    NONZERO_TOL,
    EdgeSet,
    center_columns,
    edges_from_support,
    glasso_path,
    partial_correlations,
    sample_covariance,
)
from .linalg import cholesky
from .metrics import hamming
from .rng import substream
from .solver import PATH_TOL, _cd_gram_path, scaled_tol, solve_weighted_lasso_gram


@dataclass(frozen=True)
class ScalePath:
    """Decreasing positive grid of penalty scales, anchored at its origin."""

    values: np.ndarray
    origin: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise SignetError("path needs at least one value")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise SignetError("path values must be positive and finite")
        if np.any(np.diff(v) >= 0):
            raise SignetError("path values must be strictly decreasing")
        if v[0] != self.origin:
            raise SignetError("path must start exactly at its origin")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @classmethod
    def geometric(
        cls, origin: float, size: int = 100, floor_ratio: float = 0.01
    ) -> "ScalePath":
        """Geometric grid from origin down to floor_ratio * origin, inclusive."""
        if not (np.isfinite(origin) and origin > 0):
            raise SignetError(f"origin must be positive, got {origin}")
        if size < 1:
            raise SignetError(f"size must be at least 1, got {size}")
        if size == 1:
            return cls(values=np.array([origin]), origin=float(origin))
        if not (0.0 < floor_ratio < 1.0):
            raise SignetError(f"floor_ratio must be in (0, 1), got {floor_ratio}")
        ratios = floor_ratio ** (np.arange(size) / (size - 1))
        values = origin * ratios
        values[0] = origin
        values[-1] = origin * floor_ratio
        return cls(values=values, origin=float(origin))


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings; seed fixes the fold assignment."""

    seed: int
    folds: int = 10
    grid_size: int = 100
    grid_floor_ratio: float = 0.01

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise SignetError(f"folds must be at least 2, got {self.folds}")
        if self.grid_size < 1:
            raise SignetError(f"grid_size must be at least 1, got {self.grid_size}")
        if not (0.0 < self.grid_floor_ratio < 1.0):
            raise SignetError(
                f"grid_floor_ratio must be in (0, 1), got {self.grid_floor_ratio}"
            )


def fold_assignments(n: int, folds: int, seed: int) -> np.ndarray:
    """Fold id per observation: seeded shuffle of 0..n-1 dealt round-robin.

    A pure function of (seed, n, folds), so reruns and reordered pipelines
    agree on the assignment.
    """
    if not (2 <= folds <= n):
        raise SignetError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = substream(seed, 0).permutation(n)
    out = np.empty(n, dtype=np.int64)
    out[perm] = np.arange(n) % folds
    return out


def lambda_max(data: np.ndarray, node: int, link_weights: np.ndarray) -> float:
    """Smallest scale at which node's penalized coefficients are all zero.

    From the KKT condition at beta = 0 on centered data:
    max over i != node with w_i > 0 of |X_i' X_node| / w_i.
    """
    x = center_columns(data)
    p = x.shape[1]
    w = np.asarray(link_weights, dtype=np.float64)
    if w.shape != (p,):
        raise DimensionMismatch(f"link_weights must have length {p}, got {w.shape}")
    corr = x.T @ x[:, node]
    mask = w > 0
    mask[node] = False
    if not np.any(mask):
        raise AllWeightsZero(f"node {node} has no positive link weight")
    return float(np.max(np.abs(corr[mask]) / w[mask]))


def lambda_max_matrix(data: np.ndarray, shape_weights: np.ndarray) -> np.ndarray:
    """Per-node lambda_max for a full (p, p) unit-scale weight matrix."""
    x = center_columns(data)
    p = x.shape[1]
    if shape_weights.shape != (p, p):
        raise DimensionMismatch(
            f"shape_weights must be ({p}, {p}), got {shape_weights.shape}"
        )
    gram = x.T @ x
    out = np.empty(p)
    for j in range(p):
        w = shape_weights[j]
        mask = w > 0
        mask[j] = False
        if not np.any(mask):
            raise AllWeightsZero(f"node {j} has no positive link weight")
        out[j] = np.max(np.abs(gram[mask, j]) / w[mask])
    return out


def _node_grid(origin: float, size: int, floor_ratio: float) -> np.ndarray:
    """Grid values for one node; an all-zero-correlation node gets a zero grid."""
    if origin == 0.0:
        return np.zeros(size)
    return ScalePath.geometric(origin, size=size, floor_ratio=floor_ratio).values


def _cv_curves(
    data: np.ndarray,
    shape_weights: np.ndarray,
    cfg: CvConfig,
    tol: float,
    max_sweeps: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Out-of-fold error curves for every node at once.

    Returns (grids (g, p), curves (g, p)) where curves[t, j] is the mean
    out-of-fold squared prediction error of node j at grid point t. Folds
    share one pass: the training Gram of each fold is derived from the full
    Gram by subtracting the held-out block, with training-mean centering
    applied in closed form.
    """
    x = np.asarray(data, dtype=np.float64)
    n, p = x.shape
    if n < cfg.folds:
        raise SignetError(f"need n >= folds, got n={n}, folds={cfg.folds}")
    anchors = lambda_max_matrix(x, shape_weights)
    grids = np.column_stack(
        [_node_grid(anchors[j], cfg.grid_size, cfg.grid_floor_ratio) for j in range(p)]
    )
    assign = fold_assignments(n, cfg.folds, cfg.seed)
    raw_gram = x.T @ x
    col_sum = x.sum(axis=0)
    sse = np.zeros((cfg.grid_size, p))
    for f in range(cfg.folds):
        held = assign == f
        xf = x[held]
        nf = xf.shape[0]
        ntr = n - nf
        mean_tr = (col_sum - xf.sum(axis=0)) / ntr
        gram_tr = raw_gram - xf.T @ xf - ntr * np.outer(mean_tr, mean_tr)
        gram_tr = (gram_tr + gram_tr.T) / 2.0
        tol_eff = scaled_tol(tol, gram_tr.diagonal().max())
        xte = xf - mean_tr
        for j in range(p):
            idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
            sub = np.ascontiguousarray(gram_tr[np.ix_(idx, idx)])
            xty = np.ascontiguousarray(gram_tr[idx, j])
            shape = np.ascontiguousarray(shape_weights[j, idx])
            betas, kkt, sweeps, converged = _cd_gram_path(
                sub, xty, shape, np.ascontiguousarray(grids[:, j]),
                tol_eff, int(max_sweeps),
            )
            if not np.all(converged):
                t_bad = int(np.argmin(converged))
                raise DidNotConverge(
                    f"node {j} fold {f} grid point {t_bad} stalled",
                    node=j,
                    kkt_violation=float(kkt[t_bad]),
                )
            resid = xte[:, [j]] - xte[:, idx] @ betas.T
            sse[:, j] += np.sum(resid * resid, axis=0)
    return grids, sse / n


def cv_select_scale(
    data: np.ndarray,
    node: int,
    link_weights: np.ndarray,
    cfg: CvConfig,
    tol: float = PATH_TOL,
    max_sweeps: int = 10_000,
) -> tuple[float, np.ndarray]:
    """Scale for one node minimizing mean out-of-fold squared prediction error.

    Ties pick the first (largest) grid value. The returned curve has one
    entry per grid point.
    """
    x = np.asarray(data, dtype=np.float64)
    p = x.shape[1]
    w = np.asarray(link_weights, dtype=np.float64)
    if w.shape != (p,):
        raise DimensionMismatch(f"link_weights must have length {p}, got {w.shape}")
    shape = np.zeros((p, p))
    shape[node] = w
    shape[node, node] = 0.0
    # Other nodes need a valid anchor; their curves are discarded.
    other = np.ones((p, p))
    other[node] = shape[node]
    np.fill_diagonal(other, 0.0)
    grids, curves = _cv_curves(x, other, cfg, tol, max_sweeps)
    best = int(np.argmin(curves[:, node]))
    return float(grids[best, node]), curves[:, node].copy()


def cv_calibrated_edges(
    data: np.ndarray,
    shape_weights: np.ndarray,
    cfg: CvConfig,
    rule: str = "and",
    tol: float = PATH_TOL,
    max_sweeps: int = 10_000,
) -> tuple[EdgeSet, np.ndarray, np.ndarray]:
    """Full estimate with every node's scale chosen by cross-validation.

    Returns (edges, scales (p,), curves (grid, p)). The final fit is on the
    complete data at the selected per-node scales.
    """
    x = np.asarray(data, dtype=np.float64)
    n, p = x.shape
    grids, curves = _cv_curves(x, shape_weights, cfg, tol, max_sweeps)
    best = np.argmin(curves, axis=0)
    scales = grids[best, np.arange(p)]
    xc = center_columns(x)
    gram = xc.T @ xc
    tol_eff = scaled_tol(tol, gram.diagonal().max())
    support = np.zeros((p, p), dtype=bool)
    for j in range(p):
        idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
        sub = np.ascontiguousarray(gram[np.ix_(idx, idx)])
        xty = np.ascontiguousarray(gram[idx, j])
        w = np.ascontiguousarray(scales[j] * shape_weights[j, idx])
        coef = solve_weighted_lasso_gram(
            sub, xty, w, tol=tol_eff, max_sweeps=max_sweeps
        )
        support[j, idx] = np.abs(coef.values) > NONZERO_TOL
    return edges_from_support(support, rule), scales, curves


def bic_glasso_path(
    data: np.ndarray,
    grid: ScalePath,
    tol: float = 1e-4,
    max_sweeps: int = 200,
) -> tuple[int, np.ndarray, list]:
    """Graphical-lasso path with its BIC curve and the best index.

    Grid points where the solve fails get an infinite BIC; if every point
    fails the failure is raised. Ties pick the first (largest) penalty.
    """
    x = np.asarray(data, dtype=np.float64)
    n = x.shape[0]
    s = sample_covariance(x)
    path = glasso_path(x, grid.values, tol=tol, max_sweeps=max_sweeps)
    curve = np.full(grid.size, np.inf)
    for t, entry in enumerate(path):
        if entry is None:
            continue
        edges, theta = entry
        logdet = 2.0 * float(np.sum(np.log(np.diag(cholesky(theta)))))
        fit = float(np.sum(s * theta)) - logdet
        curve[t] = n * fit + np.log(n) * edges.n_edges
    if not np.any(np.isfinite(curve)):
        raise DidNotConverge("graphical lasso failed at every grid point")
    return int(np.argmin(curve)), curve, path


def bic_select_glasso(
    data: np.ndarray,
    grid: ScalePath,
    tol: float = 1e-4,
    max_sweeps: int = 200,
) -> tuple[float, np.ndarray]:
    """Penalty minimizing BIC(lam) = n (tr(S theta) - logdet theta) + log(n) k.

    k counts nonzero upper-triangular off-diagonal entries of the fitted
    precision.
    """
    best, curve, _ = bic_glasso_path(data, grid, tol=tol, max_sweeps=max_sweeps)
    return float(grid.values[best]), curve


def match_edge_count_threshold(data: np.ndarray, target_edges: int) -> float:
    """Smallest threshold whose edge count does not exceed the target.

    Computed from the order statistics of |partial correlation|: with
    distinct values the count is met exactly. target 0 (or less) gives 1.0
    by convention; a target at or above the number of pairs gives 0.0.
    """
    rho = partial_correlations(data)
    p = rho.shape[0]
    pairs = p * (p - 1) // 2
    if target_edges <= 0:
        return 1.0
    if target_edges >= pairs:
        return 0.0
    iu, ju = np.triu_indices(p, k=1)
    mags = np.sort(np.abs(rho[iu, ju]))[::-1]
    return float(mags[target_edges])


def oracle_tune(method, data, truth: EdgeSet, grid: ScalePath) -> tuple[float, int]:
    """Grid parameter minimizing Hamming distance to the known truth.

    method(data, param) must return an EdgeSet. Ties resolve toward the
    larger (sparser) parameter. Grid points where the method raises a
    package error are skipped; only a fully failing grid raises.
    """
    x = np.asarray(data, dtype=np.float64)
    if truth.dim != x.shape[1]:
        raise DimensionMismatch(
            f"truth dim {truth.dim} does not match data columns {x.shape[1]}"
        )
    best_param = None
    best_h = None
    failures = 0
    for value in grid.values:
        try:
            est = method(x, float(value))
        except SignetError:
            failures += 1
            continue
        h = hamming(est, truth)
        if best_h is None or h < best_h:
            best_param, best_h = float(value), h
    if best_param is None:
        raise DidNotConverge(f"method failed at all {failures} grid points")
    return best_param, int(best_h)


def oracle_threshold(data: np.ndarray, truth: EdgeSet) -> tuple[float, int]:
    """Exact oracle for thresholding: best tau over all support sets.

    Sorting pairs by |partial correlation| makes every achievable edge set
    a prefix, so the Hamming distance is scanned incrementally and the
    minimizer is exact rather than grid-limited. Ties toward larger tau.
    """
    rho = partial_correlations(data)
    p = rho.shape[0]
    if truth.dim != p:
        raise DimensionMismatch(f"truth dim {truth.dim} does not match data {p}")
    iu, ju = np.triu_indices(p, k=1)
    mags = np.abs(rho[iu, ju])
    order = np.argsort(mags)[::-1]
    in_truth = np.array([(i, j) in truth.edges for i, j in zip(iu, ju)])[order]
    # Hamming after adding the k largest pairs, k = 0..pairs.
    steps = np.where(in_truth, -1, 1)
    ham = np.concatenate([[truth.n_edges], truth.n_edges + np.cumsum(steps)])
    # Prefixes that split tied magnitudes are not achievable by any tau,
    # and the full set is out of reach when the smallest magnitude is 0.
    sorted_mags = mags[order]
    achievable = np.ones(ham.size, dtype=bool)
    achievable[1:-1] = sorted_mags[:-1] > sorted_mags[1:]
    achievable[-1] = sorted_mags[-1] > 0.0
    ham_ok = np.where(achievable, ham, ham.max() + 1)
    k = int(np.argmin(ham_ok))
    if k == 0:
        return 1.0, int(ham[0])
    # A threshold strictly between the k-th and (k+1)-th magnitude keeps
    # exactly the k largest pairs.
    if k < sorted_mags.size:
        tau = float((sorted_mags[k - 1] + sorted_mags[k]) / 2.0)
    else:
        tau = float(sorted_mags[-1] / 2.0)
    return tau, int(ham[k])
