"""Graph estimators: neighborhood selection (SI and MB), partial-correlation
thresholding, and the graphical lasso.

SI and MB share one engine: per node j, a weighted lasso of column j on the
remaining columns, with node j's penalty row taken from a PenaltyField.
SI shapes that row by a link of the distances; MB uses uniform weights.
Neighborhoods are merged into an undirected edge set by the and-rule
(both directions nonzero) or the or-rule (either direction).

The graphical lasso penalizes off-diagonal precision entries only. This
convention keeps the diagonal-covariance case exactly solvable and matches
the edge-recovery use of the estimator; it is stated here because other
implementations differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DidNotConverge,
    DimensionMismatch,
    NotPositiveDefinite,
    RequiresMoreSamples,
    SignetError,
    SingularMatrix,
)
from .linalg import cholesky, invert_spd
from .penalty import (
    DistanceInfo,
    LinkFunction,
    PenaltyField,
    build_penalty_field,
    uniform_penalty_field,
)
from .solver import (
    PATH_TOL,
    _cd_gram,
    _cd_gram_path,
    scaled_tol,
    solve_weighted_lasso_gram,
)

# Coefficients with magnitude above this count as edges. Coordinate descent
# returns exact zeros, so this only guards dust on unpenalized coordinates.
NONZERO_TOL = 1e-10

RULES = ("and", "or")

# Full block sweeps of the graphical lasso before giving up.
GLASSO_MAX_SWEEPS = 200
GLASSO_TOL = 1e-4


def _check_rule(rule: str) -> str:
    if rule not in RULES:
        raise SignetError(f"rule must be one of {RULES}, got {rule!r}")
    return rule


@dataclass(frozen=True)
class EdgeSet:
    """Undirected graph on dim nodes: unordered 0-based pairs (i, j), i < j."""

    dim: int
    edges: frozenset

    def __post_init__(self) -> None:
        for i, j in self.edges:
            if not (0 <= i < j < self.dim):
                raise SignetError(f"edge ({i}, {j}) invalid for dim {self.dim}")

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, int]]) -> "EdgeSet":
        """Normalize arbitrary (i, j) pairs: order each, reject self-loops."""
        edges = set()
        for a, b in pairs:
            i, j = (int(a), int(b)) if a < b else (int(b), int(a))
            if i == j:
                raise SignetError(f"self-loop ({i}, {j}) rejected")
            edges.add((i, j))
        return cls(dim=int(dim), edges=frozenset(edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def permuted(self, perm: Sequence[int]) -> "EdgeSet":
        """Relabel node i as perm[i]."""
        perm = list(perm)
        if sorted(perm) != list(range(self.dim)):
            raise SignetError("perm must be a permutation of 0..dim-1")
        return EdgeSet.from_pairs(self.dim, ((perm[i], perm[j]) for i, j in self.edges))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.dim, self.dim))
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a


@dataclass(frozen=True)
class NeighborhoodFit:
    """Node j's fitted regression vector, with the self-coefficient pinned to 0."""

    node: int
    coefficients: np.ndarray
    scale_used: float

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.ndim != 1 or not (0 <= self.node < c.size):
            raise DimensionMismatch(
                f"node {self.node} incompatible with coefficients {c.shape}"
            )
        if c[self.node] != 0.0:
            raise SignetError(f"self-coefficient of node {self.node} must be 0")
        object.__setattr__(self, "coefficients", c)


def center_columns(data: np.ndarray) -> np.ndarray:
    """Subtract each column's mean; the model is centered, real data are not."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"data must be 2-d, got {x.shape}")
    return x - x.mean(axis=0, keepdims=True)


def sample_covariance(data: np.ndarray) -> np.ndarray:
    """(1/n) X'X on column-centered data.

    1/n rather than 1/(n-1): the constant is absorbed by tuning and matches
    the likelihood normalization used in the graphical lasso's BIC.
    """
    x = center_columns(data)
    n = x.shape[0]
    if n < 1:
        raise DimensionMismatch("need at least one row")
    s = (x.T @ x) / n
    return (s + s.T) / 2.0


def fit_neighborhoods(
    data: np.ndarray,
    field: PenaltyField,
    tol: float = 1e-6,
    max_sweeps: int = 10_000,
) -> list[NeighborhoodFit]:
    """One weighted lasso per node: column j on the rest, weights field.weights[j].

    The full Gram matrix is computed once on centered data and sliced per
    node, so the p regressions cost O(n p^2) once plus the solves.
    """
    x = center_columns(data)
    n, p = x.shape
    if n < 2:
        raise DimensionMismatch("need at least two rows")
    if field.dim != p:
        raise DimensionMismatch(f"field dim {field.dim} does not match data columns {p}")
    gram = x.T @ x
    tol_eff = scaled_tol(tol, gram.diagonal().max() if p else 0.0)
    fits = []
    for j in range(p):
        idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
        sub = np.ascontiguousarray(gram[np.ix_(idx, idx)])
        xty = np.ascontiguousarray(gram[idx, j])
        w = np.ascontiguousarray(field.weights[j, idx])
        try:
            coef = solve_weighted_lasso_gram(
                sub, xty, w, tol=tol_eff, max_sweeps=max_sweeps
            )
        except DidNotConverge as exc:
            raise DidNotConverge(
                f"node {j}: {exc}", best=exc.best, kkt_violation=exc.kkt_violation,
                node=j,
            ) from exc
        full = np.zeros(p)
        full[idx] = coef.values
        fits.append(
            NeighborhoodFit(node=j, coefficients=full, scale_used=float(field.scale[j]))
        )
    return fits


def combine(fits: list[NeighborhoodFit], rule: str) -> EdgeSet:
    """Merge per-node fits into an edge set by the and-rule or or-rule."""
    _check_rule(rule)
    p = len(fits)
    seen = sorted(f.node for f in fits)
    if seen != list(range(p)):
        raise SignetError("need exactly one fit per node")
    nz = np.zeros((p, p), dtype=bool)
    for f in fits:
        if f.coefficients.size != p:
            raise DimensionMismatch("fit coefficient length does not match node count")
        nz[f.node] = np.abs(f.coefficients) > NONZERO_TOL
    return edges_from_support(nz, rule)


def edges_from_support(support: np.ndarray, rule: str) -> EdgeSet:
    """support[j, i] true when coefficient i of node j's fit is nonzero."""
    _check_rule(rule)
    p = support.shape[0]
    merged = (support & support.T) if rule == "and" else (support | support.T)
    iu, ju = np.triu_indices(p, k=1)
    keep = merged[iu, ju]
    return EdgeSet.from_pairs(p, zip(iu[keep].tolist(), ju[keep].tolist()))


def estimate_si(
    data: np.ndarray,
    dist: DistanceInfo,
    f: LinkFunction,
    scales: np.ndarray,
    rule: str = "and",
    tol: float = 1e-6,
    max_sweeps: int = 10_000,
) -> EdgeSet:
    """Side-information estimator: distance-shaped weights, then combine."""
    field = build_penalty_field(dist, f, scales)
    return combine(fit_neighborhoods(data, field, tol, max_sweeps), rule)


def estimate_mb(
    data: np.ndarray,
    scales: np.ndarray,
    rule: str = "and",
    tol: float = 1e-6,
    max_sweeps: int = 10_000,
) -> EdgeSet:
    """Plain neighborhood selection: uniform weights at the given scales."""
    p = np.asarray(data).shape[1]
    field = uniform_penalty_field(p, scales)
    return combine(fit_neighborhoods(data, field, tol, max_sweeps), rule)


def partial_correlations_from_precision(theta: np.ndarray) -> np.ndarray:
    """rho_ij = -theta_ij / sqrt(theta_ii theta_jj), unit diagonal."""
    t = np.asarray(theta, dtype=np.float64)
    d = np.diag(t)
    if np.any(d <= 0):
        raise NotPositiveDefinite("precision diagonal must be positive")
    scale = np.sqrt(d)
    rho = -t / np.outer(scale, scale)
    np.fill_diagonal(rho, 1.0)
    return (rho + rho.T) / 2.0


def partial_correlations(data: np.ndarray) -> np.ndarray:
    """Partial correlations from the inverted sample covariance; needs n > p."""
    x = np.asarray(data, dtype=np.float64)
    n, p = x.shape
    if n <= p:
        raise RequiresMoreSamples(f"partial correlations need n > p, got n={n}, p={p}")
    s = sample_covariance(x)
    try:
        theta = invert_spd(s)
    except (NotPositiveDefinite, SingularMatrix) as exc:
        raise RequiresMoreSamples(f"sample covariance not invertible: {exc}") from exc
    return partial_correlations_from_precision(theta)


def estimate_thr(data: np.ndarray, threshold: float) -> EdgeSet:
    """Edges where |partial correlation| exceeds the threshold."""
    if not (0.0 <= threshold <= 1.0):
        raise SignetError(f"threshold must be in [0, 1], got {threshold}")
    rho = partial_correlations(data)
    p = rho.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    keep = np.abs(rho[iu, ju]) > threshold
    return EdgeSet.from_pairs(p, zip(iu[keep].tolist(), ju[keep].tolist()))


def _glasso_sweep(S, W, theta, lam, inner_tol, inner_max_sweeps):
    """One block pass over all columns, updating W and theta in place."""
    p = S.shape[0]
    lam_vec = None
    for j in range(p):
        idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
        w11 = np.ascontiguousarray(W[np.ix_(idx, idx)])
        s12 = np.ascontiguousarray(S[idx, j])
        if lam_vec is None or lam_vec.size != idx.size:
            lam_vec = np.full(idx.size, lam)
        beta = np.ascontiguousarray(-theta[idx, j] / theta[j, j])
        viol, sweeps, ok = _cd_gram(
            w11, s12, lam_vec, beta, inner_tol, inner_max_sweeps
        )
        if not ok:
            raise DidNotConverge(
                f"column {j} subproblem stalled at KKT {viol:.3e}", node=j
            )
        w12 = w11 @ beta
        W[idx, j] = w12
        W[j, idx] = w12
        denom = W[j, j] - w12 @ beta
        if denom <= 1e-12:
            raise NotPositiveDefinite(
                f"column {j} update lost positive definiteness (denom {denom:.3e})"
            )
        theta[j, j] = 1.0 / denom
        theta[idx, j] = -beta / denom
        theta[j, idx] = theta[idx, j]


def _glasso_gap(S, theta, lam):
    """Stationarity gap: tr(S theta) - p + lam * ||offdiag(theta)||_1."""
    p = S.shape[0]
    l1_off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(np.sum(S * theta) - p + lam * l1_off)


def _glasso_solve(S, lam, tol, max_sweeps, W=None, theta=None):
    """Block coordinate descent from the given (or diagonal) state.

    Returns (W, theta, gap, sweeps). Raises DidNotConverge when the sweep
    budget runs out or the gap stops improving while still above tol.
    """
    p = S.shape[0]
    d = np.diag(S)
    if np.any(d <= 0):
        raise NotPositiveDefinite("sample covariance has nonpositive diagonal entries")
    if W is None or theta is None:
        W = np.array(S)
        np.fill_diagonal(W, d)
        theta = np.diag(1.0 / d)
    if p == 1:
        return W, theta, 0.0, 0
    inner_tol = scaled_tol(tol * 1e-2, d.max())
    gap = _glasso_gap(S, theta, lam)
    stalled = 0
    for sweep in range(1, max_sweeps + 1):
        _glasso_sweep(S, W, theta, lam, inner_tol, 10_000)
        new_gap = _glasso_gap(S, theta, lam)
        if abs(new_gap) < tol:
            return W, theta, new_gap, sweep
        if abs(new_gap) > abs(gap) * (1.0 - 1e-3):
            stalled += 1
            if stalled >= 5:
                raise DidNotConverge(
                    f"gap stalled at {new_gap:.3e} after {sweep} sweeps",
                    kkt_violation=abs(new_gap),
                )
        else:
            stalled = 0
        gap = new_gap
    raise DidNotConverge(
        f"gap {gap:.3e} above tol {tol:.0e} after {max_sweeps} sweeps",
        kkt_violation=abs(gap),
    )


def _edges_from_precision(theta: np.ndarray) -> EdgeSet:
    p = theta.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    keep = np.abs(theta[iu, ju]) > NONZERO_TOL
    return EdgeSet.from_pairs(p, zip(iu[keep].tolist(), ju[keep].tolist()))


def estimate_glasso(
    data: np.ndarray,
    lam: float,
    tol: float = GLASSO_TOL,
    max_sweeps: int = GLASSO_MAX_SWEEPS,
) -> tuple[EdgeSet, np.ndarray]:
    """L1-penalized Gaussian likelihood, off-diagonal penalty only.

    Block coordinate descent on the covariance: each column update is a
    weighted-lasso subproblem on the current W submatrix, solved by the
    same kernel as the node regressions. lam = 0 is the unpenalized MLE,
    computed directly by inversion.
    """
    if lam < 0:
        raise SignetError(f"lam must be nonnegative, got {lam}")
    S = sample_covariance(data)
    if lam == 0.0:
        theta = invert_spd(S)
        return _edges_from_precision(theta), theta
    _, theta, _, _ = _glasso_solve(S, float(lam), tol, max_sweeps)
    theta = (theta + theta.T) / 2.0
    cholesky(theta)
    return _edges_from_precision(theta), theta


def glasso_path(
    data: np.ndarray,
    lams: np.ndarray,
    tol: float = GLASSO_TOL,
    max_sweeps: int = GLASSO_MAX_SWEEPS,
) -> list[tuple[EdgeSet, np.ndarray] | None]:
    """Warm-started solves along a decreasing penalty path.

    Entries are (EdgeSet, precision) or None where the solve failed (small
    penalties with singular covariance stall); after a failure the state is
    reset to the diagonal start so later points are unaffected by it.
    """
    lams = np.asarray(lams, dtype=np.float64)
    S = sample_covariance(data)
    out: list[tuple[EdgeSet, np.ndarray] | None] = []
    W = None
    theta = None
    for lam in lams:
        if lam == 0.0:
            try:
                t0 = invert_spd(S)
            except (NotPositiveDefinite, SingularMatrix):
                out.append(None)
                continue
            out.append((_edges_from_precision(t0), t0))
            W = None
            theta = None
            continue
        try:
            W, theta, _, _ = _glasso_solve(
                S, float(lam), tol, max_sweeps, W=W, theta=theta
            )
        except (DidNotConverge, NotPositiveDefinite):
            out.append(None)
            W = None
            theta = None
            continue
        sym = (theta + theta.T) / 2.0
        out.append((_edges_from_precision(sym), sym))
    return out


def neighborhood_path_supports(
    data: np.ndarray,
    shape_weights: np.ndarray,
    node_scales: np.ndarray,
    tol: float = PATH_TOL,
    max_sweeps: int = 10_000,
) -> np.ndarray:
    """Nonzero patterns of all node regressions along a scale path.

    shape_weights[j, i] is node j's unit-scale penalty on coefficient i;
    node_scales[t, j] the scale of node j at path point t (pass them
    largest-first so warm starts help). Returns bool (t, j, i) with entry
    true when coefficient i of node j is nonzero at point t.
    """
    x = center_columns(data)
    n, p = x.shape
    node_scales = np.asarray(node_scales, dtype=np.float64)
    if node_scales.ndim != 2 or node_scales.shape[1] != p:
        raise DimensionMismatch(f"node_scales must be (m, {p}), got {node_scales.shape}")
    m = node_scales.shape[0]
    gram = x.T @ x
    tol_eff = scaled_tol(tol, gram.diagonal().max() if p else 0.0)
    supports = np.zeros((m, p, p), dtype=bool)
    for j in range(p):
        idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
        sub = np.ascontiguousarray(gram[np.ix_(idx, idx)])
        xty = np.ascontiguousarray(gram[idx, j])
        shape = np.ascontiguousarray(shape_weights[j, idx])
        betas, kkt, sweeps, converged = _cd_gram_path(
            sub, xty, shape, np.ascontiguousarray(node_scales[:, j]),
            tol_eff, int(max_sweeps),
        )
        if not np.all(converged):
            t_bad = int(np.argmin(converged))
            raise DidNotConverge(
                f"node {j} path point {t_bad} stalled at KKT {kkt[t_bad]:.3e}",
                node=j,
                kkt_violation=float(kkt[t_bad]),
            )
        supports[:, j, idx] = np.abs(betas) > NONZERO_TOL
    return supports
