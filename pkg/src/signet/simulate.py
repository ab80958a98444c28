"""Synthetic instances: graph, precision matrix, covariance, and data.

Two generators. The first grows a preferential-attachment tree, fills its
support with uniform magnitudes, and sets a common diagonal that hits a
target condition number exactly. The second draws a graph from pairwise
distance Bernoulli probabilities and uses fixed off-diagonal weights with
a spectrum-derived diagonal; that construction is not always positive
definite, so a ridge repairs it when needed and the ridge is recorded in
provenance.

Every instance validates itself on construction: the precision inverts
the covariance, its off-diagonal support equals the truth graph, and it
passes a Cholesky factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import DegenerateSpectrum, DimensionMismatch, SignetError
from .estimators import EdgeSet
from .fileio import (
    read_edges_csv,
    read_json,
    read_matrix_csv,
    write_edges_csv,
    write_json,
    write_matrix_csv,
)
from .linalg import cholesky, eigen_symmetric, invert_spd
from .penalty import DistanceInfo
from .rng import substream, substream_seed

# Minimum eigenvalue enforced by the fixed-weight repair ridge.
_REPAIR_FLOOR = 0.01


@dataclass(frozen=True)
class SimulatedInstance:
    """Truth graph with matching precision, covariance, data, and provenance."""

    truth: EdgeSet
    precision: np.ndarray
    covariance: np.ndarray
    data: np.ndarray
    provenance: dict
    coords: DistanceInfo | None = None

    def __post_init__(self) -> None:
        p = self.truth.dim
        prec = np.asarray(self.precision, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        x = np.asarray(self.data, dtype=np.float64)
        if prec.shape != (p, p) or cov.shape != (p, p):
            raise DimensionMismatch("precision/covariance shape does not match truth")
        if x.ndim != 2 or x.shape[1] != p:
            raise DimensionMismatch(f"data must have {p} columns, got {x.shape}")
        resid = np.max(np.abs(prec @ cov - np.eye(p)))
        if resid > 1e-6:
            raise SignetError(f"precision times covariance off identity by {resid:.2e}")
        iu, ju = np.triu_indices(p, k=1)
        support = np.abs(prec[iu, ju]) > 1e-12
        produced = frozenset(
            (int(i), int(j)) for i, j in zip(iu[support], ju[support])
        )
        if produced != self.truth.edges:
            raise SignetError("precision support does not match the truth graph")
        cholesky(prec)
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "data", x)

    @property
    def dim(self) -> int:
        return self.truth.dim

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]


def preferential_attachment_graph(p: int, seed: int) -> EdgeSet:
    """Tree on p nodes: each arrival attaches proportionally to degree.

    Node arrival order is a seeded permutation; growth starts from an edge
    between the first two arrivals, so the result has exactly p - 1 edges
    and is connected. Attachment samples uniformly from the list of edge
    endpoints, which weights nodes by their current degree.
    """
    if p < 2:
        raise SignetError(f"need at least 2 nodes, got {p}")
    rng = substream(seed, 0)
    arrival = rng.permutation(p)
    pairs = [(int(arrival[0]), int(arrival[1]))]
    endpoints = [int(arrival[0]), int(arrival[1])]
    for t in range(2, p):
        v = int(arrival[t])
        u = endpoints[int(rng.integers(len(endpoints)))]
        pairs.append((v, u))
        endpoints.append(v)
        endpoints.append(u)
    return EdgeSet.from_pairs(p, pairs)


def precision_from_edges_condnum(
    edges: EdgeSet,
    cond_target: float = 100.0,
    magnitude_range: tuple[float, float] = (0.2, 1.0),
    seed: int = 0,
) -> np.ndarray:
    """Uniform off-diagonal magnitudes, common diagonal hitting cond_target.

    Support entries are drawn from [-hi, -lo] union [lo, hi] (fair sign).
    With A the off-diagonal matrix and k the target, the diagonal
    d = (eig_max(A) - k eig_min(A)) / (k - 1) shifts the spectrum so that
    (eig_max + d) / (eig_min + d) = k exactly and everything is positive.
    """
    if edges.n_edges == 0:
        raise SignetError("need at least one edge")
    if cond_target <= 1:
        raise SignetError(f"cond_target must exceed 1, got {cond_target}")
    lo, hi = magnitude_range
    if not (0 < lo <= hi):
        raise SignetError(f"invalid magnitude range {magnitude_range}")
    rng = substream(seed, 0)
    p = edges.dim
    pairs = edges.sorted_edges()
    mags = rng.uniform(lo, hi, len(pairs))
    signs = rng.integers(0, 2, len(pairs)) * 2 - 1
    a = np.zeros((p, p))
    for (i, j), m, s in zip(pairs, mags, signs):
        a[i, j] = s * m
        a[j, i] = s * m
    values, _ = eigen_symmetric(a)
    lam_min, lam_max = float(values[0]), float(values[-1])
    if lam_max == lam_min:
        raise DegenerateSpectrum("off-diagonal spectrum is a single point")
    d = (lam_max - cond_target * lam_min) / (cond_target - 1.0)
    out = a + d * np.eye(p)
    return out


def distance_bernoulli_graph(
    dist: DistanceInfo,
    intercept: float = 10.0,
    slope: float = 1.0 / 3.0,
    seed: int = 0,
) -> EdgeSet:
    """Each pair (i, j) is an edge with probability expit(intercept - slope D_ij)."""
    rng = substream(seed, 0)
    p = dist.dim
    iu, ju = np.triu_indices(p, k=1)
    probs = expit(intercept - slope * dist.matrix[iu, ju])
    draws = rng.random(iu.size)
    keep = draws < probs
    return EdgeSet.from_pairs(p, zip(iu[keep].tolist(), ju[keep].tolist()))


def precision_from_edges_fixed(
    edges: EdgeSet, offdiag: float = 0.3
) -> tuple[np.ndarray, float]:
    """Fixed off-diagonal weights; diagonal 0.2 + 0.3 sigma_min(adjacency).

    sigma_min is the smallest singular value of the 0/1 adjacency matrix
    (the smallest absolute eigenvalue, the matrix being symmetric). The
    construction can be indefinite for some edge sets, so when the minimum
    eigenvalue falls below 0.01 a ridge delta is added to lift it exactly
    there. Returns (matrix, delta); delta is 0 when no repair was needed.
    """
    p = edges.dim
    adj = edges.adjacency()
    if edges.n_edges == 0:
        sigma_min = 0.0
    else:
        values, _ = eigen_symmetric(adj)
        sigma_min = float(np.min(np.abs(values)))
    out = offdiag * adj + (0.2 + 0.3 * sigma_min) * np.eye(p)
    values, _ = eigen_symmetric(out)
    min_eig = float(values[0])
    delta = 0.0
    if min_eig < _REPAIR_FLOOR:
        delta = _REPAIR_FLOOR - min_eig
        out = out + delta * np.eye(p)
    return out, delta


def sample_gaussian(covariance: np.ndarray, n: int, seed: int) -> np.ndarray:
    """n i.i.d. rows from N(0, covariance) via the Cholesky factor."""
    if n < 0:
        raise SignetError(f"n must be nonnegative, got {n}")
    L = cholesky(np.asarray(covariance, dtype=np.float64))
    rng = substream(seed, 0)
    z = rng.standard_normal((n, L.shape[0]))
    return z @ L.T


def synthetic_coordinates(p: int, box_side: float = 160.0, seed: int = 0) -> DistanceInfo:
    """p points uniform in [0, box_side]^3 with their pairwise distances.

    The default side, with the default Bernoulli parameters (probability
    0.5 at distance 30), gives sparse graphs at p = 116: a development
    calibration run put the expected density between 1% and 20%.
    """
    if p < 1:
        raise SignetError(f"need at least one point, got {p}")
    if box_side <= 0:
        raise SignetError(f"box_side must be positive, got {box_side}")
    rng = substream(seed, 0)
    coords = rng.uniform(0.0, box_side, (p, 3))
    return DistanceInfo.from_coordinates(coords)


def make_pa_condnum_instance(
    p: int,
    n: int,
    seed: int,
    cond_target: float = 100.0,
    magnitude_range: tuple[float, float] = (0.2, 1.0),
) -> SimulatedInstance:
    """Preferential-attachment tree, condition-targeted precision, n samples."""
    truth = preferential_attachment_graph(p, substream_seed(seed, 0))
    precision = precision_from_edges_condnum(
        truth, cond_target, magnitude_range, substream_seed(seed, 1)
    )
    covariance = invert_spd(precision)
    data = sample_gaussian(covariance, n, substream_seed(seed, 2))
    provenance = {
        "generator": "pa-condnum",
        "p": p,
        "n": n,
        "seed": int(seed),
        "cond_target": float(cond_target),
        "magnitude_range": [float(magnitude_range[0]), float(magnitude_range[1])],
    }
    return SimulatedInstance(
        truth=truth,
        precision=precision,
        covariance=covariance,
        data=data,
        provenance=provenance,
    )


def make_distance_bernoulli_instance(
    p: int,
    n: int,
    seed: int,
    box_side: float = 160.0,
    intercept: float = 10.0,
    slope: float = 1.0 / 3.0,
    offdiag: float = 0.3,
) -> SimulatedInstance:
    """Distance-Bernoulli graph over synthetic coordinates, fixed weights."""
    coords = synthetic_coordinates(p, box_side, substream_seed(seed, 0))
    truth = distance_bernoulli_graph(coords, intercept, slope, substream_seed(seed, 1))
    precision, delta = precision_from_edges_fixed(truth, offdiag)
    covariance = invert_spd(precision)
    data = sample_gaussian(covariance, n, substream_seed(seed, 2))
    provenance = {
        "generator": "distance-bernoulli",
        "p": p,
        "n": n,
        "seed": int(seed),
        "box_side": float(box_side),
        "intercept": float(intercept),
        "slope": float(slope),
        "offdiag": float(offdiag),
        "repair_delta": float(delta),
    }
    return SimulatedInstance(
        truth=truth,
        precision=precision,
        covariance=covariance,
        data=data,
        provenance=provenance,
        coords=coords,
    )


def save_instance(instance: SimulatedInstance, out_dir: str | Path) -> None:
    """Serialize to a directory: data, truth edges, precision, provenance.

    Coordinates are written only when the instance has them.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "data.csv", instance.data)
    write_edges_csv(out / "truth.edges", instance.truth)
    write_matrix_csv(out / "precision.csv", instance.precision)
    if instance.coords is not None:
        write_matrix_csv(out / "coords.csv", instance.coords.coordinates)
    write_json(out / "provenance.json", dict(instance.provenance))


def load_instance(in_dir: str | Path) -> SimulatedInstance:
    """Rebuild an instance from save_instance output; re-runs all checks."""
    src = Path(in_dir)
    data = read_matrix_csv(src / "data.csv")
    precision = read_matrix_csv(src / "precision.csv")
    p = precision.shape[0]
    truth = read_edges_csv(src / "truth.edges", p)
    provenance = read_json(src / "provenance.json")
    coords = None
    coords_path = src / "coords.csv"
    if coords_path.exists():
        coords = DistanceInfo.from_coordinates(read_matrix_csv(coords_path))
    covariance = invert_spd(precision)
    return SimulatedInstance(
        truth=truth,
        precision=precision,
        covariance=covariance,
        data=data,
        provenance=provenance,
        coords=coords,
    )
