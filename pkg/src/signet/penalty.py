"""Side information as per-coefficient penalty weights.

Structural knowledge enters through a pairwise distance matrix D and a link
function f. Node j's regression penalizes coefficient i at

    weight[j][i] = scale[j] * f(D[i][j])

so a single free parameter per node (the scale) is tuned while the shape of
the penalty across coefficients is fixed by the distances. Uniform weights
(f constant 1) recover the plain neighborhood-selection penalty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SignetError

# Coordinates and the distance matrix they induce must agree to this.
_COORD_TOL = 1e-9


def _pairwise_euclidean(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(d, 0.0)
    return (d + d.T) / 2.0


@dataclass(frozen=True)
class DistanceInfo:
    """Pairwise distances between the p nodes, optionally backed by coordinates.

    Parameters
    ----------
    matrix : (p, p) ndarray
        Symmetric, zero diagonal, all entries nonnegative.
    coordinates : (p, 3) ndarray, optional
        Node positions; when given, `matrix` must equal their Euclidean
        distances to 1e-9.
    """

    matrix: np.ndarray
    coordinates: np.ndarray | None = None

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise SignetError("distance matrix has non-finite entries")
        if np.any(m < 0):
            raise SignetError("distance matrix has negative entries")
        if not np.allclose(m, m.T, rtol=0.0, atol=0.0):
            raise SignetError("distance matrix is not symmetric")
        if np.any(np.diag(m) != 0.0):
            raise SignetError("distance matrix diagonal is not zero")
        object.__setattr__(self, "matrix", m)
        if self.coordinates is not None:
            c = np.asarray(self.coordinates, dtype=np.float64)
            if c.ndim != 2 or c.shape[0] != m.shape[0] or c.shape[1] != 3:
                raise DimensionMismatch(
                    f"coordinates must be ({m.shape[0]}, 3), got {c.shape}"
                )
            induced = _pairwise_euclidean(c)
            if np.max(np.abs(induced - m)) > _COORD_TOL:
                raise SignetError(
                    "distance matrix disagrees with coordinate-derived distances"
                )
            object.__setattr__(self, "coordinates", c)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_coordinates(cls, coords: np.ndarray) -> "DistanceInfo":
        """Build D as the Euclidean distances between coordinate rows."""
        c = np.asarray(coords, dtype=np.float64)
        if c.ndim != 2 or c.shape[1] != 3:
            raise DimensionMismatch(f"coordinates must be (p, 3), got {c.shape}")
        return cls(matrix=_pairwise_euclidean(c), coordinates=c)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DistanceInfo":
        return cls(matrix=matrix, coordinates=None)


@dataclass(frozen=True)
class LinkFunction:
    """Monotone map from distance to penalty shape.

    Built-in kinds are power(k) and identity; a lookup table with linear
    interpolation (clamped beyond its endpoints) covers everything else.
    Arbitrary callables are deliberately not accepted: the link must be
    serializable so a run can be reproduced from its provenance alone.
    """

    kind: str
    exponent: float = 0.0
    table_x: np.ndarray | None = field(default=None, repr=False)
    table_y: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind == "power":
            if not (np.isfinite(self.exponent) and self.exponent > 0):
                raise SignetError(f"power exponent must be positive, got {self.exponent}")
        elif self.kind == "identity":
            pass
        elif self.kind == "table":
            x = np.asarray(self.table_x, dtype=np.float64)
            y = np.asarray(self.table_y, dtype=np.float64)
            if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size < 2:
                raise SignetError("table link needs matching x/y vectors of length >= 2")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                raise SignetError("table link has non-finite entries")
            if np.any(np.diff(x) <= 0):
                raise SignetError("table link x values must be strictly increasing")
            if np.any(x < 0) or np.any(y < 0):
                raise SignetError("table link entries must be nonnegative")
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_y", y)
        else:
            raise SignetError(f"unknown link kind {self.kind!r}")

    @classmethod
    def power(cls, k: float = 3.0) -> "LinkFunction":
        return cls(kind="power", exponent=float(k))

    @classmethod
    def identity(cls) -> "LinkFunction":
        return cls(kind="identity")

    @classmethod
    def table(cls, x: np.ndarray, y: np.ndarray) -> "LinkFunction":
        return cls(kind="table", table_x=x, table_y=y)

    @property
    def name(self) -> str:
        """Human-readable identifier recorded in provenance."""
        if self.kind == "power":
            return f"power:{self.exponent:g}"
        if self.kind == "identity":
            return "identity"
        return f"table[{self.table_x.size}]"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "power":
            return np.power(x, self.exponent)
        if self.kind == "identity":
            return x.copy()
        return np.interp(x, self.table_x, self.table_y)


@dataclass(frozen=True)
class PenaltyField:
    """Per-coefficient weights for all p node regressions.

    weights[j][i] is the penalty on coefficient i in node j's regression;
    weights[j][j] is never read (the self-coefficient is constrained to
    zero). scale holds the per-node multiplier the weights were built with.
    """

    weights: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        s = np.asarray(self.scale, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch(f"weights must be square, got {w.shape}")
        if s.ndim != 1 or s.size != w.shape[0]:
            raise DimensionMismatch(
                f"scale must have length {w.shape[0]}, got shape {s.shape}"
            )
        off = w[~np.eye(w.shape[0], dtype=bool)]
        if not np.all(np.isfinite(off)) or np.any(off < 0):
            raise SignetError("off-diagonal weights must be finite and nonnegative")
        if np.any(s < 0):
            raise SignetError("scale entries must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "scale", s)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def build_penalty_field(
    d: DistanceInfo, f: LinkFunction, scale: np.ndarray
) -> PenaltyField:
    """Weights weight[j][i] = scale[j] * f(D[i][j]), diagonal zeroed.

    A zero distance between distinct nodes gives weight zero there, i.e.
    an unpenalized coefficient; the solver handles that case exactly.
    """
    s = np.asarray(scale, dtype=np.float64)
    if s.ndim != 1 or s.size != d.dim:
        raise DimensionMismatch(f"scale must have length {d.dim}, got shape {s.shape}")
    shaped = f(d.matrix)
    if not np.all(np.isfinite(shaped)) or np.any(shaped < 0):
        raise SignetError("link produced non-finite or negative values on D")
    w = s[:, None] * shaped
    np.fill_diagonal(w, 0.0)
    return PenaltyField(weights=w, scale=s)


def uniform_penalty_field(p: int, scale: np.ndarray) -> PenaltyField:
    """Constant weights: weight[j][i] = scale[j] for every i != j."""
    s = np.asarray(scale, dtype=np.float64)
    if s.ndim == 0:
        s = np.full(p, float(s))
    if s.size != p:
        raise DimensionMismatch(f"scale must have length {p}, got shape {s.shape}")
    w = np.repeat(s[:, None], p, axis=1)
    np.fill_diagonal(w, 0.0)
    return PenaltyField(weights=w, scale=s.copy())
