"""File formats: CSV matrices, 1-based edge lists, canonical JSON.

Every writer is deterministic: floats are fixed at 12 significant digits,
JSON keys are sorted, and nothing records wall-clock state, so a rerun
with identical inputs is byte-identical. Matrix readers auto-detect an
optional single header row by a non-numeric first token.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import SignetError
from .estimators import EdgeSet

SCHEMA_VERSION = 1

_FLOAT_FMT = "%.12g"


def format_float(x: float) -> str:
    return _FLOAT_FMT % float(x)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def write_matrix_csv(
    path: str | Path, matrix: np.ndarray, header: list[str] | None = None
) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    lines = []
    if header is not None:
        if len(header) != m.shape[1]:
            raise SignetError(
                f"header has {len(header)} fields for {m.shape[1]} columns"
            )
        lines.append(",".join(header))
    for row in m:
        lines.append(",".join(format_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    text = Path(path).read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        tokens = [t.strip() for t in line.split(",")]
        if not rows and not _is_number(tokens[0]):
            continue
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as exc:
            raise SignetError(f"{path}:{lineno + 1}: non-numeric value") from exc
    if not rows:
        raise SignetError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise SignetError(f"{path}: ragged rows (widths {sorted(widths)})")
    return np.array(rows, dtype=np.float64)


def write_edges_csv(path: str | Path, edges: EdgeSet) -> None:
    """Edge list as 1-based 'i,j' lines, i < j, sorted; no header."""
    lines = [f"{i + 1},{j + 1}" for i, j in edges.sorted_edges()]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edges_csv(path: str | Path, dim: int) -> EdgeSet:
    """Parse a 1-based edge list; an empty file is the empty graph."""
    text = Path(path).read_text()
    pairs = []
    seen_data = False
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        tokens = [t.strip() for t in line.split(",")]
        if not seen_data and not _is_number(tokens[0]):
            continue
        seen_data = True
        if len(tokens) != 2:
            raise SignetError(f"{path}:{lineno + 1}: expected two fields")
        try:
            a, b = int(float(tokens[0])), int(float(tokens[1]))
        except ValueError as exc:
            raise SignetError(f"{path}:{lineno + 1}: non-numeric pair") from exc
        pairs.append((a - 1, b - 1))
    return EdgeSet.from_pairs(dim, pairs)


def _canonical(obj):
    """Sorted-key, 12-significant-digit view of obj for stable JSON.

    Non-finite floats become null: JSON has no representation for them and
    they only occur as sentinel values (failed grid points).
    """
    if isinstance(obj, dict):
        return {str(k): _canonical(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(format_float(x))
    if obj is None or isinstance(obj, str):
        return obj
    raise SignetError(f"cannot serialize {type(obj).__name__} to JSON")


def write_json(path: str | Path, obj: dict) -> None:
    payload = dict(obj)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    text = json.dumps(_canonical(payload), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
