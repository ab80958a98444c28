"""The three study pipelines: accuracy heat map, ROC comparison, and
split-half reproducibility, each over seeded replicate instances.

Replicates are independent tasks keyed by an index; every task derives its
streams from (master seed, index), and results are reduced in index order,
so --jobs changes wall time but never a single output byte. Worker
functions are module-level so a fork-based process pool can run them.

On failure, whatever completed is still written next to a manifest listing
the finished tasks, and the error is re-raised.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import RequiresMoreSamples
from .estimators import (
    EdgeSet,
    edges_from_support,
    neighborhood_path_supports,
    glasso_path,
    partial_correlations,
    sample_covariance,
)
from .fileio import format_float, write_json, write_matrix_csv
from .metrics import (
    average_roc,
    hamming,
    roc_from_edge_sets,
    split_half_reproducibility,
)
from .rng import substream_seed
from .simulate import make_distance_bernoulli_instance, make_pa_condnum_instance
from .tuning import (
    CvConfig,
    ScalePath,
    bic_glasso_path,
    cv_calibrated_edges,
    lambda_max_matrix,
)

FIGURE1_SIZES = (50, 100, 200, 400, 600, 800, 1000, 1200, 1400, 1600)
FIGURE1_METHODS = ("thr", "mb-or", "mb-and", "glasso")
FIGURE2_METHODS = ("si", "mb", "thr", "glasso")
TABLE1_METHODS = ("si", "mb", "glasso")

DEFAULT_P = 116
DEFAULT_N_SCANS = 210


def _collect(fn, tasks, jobs):
    """Run fn over tasks, in order; returns (results, error_or_None).

    results holds the outputs of the tasks that finished before any
    failure, in task order regardless of scheduling.
    """
    results = []
    error = None
    if jobs <= 1:
        for task in tasks:
            try:
                results.append(fn(task))
            except Exception as exc:
                error = exc
                break
        return results, error
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        try:
            for result in pool.map(fn, tasks):
                results.append(result)
        except Exception as exc:
            error = exc
    return results, error


def _offdiag_max(s: np.ndarray) -> float:
    off = np.abs(s - np.diag(np.diag(s)))
    return float(off.max())


def _glasso_lambda_grid(data: np.ndarray, grid_size: int, floor: float) -> ScalePath:
    """Penalty grid anchored where the graphical lasso is exactly diagonal."""
    anchor = _offdiag_max(sample_covariance(data))
    return ScalePath.geometric(anchor, size=grid_size, floor_ratio=floor)


def _si_shape(dist_matrix: np.ndarray, exponent: float = 3.0) -> np.ndarray:
    shaped = dist_matrix**exponent
    np.fill_diagonal(shaped, 0.0)
    return shaped


def _uniform_shape(p: int) -> np.ndarray:
    shape = np.ones((p, p))
    np.fill_diagonal(shape, 0.0)
    return shape


def _neighborhood_path_sets(
    data: np.ndarray,
    shape: np.ndarray,
    multipliers: np.ndarray,
    rule: str,
) -> list[EdgeSet]:
    anchors = lambda_max_matrix(data, shape)
    node_scales = multipliers[:, None] * anchors[None, :]
    supports = neighborhood_path_supports(data, shape, node_scales)
    return [edges_from_support(supports[t], rule) for t in range(multipliers.size)]


# ---------------------------------------------------------------- figure 1


def _thr_count_oracle(data: np.ndarray, truth: EdgeSet, grid_size: int) -> int:
    """Best Hamming over thresholds keeping 1..grid_size edges.

    Thresholding is calibrated by connection count, so its tuning path is
    the count k. Keeping the k pairs of largest |partial correlation| gives
    Hamming |E| + k - 2 TP(k), scanned from the sorted order in one pass.
    """
    rho = partial_correlations(data)
    p = rho.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    order = np.argsort(np.abs(rho[iu, ju]))[::-1]
    hits = np.array(
        [(i, j) in truth.edges for i, j in zip(iu[order], ju[order])]
    )
    k = min(int(grid_size), hits.size)
    tp = np.cumsum(hits[:k])
    counts = np.arange(1, k + 1)
    return int((truth.n_edges + counts - 2 * tp).min())


def _figure1_cell(task):
    """Oracle-tuned Hamming distance of every method on one instance."""
    (seed, p, n, index, grid_size, floor, cond_target) = task
    inst = make_pa_condnum_instance(p, n, substream_seed(seed, index), cond_target)
    data, truth = inst.data, inst.truth
    out = {}
    try:
        out["thr"] = _thr_count_oracle(data, truth, grid_size)
    except RequiresMoreSamples:
        out["thr"] = None
    multipliers = ScalePath.geometric(1.0, size=grid_size, floor_ratio=floor).values
    shape = _uniform_shape(p)
    anchors = lambda_max_matrix(data, shape)
    supports = neighborhood_path_supports(
        data, shape, multipliers[:, None] * anchors[None, :]
    )
    for rule in ("or", "and"):
        best = None
        for t in range(multipliers.size):
            h = hamming(edges_from_support(supports[t], rule), truth)
            if best is None or h < best:
                best = h
        out[f"mb-{rule}"] = best
    lam_grid = _glasso_lambda_grid(data, grid_size, floor)
    best = None
    for entry in glasso_path(data, lam_grid.values):
        if entry is None:
            continue
        h = hamming(entry[0], truth)
        if best is None or h < best:
            best = h
    out["glasso"] = best
    return out


def run_figure1(
    out_dir: str | Path,
    sizes: tuple = FIGURE1_SIZES,
    reps: int = 20,
    p: int = DEFAULT_P,
    seed: int = 0,
    grid_size: int = 100,
    grid_floor_ratio: float = 0.01,
    cond_target: float = 100.0,
    jobs: int = 1,
) -> dict:
    """Oracle-tuned accuracy versus sample size, averaged over replicates.

    Writes heatmap.csv (methods by sizes, mean Hamming, NA where the
    method refuses), long.csv (every cell), and manifest.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for si, n in enumerate(sizes):
        for r in range(reps):
            index = si * reps + r
            tasks.append((seed, p, int(n), index, grid_size, grid_floor_ratio,
                          cond_target))
    results, error = _collect(_figure1_cell, tasks, jobs)

    long_lines = ["method,n,rep,hamming"]
    for t, res in enumerate(results):
        si, r = divmod(t, reps)
        for method in FIGURE1_METHODS:
            h = res[method]
            long_lines.append(
                f"{method},{sizes[si]},{r},{'NA' if h is None else h}"
            )
    (out / "long.csv").write_text("\n".join(long_lines) + "\n")

    means: dict = {m: {} for m in FIGURE1_METHODS}
    full = len(results) == len(tasks)
    for si, n in enumerate(sizes):
        block = results[si * reps : (si + 1) * reps]
        if len(block) < reps:
            continue
        for method in FIGURE1_METHODS:
            vals = [res[method] for res in block]
            if any(v is None for v in vals):
                means[method][n] = None
            else:
                means[method][n] = float(np.mean(vals))
    heat_lines = ["method," + ",".join(str(n) for n in sizes)]
    for method in FIGURE1_METHODS:
        cells = []
        for n in sizes:
            v = means[method].get(n)
            cells.append("NA" if v is None else format_float(v))
        heat_lines.append(f"{method}," + ",".join(cells))
    (out / "heatmap.csv").write_text("\n".join(heat_lines) + "\n")

    manifest = {
        "experiment": "figure1",
        "status": "complete" if full else "partial",
        "completed_tasks": len(results),
        "total_tasks": len(tasks),
        "config": {
            "sizes": list(sizes),
            "reps": reps,
            "p": p,
            "seed": seed,
            "grid_size": grid_size,
            "grid_floor_ratio": grid_floor_ratio,
            "cond_target": cond_target,
            "methods": list(FIGURE1_METHODS),
        },
    }
    write_json(out / "manifest.json", manifest)
    if error is not None:
        raise error
    return {"means": means, "manifest": manifest}


# ---------------------------------------------------------------- figure 2


def _figure2_rep(task):
    """ROC curve per method on one replicate instance."""
    (seed, p, n, rep, methods, grid_size, floor) = task
    inst = make_distance_bernoulli_instance(p, n, substream_seed(seed, rep))
    data, truth = inst.data, inst.truth
    multipliers = ScalePath.geometric(1.0, size=grid_size, floor_ratio=floor).values
    curves = {}
    for method in methods:
        if method == "si":
            shape = _si_shape(inst.coords.matrix)
            sets = _neighborhood_path_sets(data, shape, multipliers, "and")
            curves[method] = roc_from_edge_sets(multipliers, sets, truth)
        elif method == "mb":
            shape = _uniform_shape(p)
            sets = _neighborhood_path_sets(data, shape, multipliers, "and")
            curves[method] = roc_from_edge_sets(multipliers, sets, truth)
        elif method == "thr":
            rho = partial_correlations(data)
            iu, ju = np.triu_indices(p, k=1)
            mags = np.abs(rho[iu, ju])
            sets = [
                EdgeSet.from_pairs(
                    p, zip(iu[mags > tau].tolist(), ju[mags > tau].tolist())
                )
                for tau in multipliers
            ]
            curves[method] = roc_from_edge_sets(multipliers, sets, truth)
        elif method == "glasso":
            lam_grid = _glasso_lambda_grid(data, grid_size, floor)
            sets = []
            last = EdgeSet(dim=p, edges=frozenset())
            for entry in glasso_path(data, lam_grid.values):
                # A failed point inherits its predecessor so every curve
                # keeps the full grid length for index-matched averaging.
                if entry is not None:
                    last = entry[0]
                sets.append(last)
            curves[method] = roc_from_edge_sets(lam_grid.values, sets, truth)
    return curves


def run_figure2(
    out_dir: str | Path,
    reps: int = 20,
    p: int = DEFAULT_P,
    n: int = DEFAULT_N_SCANS,
    seed: int = 0,
    methods: tuple = FIGURE2_METHODS,
    grid_size: int = 100,
    grid_floor_ratio: float = 1e-6,
    jobs: int = 1,
) -> dict:
    """Average ROC curves over replicate distance-Bernoulli instances.

    The floor is far below the usual tuning floor: a ROC needs the sweep to
    reach the dense end, and the cubed-distance weights spread entry points
    over several decades of the multiplier.

    Writes roc_<method>.csv (param, fpr, tpr of the index-averaged curve),
    auc.json (averaged-curve AUC and per-replicate AUCs), manifest.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    methods = tuple(methods)
    tasks = [
        (seed, p, n, rep, methods, grid_size, grid_floor_ratio)
        for rep in range(reps)
    ]
    results, error = _collect(_figure2_rep, tasks, jobs)

    aucs = {}
    for method in methods:
        reps_done = [res[method] for res in results]
        if not reps_done:
            continue
        avg = average_roc(reps_done)
        write_matrix_csv(
            out / f"roc_{method}.csv",
            np.column_stack([avg.params, avg.fpr, avg.tpr]),
            header=["param", "fpr", "tpr"],
        )
        aucs[method] = {
            "auc_of_average": avg.auc,
            "per_rep": [c.auc for c in reps_done],
            "mean_of_per_rep": float(np.mean([c.auc for c in reps_done])),
        }
    write_json(out / "auc.json", {"aucs": aucs})

    manifest = {
        "experiment": "figure2",
        "status": "complete" if len(results) == len(tasks) else "partial",
        "completed_tasks": len(results),
        "total_tasks": len(tasks),
        "config": {
            "reps": reps,
            "p": p,
            "n": n,
            "seed": seed,
            "methods": list(methods),
            "grid_size": grid_size,
            "grid_floor_ratio": grid_floor_ratio,
        },
    }
    write_json(out / "manifest.json", manifest)
    if error is not None:
        raise error
    return {"aucs": aucs, "manifest": manifest}


# ------------------------------------------------------------- table 1 sim


def _table1_cell(task):
    """Split-half reproducibility of one method on one instance."""
    (seed, p, n, inst_idx, method, splits, folds, grid_size, floor) = task
    inst_seed = substream_seed(seed, inst_idx)
    inst = make_distance_bernoulli_instance(p, n, inst_seed)
    data = inst.data
    split_seed = substream_seed(inst_seed, 3)

    if method in ("si", "mb"):
        if method == "si":
            shape = _si_shape(inst.coords.matrix)
        else:
            shape = _uniform_shape(p)

        def handle(half, half_seed):
            cfg = CvConfig(
                seed=half_seed,
                folds=folds,
                grid_size=grid_size,
                grid_floor_ratio=floor,
            )
            edges, _, _ = cv_calibrated_edges(half, shape, cfg, rule="and")
            return edges

    elif method == "glasso":

        def handle(half, half_seed):
            grid = _glasso_lambda_grid(half, grid_size, floor)
            best, _, path = bic_glasso_path(half, grid)
            return path[best][0]

    else:
        raise ValueError(f"unknown method {method!r}")

    report = split_half_reproducibility(handle, data, n_splits=splits, seed=split_seed)
    return {
        "per_split": list(report.per_split),
        "mean": report.mean,
        "sd": report.sd,
        "n_undefined": report.n_undefined,
    }


def run_table1_sim(
    out_dir: str | Path,
    instances: int = 10,
    splits: int = 20,
    p: int = DEFAULT_P,
    n: int = DEFAULT_N_SCANS,
    seed: int = 0,
    methods: tuple = TABLE1_METHODS,
    folds: int = 10,
    grid_size: int = 100,
    grid_floor_ratio: float = 0.01,
    jobs: int = 1,
) -> dict:
    """Split-half reproducibility per method over replicate instances.

    Writes summary.csv (method, mean agreement over instances, mean SD),
    long.csv (every instance), and manifest.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    methods = tuple(methods)
    tasks = []
    for inst_idx in range(instances):
        for method in methods:
            tasks.append(
                (seed, p, n, inst_idx, method, splits, folds, grid_size,
                 grid_floor_ratio)
            )
    results, error = _collect(_table1_cell, tasks, jobs)

    long_lines = ["method,instance,mean_agreement,sd,n_undefined"]
    per_method: dict = {m: [] for m in methods}
    for t, res in enumerate(results):
        inst_idx, mi = divmod(t, len(methods))
        method = methods[mi]
        per_method[method].append(res)
        long_lines.append(
            f"{method},{inst_idx},{format_float(res['mean'])},"
            f"{format_float(res['sd'])},{res['n_undefined']}"
        )
    (out / "long.csv").write_text("\n".join(long_lines) + "\n")

    summary: dict = {}
    summary_lines = ["method,mean_agreement,mean_sd,instances"]
    for method in methods:
        rows = per_method[method]
        if not rows:
            continue
        mean_agree = float(np.mean([r["mean"] for r in rows]))
        mean_sd = float(np.mean([r["sd"] for r in rows]))
        summary[method] = {
            "mean_agreement": mean_agree,
            "mean_sd": mean_sd,
            "instances": len(rows),
        }
        summary_lines.append(
            f"{method},{format_float(mean_agree)},{format_float(mean_sd)},{len(rows)}"
        )
    (out / "summary.csv").write_text("\n".join(summary_lines) + "\n")

    manifest = {
        "experiment": "table1-sim",
        "status": "complete" if len(results) == len(tasks) else "partial",
        "completed_tasks": len(results),
        "total_tasks": len(tasks),
        "config": {
            "instances": instances,
            "splits": splits,
            "p": p,
            "n": n,
            "seed": seed,
            "methods": list(methods),
            "folds": folds,
            "grid_size": grid_size,
            "grid_floor_ratio": grid_floor_ratio,
        },
    }
    write_json(out / "manifest.json", manifest)
    if error is not None:
        raise error
    return {"summary": summary, "manifest": manifest}
