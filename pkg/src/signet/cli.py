"""Command-line surface: simulate, estimate, tune, evaluate, reproduce.

Exit codes: 0 success, 2 configuration problem, 3 not enough samples for
the requested method, 4 solver non-convergence. All randomness flows from
--seed; simulate and evaluate refuse to run without it so no result ever
depends on silent nondeterminism. Every run writes its resolved
configuration beside its outputs; timings go to run.log, which is the one
file allowed to differ between identical reruns.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DidNotConverge, RequiresMoreSamples, SignetError
from .estimators import (
    estimate_glasso,
    estimate_mb,
    estimate_si,
    estimate_thr,
)
from .experiments import (
    _glasso_lambda_grid,
    _neighborhood_path_sets,
    _si_shape,
    _uniform_shape,
    run_figure1,
    run_figure2,
    run_table1_sim,
)
from .fileio import (
    read_edges_csv,
    read_matrix_csv,
    write_edges_csv,
    write_json,
)
from .metrics import hamming, roc_from_edge_sets, split_half_reproducibility
from .penalty import DistanceInfo, LinkFunction, build_penalty_field
from .simulate import (
    load_instance,
    make_distance_bernoulli_instance,
    make_pa_condnum_instance,
    save_instance,
)
from .tuning import (
    CvConfig,
    ScalePath,
    bic_glasso_path,
    cv_calibrated_edges,
    match_edge_count_threshold,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SAMPLES = 3
EXIT_CONVERGENCE = 4


class _ConfigError(Exception):
    pass


def _parse_link(spec: str) -> LinkFunction:
    if spec == "identity":
        return LinkFunction.identity()
    if spec.startswith("power"):
        if spec == "power":
            return LinkFunction.power(3.0)
        _, _, arg = spec.partition(":")
        try:
            return LinkFunction.power(float(arg))
        except (ValueError, SignetError) as exc:
            raise _ConfigError(f"--link: bad power exponent {arg!r}") from exc
    if spec.startswith("table:"):
        path = spec[len("table:"):]
        table = read_matrix_csv(path)
        if table.ndim != 2 or table.shape[1] != 2:
            raise _ConfigError(f"--link table file {path} must have two columns")
        return LinkFunction.table(table[:, 0], table[:, 1])
    raise _ConfigError(f"--link: unknown link {spec!r}")


def _load_distance(args, p: int) -> DistanceInfo:
    if (args.coords is None) == (args.dist is None):
        raise _ConfigError("--method si needs exactly one of --coords or --dist")
    if args.coords is not None:
        coords = read_matrix_csv(args.coords)
        if coords.shape != (p, 3):
            raise _ConfigError(
                f"--coords: expected {p} rows and 3 columns, got {coords.shape}"
            )
        return DistanceInfo.from_coordinates(coords)
    matrix = read_matrix_csv(args.dist)
    if matrix.shape != (p, p):
        raise _ConfigError(f"--dist: expected a {p}x{p} matrix, got {matrix.shape}")
    return DistanceInfo.from_matrix(matrix)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _provenance(command: str, args, extra: dict | None = None) -> dict:
    config = {
        k: (list(v) if isinstance(v, tuple) else v)
        for k, v in sorted(vars(args).items())
        if k != "func" and v is not None and not callable(v)
    }
    block = {"command": command, "version": __version__, "config": config}
    if extra:
        block.update(extra)
    return block


def _cmd_simulate(args) -> int:
    if args.p < 2:
        raise _ConfigError("--p: need at least 2 nodes (no edges possible below that)")
    if args.n < 1:
        raise _ConfigError("--n: need at least one sample")
    out = _out_dir(args)
    if args.generator == "pa-condnum":
        inst = make_pa_condnum_instance(
            args.p, args.n, args.seed, cond_target=args.cond_target
        )
    else:
        inst = make_distance_bernoulli_instance(
            args.p, args.n, args.seed, box_side=args.box_side
        )
    save_instance(inst, out)
    write_json(out / "run.json", _provenance("simulate", args))
    return EXIT_OK


def _estimate_edges(args, data: np.ndarray):
    """Shared by estimate and tune: returns (edges_or_None, report dict)."""
    if args.grid_floor is None:
        args.grid_floor = 0.01
    n, p = data.shape
    report: dict = {"method": args.method, "n": n, "p": p}
    if args.method in ("si", "mb"):
        if args.method == "si":
            dist = _load_distance(args, p)
            link = _parse_link(args.link)
            shape = build_penalty_field(dist, link, np.ones(p)).weights
            report["link"] = link.name
        else:
            shape = _uniform_shape(p)
        if args.scale_all is not None:
            scales = np.full(p, float(args.scale_all))
            report["scale_all"] = float(args.scale_all)
            report["scales"] = scales
            if args.method == "si":
                edges = estimate_si(data, dist, link, scales, rule=args.rule)
            else:
                edges = estimate_mb(data, scales, rule=args.rule)
            return edges, report
        cfg = CvConfig(
            seed=args.seed,
            folds=args.folds,
            grid_size=args.grid_size,
            grid_floor_ratio=args.grid_floor,
        )
        edges, scales, curves = cv_calibrated_edges(data, shape, cfg, rule=args.rule)
        report["scales"] = scales
        report["cv_curves"] = curves.T
        report["folds"] = args.folds
        return edges, report
    if args.method == "thr":
        if args.match_edges is not None:
            tau = match_edge_count_threshold(data, args.match_edges)
            report["match_edges"] = args.match_edges
        elif args.threshold is not None:
            tau = float(args.threshold)
        else:
            raise _ConfigError("--method thr needs --threshold or --match-edges")
        report["threshold"] = tau
        return estimate_thr(data, tau), report
    if args.method == "glasso":
        if args.lam is not None:
            lam = float(args.lam)
            if lam < 0:
                raise _ConfigError("--lambda: must be nonnegative")
        else:
            grid = _glasso_lambda_grid(data, args.grid_size, args.grid_floor)
            best, curve, path = bic_glasso_path(data, grid)
            lam = float(grid.values[best])
            report["bic_curve"] = curve
            report["bic_grid"] = grid.values
        report["lambda"] = lam
        edges, _ = estimate_glasso(data, lam)
        return edges, report
    raise _ConfigError(f"--method: unknown method {args.method!r}")


def _cmd_estimate(args) -> int:
    started = time.perf_counter()
    data = read_matrix_csv(args.data)
    out = _out_dir(args)
    edges, report = _estimate_edges(args, data)
    write_edges_csv(out / "edges.csv", edges)
    report["n_edges"] = edges.n_edges
    report["provenance"] = _provenance("estimate", args)
    write_json(out / "report.json", report)
    (out / "run.log").write_text(
        f"estimate method={args.method} elapsed={time.perf_counter() - started:.3f}s\n"
    )
    return EXIT_OK


def _cmd_tune(args) -> int:
    started = time.perf_counter()
    data = read_matrix_csv(args.data)
    out = _out_dir(args)
    _, report = _estimate_edges(args, data)
    report["provenance"] = _provenance("tune", args)
    write_json(out / "report.json", report)
    (out / "run.log").write_text(
        f"tune method={args.method} elapsed={time.perf_counter() - started:.3f}s\n"
    )
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    out = _out_dir(args)
    if args.metric == "hamming":
        if args.edges_a is None or args.edges_b is None or args.dim is None:
            raise _ConfigError("--metric hamming needs --edges-a, --edges-b and --dim")
        a = read_edges_csv(args.edges_a, args.dim)
        b = read_edges_csv(args.edges_b, args.dim)
        d = hamming(a, b)
        write_json(out / "hamming.json", {"hamming": d, "dim": args.dim})
        print(f"hamming {d}")
        return EXIT_OK
    if args.instance is None:
        raise _ConfigError(f"--metric {args.metric} needs --instance")
    inst = load_instance(args.instance)
    data, truth, p = inst.data, inst.truth, inst.truth.dim
    if args.metric == "roc":
        # A ROC wants the whole sweep, so the floor sits far below the
        # tuning default; distance-cubed weights need the extra decades.
        if args.grid_floor is None:
            args.grid_floor = 1e-6
        multipliers = ScalePath.geometric(
            1.0, size=args.grid_size, floor_ratio=args.grid_floor
        ).values
        if args.method in ("si", "mb"):
            if args.method == "si":
                if inst.coords is None:
                    raise _ConfigError("instance has no coordinates; SI needs them")
                shape = _si_shape(inst.coords.matrix)
            else:
                shape = _uniform_shape(p)
            sets = _neighborhood_path_sets(data, shape, multipliers, args.rule)
            curve = roc_from_edge_sets(multipliers, sets, truth)
        elif args.method == "thr":
            sets = [estimate_thr(data, float(tau)) for tau in multipliers]
            curve = roc_from_edge_sets(multipliers, sets, truth)
        elif args.method == "glasso":
            from .estimators import glasso_path

            grid = _glasso_lambda_grid(data, args.grid_size, args.grid_floor)
            entries = glasso_path(data, grid.values)
            params = [v for v, e in zip(grid.values, entries) if e is not None]
            sets = [e[0] for e in entries if e is not None]
            curve = roc_from_edge_sets(params, sets, truth)
        else:
            raise _ConfigError(f"--method: unknown method {args.method!r}")
        rows = "\n".join(
            f"{pv:.12g},{fv:.12g},{tv:.12g}"
            for pv, fv, tv in zip(curve.params, curve.fpr, curve.tpr)
        )
        (out / f"roc_{args.method}.csv").write_text("param,fpr,tpr\n" + rows + "\n")
        write_json(
            out / "roc.json",
            {
                "method": args.method,
                "auc": curve.auc,
                "provenance": _provenance("evaluate", args),
            },
        )
        return EXIT_OK
    if args.metric == "reproducibility":
        if args.grid_floor is None:
            args.grid_floor = 0.01
        method = args.method

        def handle(half, half_seed):
            if method in ("si", "mb"):
                if method == "si":
                    if inst.coords is None:
                        raise _ConfigError("instance has no coordinates; SI needs them")
                    shape = _si_shape(inst.coords.matrix)
                else:
                    shape = _uniform_shape(p)
                cfg = CvConfig(
                    seed=half_seed,
                    folds=args.folds,
                    grid_size=args.grid_size,
                    grid_floor_ratio=args.grid_floor,
                )
                return cv_calibrated_edges(half, shape, cfg, rule=args.rule)[0]
            if method == "glasso":
                grid = _glasso_lambda_grid(half, args.grid_size, args.grid_floor)
                best, _, path = bic_glasso_path(half, grid)
                return path[best][0]
            raise _ConfigError(f"--method: unknown method {method!r}")

        report = split_half_reproducibility(
            handle, data, n_splits=args.splits, seed=args.seed
        )
        write_json(
            out / "reproducibility.json",
            {
                "method": method,
                "per_split": list(report.per_split),
                "mean": report.mean,
                "sd": report.sd,
                "n_splits": report.n_splits,
                "n_undefined": report.n_undefined,
                "provenance": _provenance("evaluate", args),
            },
        )
        return EXIT_OK
    raise _ConfigError(f"--metric: unknown metric {args.metric!r}")


def _parse_scale(spec: str) -> dict:
    """key=value overrides, comma-separated; ':'-separated values are lists."""
    out: dict = {}
    if not spec:
        return out
    for item in spec.split(","):
        if "=" not in item:
            raise _ConfigError(f"--scale: expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if ":" in value:
            parts = value.split(":")
            try:
                out[key] = tuple(int(v) for v in parts)
            except ValueError:
                out[key] = tuple(parts)
        else:
            try:
                out[key] = int(value)
            except ValueError:
                out[key] = value
    return out


def _cmd_reproduce(args) -> int:
    overrides = _parse_scale(args.scale or "")
    out = _out_dir(args)
    common = {"out_dir": out, "seed": args.seed, "jobs": args.jobs}
    common.update(overrides)
    if args.experiment == "figure1":
        run_figure1(**common)
    elif args.experiment == "figure2":
        run_figure2(**common)
    elif args.experiment == "table1-sim":
        run_table1_sim(**common)
    else:
        raise _ConfigError(f"unknown experiment {args.experiment!r}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, seed_required: bool) -> None:
    parser.add_argument("--seed", type=int, required=seed_required,
                        default=None if seed_required else 0,
                        help="master seed (64-bit)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="concurrent worker processes")
    parser.add_argument("--out", type=str, required=True, help="output directory")


def _add_estimation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=str, required=True, help="data CSV (n x p)")
    parser.add_argument("--method", type=str, required=True,
                        choices=("si", "mb", "thr", "glasso"))
    parser.add_argument("--rule", type=str, default="and", choices=("and", "or"))
    parser.add_argument("--link", type=str, default="power:3",
                        help="power:k, identity, or table:<file>")
    parser.add_argument("--coords", type=str, default=None,
                        help="coordinate CSV (p x 3)")
    parser.add_argument("--dist", type=str, default=None,
                        help="distance CSV (p x p)")
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--grid-size", type=int, default=100, dest="grid_size")
    parser.add_argument("--grid-floor", type=float, default=None, dest="grid_floor",
                        help="grid floor as a fraction of the anchor "
                             "(default 0.01; ROC sweeps default 1e-6)")
    parser.add_argument("--scale-all", type=float, default=None, dest="scale_all",
                        help="skip tuning; use this scale at every node")
    parser.add_argument("--threshold", type=float, default=None,
                        help="thr: fixed partial-correlation threshold")
    parser.add_argument("--match-edges", type=int, default=None, dest="match_edges",
                        help="thr: choose the threshold matching this edge count")
    parser.add_argument("--lambda", type=float, default=None, dest="lam",
                        help="glasso: fixed penalty instead of BIC")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signet",
        description="Graph estimation with side information, plus the "
                    "simulation and evaluation pipeline around it.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic instance")
    p_sim.add_argument("--generator", required=True,
                       choices=("pa-condnum", "distance-bernoulli"))
    p_sim.add_argument("--p", type=int, required=True, help="number of nodes")
    p_sim.add_argument("--n", type=int, required=True, help="number of samples")
    p_sim.add_argument("--cond-target", type=float, default=100.0,
                       dest="cond_target")
    p_sim.add_argument("--box-side", type=float, default=160.0, dest="box_side")
    _add_common(p_sim, seed_required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate a graph from data")
    _add_estimation_flags(p_est)
    _add_common(p_est, seed_required=False)
    p_est.set_defaults(func=_cmd_estimate)

    p_tune = sub.add_parser("tune", help="calibrate without estimating")
    _add_estimation_flags(p_tune)
    _add_common(p_tune, seed_required=False)
    p_tune.set_defaults(func=_cmd_tune)

    p_eval = sub.add_parser("evaluate", help="score estimates or stability")
    p_eval.add_argument("--metric", required=True,
                        choices=("hamming", "roc", "reproducibility"))
    p_eval.add_argument("--edges-a", type=str, default=None, dest="edges_a")
    p_eval.add_argument("--edges-b", type=str, default=None, dest="edges_b")
    p_eval.add_argument("--dim", type=int, default=None)
    p_eval.add_argument("--instance", type=str, default=None,
                        help="instance directory from simulate")
    p_eval.add_argument("--method", type=str, default="si",
                        choices=("si", "mb", "thr", "glasso"))
    p_eval.add_argument("--rule", type=str, default="and", choices=("and", "or"))
    p_eval.add_argument("--splits", type=int, default=20)
    p_eval.add_argument("--folds", type=int, default=10)
    p_eval.add_argument("--grid-size", type=int, default=100, dest="grid_size")
    p_eval.add_argument("--grid-floor", type=float, default=None, dest="grid_floor",
                        help="grid floor as a fraction of the anchor "
                             "(default 0.01; ROC sweeps default 1e-6)")
    _add_common(p_eval, seed_required=True)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_rep = sub.add_parser("reproduce", help="run a full study pipeline")
    p_rep.add_argument("experiment", choices=("figure1", "figure2", "table1-sim"))
    p_rep.add_argument("--scale", type=str, default="",
                       help="overrides, e.g. reps=2,methods=si:mb")
    _add_common(p_rep, seed_required=False)
    p_rep.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RequiresMoreSamples as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except DidNotConverge as exc:
        node = f" (node {exc.node})" if exc.node is not None else ""
        print(f"error: did not converge{node}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SignetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
