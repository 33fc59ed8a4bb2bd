"""Command-line interface: solve, sweep, generate, evaluate.

Exit codes: 0 success, 1 usage/validation error, 2 infeasible,
3 parse error, 4 time budget exhausted (best incumbent written).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io, metrics, plotting
from .datagen import GenSpec, generate_dataset
from .errors import AllRestartsInfeasible, CapclustError, Infeasible, ParseError, ValidationError
from .evaluation import PER_DEMAND, PER_POINT, adjusted_rand_index
from .model import CenterSpec, Problem, validate_problem
from .selection import sweep_k
from .solver import SolverConfig, solve


def _parse_metric(text: str, matrix: np.ndarray | None) -> metrics.MetricSpec:
    if text.startswith("threshold:"):
        return metrics.threshold(float(text.split(":", 1)[1]))
    if text == "matrix":
        if matrix is None:
            raise ValidationError("--metric matrix needs --matrix FILE")
        return metrics.matrix_metric(matrix)
    if text in (metrics.SQEUCLIDEAN, metrics.EUCLIDEAN, metrics.MANHATTAN):
        return metrics.MetricSpec(text)
    raise ValidationError(f"unknown metric {text!r}")


def _parse_capacity(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(",")
        return float(lo), float(hi)
    except ValueError:
        raise ValidationError(f"--capacity expects L,U (got {text!r})") from None


def _add_problem_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--points", required=True)
    sub.add_argument("--candidates")
    sub.add_argument("--matrix")
    sub.add_argument("--metric", default=None)
    sub.add_argument("--capacity", default=None)
    sub.add_argument("--membership", choices=["hard", "fractional"], default=None)
    sub.add_argument("--outlier-lambda", type=float, default=None)
    sub.add_argument("--opening-lambda", type=float, default=None)
    sub.add_argument("--fixed", default=None)
    sub.add_argument("--release-lambda", type=float, default=None)
    sub.add_argument("--restarts", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--time-budget", type=float, default=None)
    sub.add_argument("--config", default=None, help="JSON file with defaults for the flags above")
    sub.add_argument("--emit-timing", action="store_true", help="include wall time in the solution document (breaks byte-for-byte reproducibility)")
    sub.add_argument("--out", required=True)


def _merged(args: argparse.Namespace, key: str, default):
    """Flags override config-file values override defaults."""
    value = getattr(args, key.replace("-", "_"))
    if value is not None:
        return value
    if getattr(args, "_config", None) and key in args._config:
        return args._config[key]
    return default


def _build_problem(args: argparse.Namespace, k: int) -> Problem:
    points = io.load_points(args.points)
    matrix = io.load_matrix(args.matrix) if args.matrix else None
    candidates = io.load_candidates(args.candidates) if args.candidates else None
    metric = _parse_metric(_merged(args, "metric", "sqeuclidean"), matrix)
    placement = "discrete" if (candidates is not None or matrix is not None) else "continuous"
    fixed = io.load_fixed(args.fixed) if args.fixed else []
    release = _merged(args, "release-lambda", math.inf)
    capacity = _merged(args, "capacity", None)
    if isinstance(capacity, str):
        capacity = _parse_capacity(capacity)
    elif isinstance(capacity, list):
        capacity = (float(capacity[0]), float(capacity[1]))
    problem = Problem(
        points=tuple(points),
        metric=metric,
        centers=CenterSpec(
            k=k,
            placement=placement,
            candidates=candidates,
            fixed=tuple(fixed),
            release_penalty=float(release),
        ),
        membership=_merged(args, "membership", "hard"),
        capacity=capacity,
        outlier_penalty=_merged(args, "outlier-lambda", None),
        opening_penalty=float(_merged(args, "opening-lambda", 0.0)),
    )
    return validate_problem(problem)


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        restarts=int(_merged(args, "restarts", 10)),
        rng_seed=int(_merged(args, "seed", 0)),
        time_budget=_merged(args, "time-budget", None),
    )


def _cmd_solve(args: argparse.Namespace) -> int:
    problem = _build_problem(args, k=args.k)
    config = _solver_config(args)
    solution = solve(problem, config)
    os.makedirs(args.out, exist_ok=True)
    doc_path = os.path.join(args.out, "solution.txt")
    io.write_solution(problem, solution, doc_path, emit_timing=args.emit_timing)
    if plotting.can_plot(problem):
        plotting.render_plot(problem, solution, os.path.join(args.out, "plot.svg"))
    else:
        print("plot skipped: instance lacks coordinate geometry", file=sys.stderr)
    obj = solution.objective
    print(f"total {obj.total:.6g} (distance {obj.distance_term:.6g}, outlier {obj.outlier_term:.6g}, "
          f"opening {obj.opening_term:.6g}, release {obj.release_term:.6g})")
    print(f"released centers: {sorted(solution.released) or 'none'}")
    print(f"wall time: {solution.diagnostics.get('wall_time_s', 0.0):.2f}s; wrote {doc_path}")
    if solution.diagnostics.get("optimality_gap"):
        print(f"time budget exhausted; incumbent gap {solution.diagnostics['optimality_gap']:.3g}", file=sys.stderr)
        return 4
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        a, b = args.k_range.split("..")
        k_values = range(int(a), int(b) + 1)
    except ValueError:
        raise ValidationError(f"--k-range expects A..B (got {args.k_range!r})") from None
    lambdas = [float(x) for x in args.lambda_grid.split(",")]
    problem = _build_problem(args, k=int(str(args.k_range).split("..")[0]))
    config = _solver_config(args)
    report = sweep_k(problem, k_values, lambdas, config)
    os.makedirs(args.out, exist_ok=True)
    lines = ["k base " + " ".join(f"lam={lam:g}" for lam in lambdas)]
    for k in report.k_values:
        if k in report.base_objectives:
            row = [str(k), repr(report.base_objectives[k])]
            row += [repr(report.penalized[lam][k]) for lam in lambdas]
            lines.append(" ".join(row))
        else:
            lines.append(f"{k} failed {report.errors.get(k, '')}")
    lines.append("argmin " + " ".join(f"{lam:g}->{report.argmin_k.get(lam)}" for lam in lambdas))
    lines.append(f"consensus {report.consensus_k}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(args.out, "sweep.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    if report.consensus_k is not None and report.consensus_k in report.solutions:
        best = report.solutions[report.consensus_k]
        trial_problem = validate_problem(
            Problem(
                points=problem.points, metric=problem.metric,
                centers=CenterSpec(
                    k=report.consensus_k, placement=problem.centers.placement,
                    candidates=problem.centers.candidates, fixed=problem.centers.fixed,
                    release_penalty=problem.centers.release_penalty,
                ),
                membership=problem.membership, capacity=problem.capacity,
                outlier_penalty=problem.outlier_penalty, opening_penalty=0.0,
            )
        )
        io.write_solution(trial_problem, best, os.path.join(args.out, f"solution_k{report.consensus_k}.txt"),
                          emit_timing=args.emit_timing)
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    with open(args.spec) as fh:
        raw = json.load(fh)
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    for key in ("cluster_sizes", "shape_range", "scale_range", "weight_range", "edge_weighted"):
        if key in raw and raw[key] is not None:
            raw[key] = tuple(raw[key])
    spec = GenSpec(**raw)
    points, labels = generate_dataset(spec)
    io.write_points(points, args.out)
    stem, _ext = os.path.splitext(args.out)
    labels_path = stem + "_labels.csv"
    io.write_labels(labels_path, [p.id for p in points], labels)
    print(f"wrote {len(points)} points to {args.out} and labels to {labels_path}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    doc = io.read_solution(args.solution)
    truth = io.load_labels(args.truth)
    labels = doc.labels()
    common = sorted(set(labels) & set(truth))
    if len(common) != len(labels) or len(common) != len(truth):
        print(f"warning: truth and solution share {len(common)} of "
              f"{len(labels)}/{len(truth)} ids", file=sys.stderr)
    ari = adjusted_rand_index([labels[i] for i in common], [truth[i] for i in common])
    print(f"ARI {ari:.6f}")
    dist = doc.point_distances()
    if dist:
        values = np.array([dist[pid] for pid in sorted(dist)])
        weights = np.array([doc.point_weights[pid] for pid in sorted(dist)])
        print(f"{PER_POINT}: mean {values.mean():.6g} median {np.quantile(values, 0.5):.6g} "
              f"q95 {np.quantile(values, 0.95):.6g}")
        order = np.argsort(values, kind="stable")
        v, w = values[order], weights[order]
        cum = np.cumsum(w)
        t = (cum - 0.5 * w) / cum[-1]
        print(f"{PER_DEMAND}: mean {(v * w).sum() / w.sum():.6g} "
              f"median {np.interp(0.5, t, v):.6g} q95 {np.interp(0.95, t, v):.6g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="capclust", description="Capacitated, constrained spatial clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    p_solve.add_argument("--k", type=int, required=True)
    _add_problem_flags(p_solve)

    p_sweep = sub.add_parser("sweep", help="solve over a range of k and overlay opening costs")
    p_sweep.add_argument("--k-range", required=True)
    p_sweep.add_argument("--lambda-grid", required=True)
    _add_problem_flags(p_sweep)

    p_gen = sub.add_parser("generate", help="generate a synthetic benchmark dataset")
    p_gen.add_argument("--spec", required=True)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="score a solution document against ground truth")
    p_eval.add_argument("--solution", required=True)
    p_eval.add_argument("--truth", required=True)

    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            args._config = json.load(fh)
    else:
        args._config = {}

    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "generate":
            return _cmd_generate(args)
        return _cmd_evaluate(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except (Infeasible, AllRestartsInfeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except CapclustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
