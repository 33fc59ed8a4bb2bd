"""Block coordinate descent with k-means++ multi-restart.

Each restart seeds centers (fixed centers first, the rest by weighted
k-means++), then alternates the exact allocation step with the location
step (including release decisions for fixed centers) until the objective
stalls or the centers stop moving.  Restarts draw from counter-spawned RNG
streams so the set of restarts is independent of execution order, and the
best restart by total objective wins (ties to the lowest restart index).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import metrics
from .allocation import allocate
from .errors import AllRestartsInfeasible, Infeasible, NoIncumbentWithinBudget, NotEnoughDistinctSites
from .location import decide_release, update_center_continuous, update_center_discrete
from .model import Assignment, Problem, Solution, evaluate_parts, validate_problem


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the multi-restart descent.

    ``restarts`` of 50-100 give publication-grade robustness; the default
    favors interactive runs.  ``time_budget`` is seconds per hard
    allocation call, not for the whole solve.
    """

    restarts: int = 10
    rng_seed: int = 0
    max_iterations: int = 200
    convergence_tol: float = 1e-9
    time_budget: float | None = None
    keep_traces: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


def kmeanspp_init(problem: Problem, rng: np.random.Generator):
    """Seed k centers: fixed ones first, the rest by w'-weighted k-means++.

    Free seeds are drawn from the data with probability proportional to
    w'_i * D(x_i)^2 where D is the configured metric's distance to the
    nearest center chosen so far (plain w' for the very first draw).  In
    discrete placement each draw snaps to its nearest candidate site and
    occupied sites are redrawn.
    """
    spec = problem.centers
    k, n = spec.k, problem.n
    w = problem.effective_weights
    discrete = spec.placement == "discrete"

    def draw(masses: np.ndarray, eligible: np.ndarray) -> int | None:
        masses = np.where(eligible, masses, 0.0)
        total = masses.sum()
        if total <= 0:
            if not eligible.any():
                return None
            masses = eligible.astype(float)
            total = masses.sum()
        return int(rng.choice(n, p=masses / total))

    if discrete:
        cand = metrics.candidate_distances(problem)
        n_sites = cand.shape[1]
        snap = np.argmin(cand, axis=1)
        chosen: list[int] = [int(f) for f in spec.fixed]
        best = np.min(cand[:, chosen], axis=1) if chosen else None
        while len(chosen) < k:
            used = set(chosen)
            masses = w * best**2 if best is not None else w
            eligible = np.array([snap[i] not in used for i in range(n)])
            i = draw(masses, eligible)
            if i is None:
                unused = [h for h in range(n_sites) if h not in used]
                if not unused:
                    raise NotEnoughDistinctSites(f"cannot place {k} centers on {n_sites} sites")
                site = unused[0]
            else:
                site = int(snap[i])
            chosen.append(site)
            d_new = cand[:, site]
            best = d_new if best is None else np.minimum(best, d_new)
        return np.asarray(chosen, dtype=int)

    coords = problem.coords
    kind = problem.metric.kind
    chosen_xy: list[np.ndarray] = [np.asarray(f, dtype=float) for f in spec.fixed]
    best = None
    if chosen_xy:
        best = metrics.geometric_distances(kind, coords, np.vstack(chosen_xy)).min(axis=1)
    while len(chosen_xy) < k:
        masses = w * best**2 if best is not None else w
        i = draw(masses, np.ones(n, dtype=bool))
        pick = coords[i].copy()
        chosen_xy.append(pick)
        d_new = metrics.geometric_distances(kind, coords, pick[None, :])[:, 0]
        best = d_new if best is None else np.minimum(best, d_new)
    return np.vstack(chosen_xy)


def _reseed_position(problem: Problem, costs: np.ndarray, y_centers: np.ndarray, snap: np.ndarray | None):
    """Spot for an emptied center: the point with the largest current cost."""
    contrib = (costs * y_centers).sum(axis=1)
    i = int(np.argmax(contrib))
    if problem.centers.placement == "discrete":
        return int(snap[i])
    return problem.coords[i].copy()


def descend(problem: Problem, initial_centers, config: SolverConfig) -> Solution:
    """Alternate exact allocation and location steps from the given centers."""
    problem = validate_problem(problem)
    spec = problem.centers
    k, m = spec.k, spec.n_fixed
    discrete = spec.placement == "discrete"
    w = problem.effective_weights

    centers = np.array(initial_centers, dtype=int if discrete else float).copy()
    released: set[int] = set()
    cand = metrics.candidate_distances(problem) if discrete else None
    snap = np.argmin(cand, axis=1) if discrete else None

    diag: dict = {
        "iterations": 0,
        "empty_reseeds": 0,
        "weiszfeld_unconverged": 0,
        "objective_trace": [],
        "center_trace": [],
        "bnb_nodes": 0,
    }

    assignment: Assignment | None = None
    prev_total = math.inf
    stop = None
    for iteration in range(1, config.max_iterations + 1):
        diag["iterations"] = iteration
        assignment = allocate(problem, centers, config.time_budget)
        if assignment.diagnostics:
            diag["bnb_nodes"] += assignment.diagnostics.get("nodes", 0)
            if "optimality_gap" in assignment.diagnostics:
                diag["optimality_gap"] = max(
                    diag.get("optimality_gap", 0.0), assignment.diagnostics["optimality_gap"]
                )
            if "fastpath" in assignment.diagnostics:
                diag["fastpath"] = assignment.diagnostics["fastpath"]
        after_alloc = evaluate_parts(problem, centers, assignment, released)
        if config.keep_traces:
            diag["objective_trace"].append(after_alloc.total)

        costs = metrics.pairwise_costs(problem, centers)
        new_centers = centers.copy()
        new_released = set(released)
        for j in range(k):
            masses = w * assignment.center_block[:, j]
            nz = masses > 0
            if j < m:
                rows = cand[nz] if discrete else problem.coords[nz]
                decision = decide_release(problem, spec.fixed[j], rows, masses[nz], j in released)
                if decision.released:
                    new_released.add(j)
                else:
                    new_released.discard(j)
                new_centers[j] = decision.location
            elif not nz.any():
                new_centers[j] = _reseed_position(problem, costs, assignment.center_block, snap)
                diag["empty_reseeds"] += 1
            elif discrete:
                new_centers[j] = update_center_discrete(cand[nz], masses[nz])
            else:
                update = update_center_continuous(problem.metric.kind, problem.coords[nz], masses[nz])
                if not update.converged:
                    diag["weiszfeld_unconverged"] += 1
                # Keep the previous location on the rare non-improving update
                # so the outer descent stays monotone.
                old_cost = float(
                    masses[nz]
                    @ metrics.geometric_distances(problem.metric.kind, problem.coords[nz], centers[j][None, :])[:, 0]
                )
                new_cost = float(
                    masses[nz]
                    @ metrics.geometric_distances(problem.metric.kind, problem.coords[nz], update.coords[None, :])[:, 0]
                )
                new_centers[j] = update.coords if new_cost <= old_cost else centers[j]

        after_loc = evaluate_parts(problem, new_centers, assignment, new_released)
        if config.keep_traces:
            diag["objective_trace"].append(after_loc.total)
            diag["center_trace"].append(new_centers.copy())

        if discrete:
            unchanged = bool(np.array_equal(new_centers, centers)) and new_released == released
        else:
            move = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
            unchanged = move < 1e-9 * problem.diameter and new_released == released
        centers, released = new_centers, new_released

        total = after_loc.total
        if unchanged:
            stop = "centers_unchanged"
            break
        if prev_total - total < config.convergence_tol * max(1.0, abs(prev_total)):
            stop = "objective_stalled"
            break
        prev_total = total
    diag["stop"] = stop or "iteration_cap"

    if stop != "centers_unchanged":
        assignment = allocate(problem, centers, config.time_budget)
    objective = evaluate_parts(problem, centers, assignment, released)
    if config.keep_traces and stop != "centers_unchanged":
        diag["objective_trace"].append(objective.total)

    if problem.has_outlier_column:
        flagged = np.flatnonzero((problem.coverages > 1) & (assignment.outlier_column > 1e-12))
        if flagged.size:
            diag["coverage_slots_on_outlier"] = [problem.points[i].id for i in flagged]
    return Solution(
        centers=centers,
        assignment=assignment,
        released=frozenset(released),
        objective=objective,
        diagnostics=diag,
    )


def solve(problem: Problem, config: SolverConfig = SolverConfig()) -> Solution:
    """Best of ``config.restarts`` independent k-means++ descents."""
    problem = validate_problem(problem)
    t0 = time.monotonic()
    streams = np.random.SeedSequence(config.rng_seed).spawn(config.restarts)
    best: Solution | None = None
    failures: list[str] = []
    objectives: list[float] = []
    for r, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        try:
            centers0 = kmeanspp_init(problem, rng)
            candidate = descend(problem, centers0, config)
        except (Infeasible, NoIncumbentWithinBudget) as exc:
            failures.append(f"restart {r}: {exc}")
            objectives.append(math.nan)
            continue
        objectives.append(candidate.objective.total)
        if best is None or candidate.objective.total < best.objective.total:
            best = candidate
            best.diagnostics["best_restart"] = r
    if best is None:
        raise AllRestartsInfeasible("; ".join(failures))
    best.diagnostics["restarts"] = config.restarts
    best.diagnostics["restart_objectives"] = objectives
    best.diagnostics["restart_failures"] = failures
    best.diagnostics["wall_time_s"] = time.monotonic() - t0
    return best
