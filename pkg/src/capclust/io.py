"""CSV ingestion and the structured solution document.

Points CSV columns: id, x, y, w, gamma, a, q; gamma/a/q may be left blank
and default to 0 / w / 1.  The solution document is a line-oriented text
format with a versioned schema tag; floats are written with repr so a
read-back reproduces every numeric field exactly, and runs with the same
seed produce byte-identical documents (timing is only included on request
for that reason).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import metrics
from .errors import NegativeValue, ParseError, RaggedMatrix
from .model import NOISE_LABEL, Point, Problem, Solution

SCHEMA = "capclust-solution 1"


def _parse_float(raw: str, line: int, column: int, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"{what}: not a number: {raw!r}", line, column) from None


def load_points(path) -> list[Point]:
    points: list[Point] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty points file", 1) from None
        cols = [c.strip().lower() for c in header]
        if cols[:4] != ["id", "x", "y", "w"]:
            raise ParseError(f"points header must start with id,x,y,w (got {','.join(cols)})", 1)
        optional = cols[4:]
        if optional != ["gamma", "a", "q"][: len(optional)]:
            raise ParseError("optional point columns must be gamma,a,q in order", 1)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 4:
                raise ParseError(f"expected at least 4 columns, got {len(row)}", line_no)
            try:
                pid = int(row[0])
            except ValueError:
                raise ParseError(f"id must be an integer: {row[0]!r}", line_no, 1) from None
            x = _parse_float(row[1], line_no, 2, "x")
            y = _parse_float(row[2], line_no, 3, "y")
            w = _parse_float(row[3], line_no, 4, "w")
            if w < 0:
                raise NegativeValue(f"weight w={w}", line_no, 4)

            def cell(idx: int) -> str | None:
                if idx < len(row) and row[idx].strip():
                    return row[idx].strip()
                return None

            gamma_raw, a_raw, q_raw = cell(4), cell(5), cell(6)
            gamma = _parse_float(gamma_raw, line_no, 5, "gamma") if gamma_raw else 0.0
            if gamma < 0:
                raise NegativeValue(f"gamma={gamma}", line_no, 5)
            a = _parse_float(a_raw, line_no, 6, "a") if a_raw else w
            if a < 0:
                raise NegativeValue(f"a={a}", line_no, 6)
            if q_raw:
                try:
                    q = int(q_raw)
                except ValueError:
                    raise ParseError(f"q must be an integer: {q_raw!r}", line_no, 7) from None
            else:
                q = 1
            if q < 1:
                raise NegativeValue(f"q={q}", line_no, 7)
            pseudo = w == 0 and gamma > 0 and a == 0
            points.append(Point(id=pid, coords=(x, y), w=w, gamma=gamma, a=a, q=q, pseudo=pseudo))
    return points


def write_points(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "w", "gamma", "a", "q"])
        for p in points:
            writer.writerow([p.id, repr(p.coords[0]), repr(p.coords[1]), repr(p.w), repr(p.gamma), repr(p.a), p.q])


def load_candidates(path) -> np.ndarray:
    sites: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip().lower() for c in next(reader)]
        except StopIteration:
            raise ParseError("empty candidates file", 1) from None
        try:
            ix, iy = header.index("x"), header.index("y")
        except ValueError:
            raise ParseError("candidates header needs x and y columns", 1) from None
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            sites.append(
                (_parse_float(row[ix], line_no, ix + 1, "x"), _parse_float(row[iy], line_no, iy + 1, "y"))
            )
    if not sites:
        raise ParseError("no candidate sites in file", 2)
    return np.asarray(sites, dtype=float)


def load_matrix(path) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for line_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            values = [_parse_float(c, line_no, i + 1, "matrix entry") for i, c in enumerate(row)]
            for i, v in enumerate(values):
                if v < 0:
                    raise NegativeValue(f"matrix entry {v}", line_no, i + 1)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise RaggedMatrix(f"row has {len(values)} entries, expected {width}", line_no)
            rows.append(values)
    if not rows:
        raise ParseError("empty matrix file", 1)
    return np.asarray(rows, dtype=float)


def load_fixed(path):
    """Fixed-center file: either x,y coordinate rows or a single site column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip().lower() for c in next(reader)]
        except StopIteration:
            raise ParseError("empty fixed-centers file", 1) from None
        if "site" in header:
            col = header.index("site")
            out: list[int] = []
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    out.append(int(row[col]))
                except ValueError:
                    raise ParseError(f"site must be an integer: {row[col]!r}", line_no, col + 1) from None
            return out
        try:
            ix, iy = header.index("x"), header.index("y")
        except ValueError:
            raise ParseError("fixed-centers header needs x,y or site", 1) from None
        coords: list[tuple[float, float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            coords.append(
                (_parse_float(row[ix], line_no, ix + 1, "x"), _parse_float(row[iy], line_no, iy + 1, "y"))
            )
        return coords


def write_labels(path, ids, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"])
        for pid, lab in zip(ids, labels):
            writer.writerow([pid, int(lab)])


def load_labels(path) -> dict[int, int]:
    out: dict[int, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [c.strip().lower() for c in next(reader)]
        if header[:2] != ["id", "label"]:
            raise ParseError("labels header must be id,label", 1)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                out[int(row[0])] = int(row[1])
            except ValueError:
                raise ParseError("labels must be integers", line_no) from None
    return out


@dataclass
class SolutionDocument:
    """Parsed form of a written solution, sufficient for evaluation."""

    schema: str
    objective: dict[str, float]
    meta: dict[str, str]
    centers: list[dict]
    point_weights: dict[int, float]
    memberships: list[tuple[int, int, float, float]]  # point id, center, y, distance
    outliers: list[tuple[int, float]]
    loads: dict[int, float]
    coverage_flags: list[int]
    diagnostics: dict[str, str]
    timing: float | None = None

    def labels(self) -> dict[int, int]:
        """Hardened label per point id; ties prefer centers over the outlier."""
        best: dict[int, tuple[float, int]] = {}
        for pid in self.point_weights:
            best[pid] = (0.0, NOISE_LABEL)
        for pid, j, y, _d in self.memberships:
            if y > best[pid][0] or (y == best[pid][0] and best[pid][1] == NOISE_LABEL):
                best[pid] = (y, j)
        for pid, y in self.outliers:
            if y > best[pid][0]:
                best[pid] = (y, NOISE_LABEL)
        return {pid: lab for pid, (_y, lab) in best.items()}

    def point_distances(self) -> dict[int, float]:
        """Membership-weighted distance per point; pure outliers excluded."""
        num: dict[int, float] = {}
        den: dict[int, float] = {}
        for pid, _j, y, d in self.memberships:
            num[pid] = num.get(pid, 0.0) + y * d
            den[pid] = den.get(pid, 0.0) + y
        return {pid: num[pid] / den[pid] for pid in num if den[pid] > 1e-12}


def write_solution(problem: Problem, solution: Solution, path, emit_timing: bool = False) -> None:
    """Serialize a solution to the structured text document."""
    spec = problem.centers
    discrete = spec.placement == "discrete"
    obj = solution.objective
    D = metrics.distances_to_centers(problem, solution.centers)
    y = solution.assignment.y
    lines: list[str] = [SCHEMA]
    lines.append(
        "objective distance {} outlier {} opening {} release {} total {}".format(
            repr(obj.distance_term), repr(obj.outlier_term), repr(obj.opening_term),
            repr(obj.release_term), repr(obj.total),
        )
    )
    lines.append(
        f"problem n {problem.n} k {problem.k} metric {problem.metric.kind} "
        f"membership {problem.membership} placement {spec.placement}"
    )
    if problem.capacity is not None:
        lines.append(f"capacity {repr(float(problem.capacity[0]))} {repr(float(problem.capacity[1]))}")
    if problem.outlier_penalty is not None:
        lines.append(f"outlier_lambda {repr(float(problem.outlier_penalty))}")
    lines.append(f"opening_lambda {repr(float(problem.opening_penalty))}")
    if spec.n_fixed:
        lines.append(f"release_lambda {repr(float(spec.release_penalty))}")

    lines.append(f"centers {problem.k}")
    for j in range(problem.k):
        if j < spec.n_fixed:
            status = "released" if j in solution.released else "fixed"
        else:
            status = "free"
        if discrete:
            entry = f"c {j} site {int(solution.centers[j])} {status}"
            if status == "released":
                entry += f" orig {int(spec.fixed[j])}"
        else:
            cx, cy = solution.centers[j]
            entry = f"c {j} xy {repr(float(cx))} {repr(float(cy))} {status}"
            if status == "released":
                fx, fy = spec.fixed[j]
                entry += f" orig {repr(float(fx))} {repr(float(fy))}"
        lines.append(entry)

    order = sorted(range(problem.n), key=lambda i: problem.points[i].id)
    lines.append(f"points {problem.n}")
    for i in order:
        lines.append(f"p {problem.points[i].id} {repr(float(problem.points[i].w))}")

    entries = []
    for i in order:
        for j in range(problem.k):
            if y[i, j] > 1e-12:
                entries.append((problem.points[i].id, j, y[i, j], D[i, j]))
    lines.append(f"memberships {len(entries)}")
    for pid, j, val, d in entries:
        lines.append(f"m {pid} {j} {repr(float(val))} {repr(float(d))}")

    out_entries = []
    if solution.assignment.has_outlier:
        for i in order:
            if y[i, -1] > 1e-12:
                out_entries.append((problem.points[i].id, y[i, -1]))
    lines.append(f"outliers {len(out_entries)}")
    for pid, val in out_entries:
        lines.append(f"o {pid} {repr(float(val))}")

    loads = solution.assignment.loads(problem.capacity_coeffs)
    lines.append(f"loads {problem.k}")
    for j in range(problem.k):
        lines.append(f"l {j} {repr(float(loads[j]))}")

    flags = solution.diagnostics.get("coverage_slots_on_outlier", [])
    lines.append(f"coverage_flags {len(flags)}")
    for pid in flags:
        lines.append(f"f {pid}")

    diag = solution.diagnostics
    gap = diag.get("optimality_gap")
    lines.append(
        "diagnostics iterations {} restarts {} empty_reseeds {} weiszfeld_unconverged {} gap {}".format(
            diag.get("iterations", 0), diag.get("restarts", 1), diag.get("empty_reseeds", 0),
            diag.get("weiszfeld_unconverged", 0), repr(float(gap)) if gap is not None else "none",
        )
    )
    if emit_timing and "wall_time_s" in diag:
        lines.append(f"timing wall_s {repr(float(diag['wall_time_s']))}")
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_solution(path) -> SolutionDocument:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != SCHEMA:
        raise ParseError(f"unknown solution schema: {lines[0] if lines else ''!r}", 1)
    doc = SolutionDocument(
        schema=lines[0], objective={}, meta={}, centers=[], point_weights={},
        memberships=[], outliers=[], loads={}, coverage_flags=[], diagnostics={},
    )
    idx = 1
    n_lines = len(lines)

    def fail(msg: str, at: int):
        raise ParseError(msg, at + 1)

    while idx < n_lines:
        parts = lines[idx].split()
        if not parts:
            idx += 1
            continue
        tag = parts[0]
        if tag == "end":
            break
        if tag == "objective":
            doc.objective = {parts[i]: float(parts[i + 1]) for i in range(1, len(parts), 2)}
        elif tag == "problem":
            doc.meta.update({parts[i]: parts[i + 1] for i in range(1, len(parts), 2)})
        elif tag in ("capacity",):
            doc.meta["capacity"] = f"{parts[1]} {parts[2]}"
        elif tag in ("outlier_lambda", "opening_lambda", "release_lambda"):
            doc.meta[tag] = parts[1]
        elif tag == "centers":
            count = int(parts[1])
            for row in range(count):
                sub = lines[idx + 1 + row].split()
                if sub[0] != "c":
                    fail("malformed centers block", idx + 1 + row)
                entry: dict = {"index": int(sub[1]), "kind": sub[2], "status": None}
                if sub[2] == "xy":
                    entry["xy"] = (float(sub[3]), float(sub[4]))
                    entry["status"] = sub[5]
                    if len(sub) > 6:
                        entry["orig"] = (float(sub[7]), float(sub[8]))
                else:
                    entry["site"] = int(sub[3])
                    entry["status"] = sub[4]
                    if len(sub) > 5:
                        entry["orig"] = int(sub[6])
                doc.centers.append(entry)
            idx += count
        elif tag == "points":
            count = int(parts[1])
            for row in range(count):
                sub = lines[idx + 1 + row].split()
                doc.point_weights[int(sub[1])] = float(sub[2])
            idx += count
        elif tag == "memberships":
            count = int(parts[1])
            for row in range(count):
                sub = lines[idx + 1 + row].split()
                doc.memberships.append((int(sub[1]), int(sub[2]), float(sub[3]), float(sub[4])))
            idx += count
        elif tag == "outliers":
            count = int(parts[1])
            for row in range(count):
                sub = lines[idx + 1 + row].split()
                doc.outliers.append((int(sub[1]), float(sub[2])))
            idx += count
        elif tag == "loads":
            count = int(parts[1])
            for row in range(count):
                sub = lines[idx + 1 + row].split()
                doc.loads[int(sub[1])] = float(sub[2])
            idx += count
        elif tag == "coverage_flags":
            count = int(parts[1])
            for row in range(count):
                doc.coverage_flags.append(int(lines[idx + 1 + row].split()[1]))
            idx += count
        elif tag == "diagnostics":
            doc.diagnostics = {parts[i]: parts[i + 1] for i in range(1, len(parts), 2)}
        elif tag == "timing":
            doc.timing = float(parts[2])
        else:
            fail(f"unknown tag {tag!r}", idx)
        idx += 1
    else:
        raise ParseError("missing end tag", n_lines)
    return doc
