"""Primal network simplex for min-cost flow with arc bounds.

Arcs carry [lower, upper] bounds and a per-unit cost.  Lower bounds are
removed up front by the standard transformation (force the lower flow,
shift node balances, add a constant cost), so the simplex itself only sees
lower bounds of zero.  Infeasibility is detected without a numeric big-M:
artificial root arcs cost one unit of a separate, lexicographically
dominant component, so real reduced costs are never polluted by a large
constant.

The implementation assumes networks without directed cycles of infinite
capacity (true for the bipartite assignment networks built here):
uncapacitated arcs are capped at the total supply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_AT_LOWER = 0
_IN_TREE = 1
_AT_UPPER = 2


@dataclass
class FlowResult:
    feasible: bool
    flows: np.ndarray
    cost: float
    potentials_m: np.ndarray
    potentials: np.ndarray
    basic: np.ndarray
    unmet: list[tuple[int, float]]


class FlowNetwork:
    """Node balances (positive = supply) plus bounded, costed arcs."""

    def __init__(self, n_nodes: int):
        self.n_nodes = n_nodes
        self.balances = np.zeros(n_nodes)
        self.tails: list[int] = []
        self.heads: list[int] = []
        self.lowers: list[float] = []
        self.uppers: list[float] = []
        self.costs: list[float] = []

    def add_supply(self, node: int, amount: float) -> None:
        self.balances[node] += amount

    def add_arc(self, tail: int, head: int, lower: float, upper: float, cost: float) -> int:
        if lower > upper:
            raise ValueError(f"arc ({tail}, {head}): lower bound {lower} exceeds upper {upper}")
        self.tails.append(tail)
        self.heads.append(head)
        self.lowers.append(lower)
        self.uppers.append(upper)
        self.costs.append(cost)
        return len(self.tails) - 1

    @property
    def n_arcs(self) -> int:
        return len(self.tails)

    def solve(self) -> FlowResult:
        n, m = self.n_nodes, self.n_arcs
        tails = np.asarray(self.tails, dtype=int)
        heads = np.asarray(self.heads, dtype=int)
        lowers = np.asarray(self.lowers, dtype=float)
        costs = np.asarray(self.costs, dtype=float)

        # Lower-bound transformation: force the lower flow, shift balances.
        b = self.balances.copy()
        caps = np.asarray(self.uppers, dtype=float) - lowers
        np.subtract.at(b, tails, lowers)
        np.add.at(b, heads, lowers)

        supply_total = float(b[b > 0].sum())
        caps[np.isinf(caps)] = max(supply_total, 1.0)

        scale = max(1.0, supply_total)
        feas_tol = 1e-9 * scale
        price_eps = 1e-11 * max(1.0, float(np.abs(costs).max()) if m else 1.0)

        root = n
        flows = np.zeros(m)
        state = np.full(m, _AT_LOWER, dtype=np.int8)

        parent = np.full(n + 1, root, dtype=int)
        parent[root] = -1
        pedge = np.full(n + 1, -1, dtype=int)  # -1: artificial arc of the node itself
        depth = np.ones(n + 1, dtype=int)
        depth[root] = 0
        children: list[set[int]] = [set() for _ in range(n + 1)]
        children[root] = set(range(n))

        adir = np.where(b >= 0, 1, -1)  # +1: node -> root, -1: root -> node
        aflow = np.abs(b)
        abasic = np.ones(n, dtype=bool)

        pi_m = np.concatenate([-adir, [0]]).astype(np.int64)
        pi_r = np.zeros(n + 1)

        def rebuild_subtree(start: int) -> None:
            # Recompute depth and both potential components below `start`.
            stack = [start]
            while stack:
                v = stack.pop()
                p = parent[v]
                e = pedge[v]
                depth[v] = depth[p] + 1
                if e >= 0:
                    if tails[e] == p:
                        pi_m[v] = pi_m[p]
                        pi_r[v] = pi_r[p] + costs[e]
                    else:
                        pi_m[v] = pi_m[p]
                        pi_r[v] = pi_r[p] - costs[e]
                else:
                    if adir[v] == 1:
                        pi_m[v] = pi_m[p] - 1
                    else:
                        pi_m[v] = pi_m[p] + 1
                    pi_r[v] = pi_r[p]
                stack.extend(children[v])

        def subtree_nodes(start: int) -> set[int]:
            seen = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for c in children[v]:
                    seen.add(c)
                    stack.append(c)
            return seen

        bigint = np.iinfo(np.int64).max // 4
        bland = False
        zero_streak = 0
        max_pivots = 500 * (m + n) + 10000

        for _ in range(max_pivots):
            rc_m = pi_m[tails] - pi_m[heads]
            rc_r = costs + pi_r[tails] - pi_r[heads]
            at_lower = state == _AT_LOWER
            at_upper = state == _AT_UPPER
            key_m = np.where(at_lower, rc_m, np.where(at_upper, -rc_m, bigint))
            key_r = np.where(at_lower, rc_r, np.where(at_upper, -rc_r, np.inf))
            cand = (key_m < 0) | ((key_m == 0) & (key_r < -price_eps))
            if not cand.any():
                break

            if bland:
                e = int(np.argmax(cand))
            else:
                mm = key_m[cand].min()
                tier = cand & (key_m == mm)
                rr = key_r[tier].min()
                e = int(np.argmax(tier & (key_r == rr)))
            direction = 1 if state[e] == _AT_LOWER else -1

            a_node, b_node = (tails[e], heads[e]) if direction == 1 else (heads[e], tails[e])

            # Tree paths from both endpoints up to their common ancestor.
            path_b: list[int] = []
            path_a: list[int] = []
            x, y = b_node, a_node
            while depth[x] > depth[y]:
                path_b.append(x)
                x = parent[x]
            while depth[y] > depth[x]:
                path_a.append(y)
                y = parent[y]
            while x != y:
                path_b.append(x)
                x = parent[x]
                path_a.append(y)
                y = parent[y]

            def arc_residual(z: int, aligned: bool) -> float:
                pe = pedge[z]
                if pe >= 0:
                    return caps[pe] - flows[pe] if aligned else flows[pe]
                return math.inf if aligned else float(aflow[z])

            # Cycle entries in push order: entering arc, then b-side up,
            # then a-side down.  ``None`` marks the entering arc.
            cycle: list[tuple[int | None, bool]] = [(None, True)]
            cycle += [(z, (tails[pedge[z]] == z) if pedge[z] >= 0 else adir[z] == 1) for z in path_b]
            cycle += [
                (z, (heads[pedge[z]] == z) if pedge[z] >= 0 else adir[z] == -1)
                for z in reversed(path_a)
            ]

            theta = math.inf
            leave_pos = 0
            enter_residual = caps[e] - flows[e] if direction == 1 else flows[e]
            for pos, (z, aligned) in enumerate(cycle):
                res = enter_residual if z is None else arc_residual(z, aligned)
                if res <= theta:  # keep the last blocking arc in cycle order
                    theta = res
                    leave_pos = pos
            if math.isinf(theta):
                raise RuntimeError("unbounded flow network")

            zero_streak = zero_streak + 1 if theta <= feas_tol * 1e-3 else 0
            if zero_streak > 2 * (m + n) + 50:
                bland = True

            if theta > 0:
                flows[e] += direction * theta
                for z, aligned in cycle[1:]:
                    pe = pedge[z]
                    delta = theta if aligned else -theta
                    if pe >= 0:
                        flows[pe] += delta
                    else:
                        aflow[z] += delta

            leave_node, leave_aligned = cycle[leave_pos]
            if leave_node is None:
                state[e] = _AT_UPPER if direction == 1 else _AT_LOWER
                flows[e] = caps[e] if direction == 1 else 0.0
                continue

            pe = pedge[leave_node]
            if pe >= 0:
                if leave_aligned:
                    state[pe] = _AT_UPPER
                    flows[pe] = caps[pe]
                else:
                    state[pe] = _AT_LOWER
                    flows[pe] = 0.0
            else:
                abasic[leave_node] = False
                aflow[leave_node] = 0.0

            sub = subtree_nodes(leave_node)
            q = tails[e] if tails[e] in sub else heads[e]
            r = heads[e] if q == tails[e] else tails[e]

            # Re-root the detached subtree at q, then hang it off r.
            seq = [q]
            while seq[-1] != leave_node:
                seq.append(parent[seq[-1]])
            old_pedges = [pedge[v] for v in seq]
            children[parent[leave_node]].discard(leave_node)
            for i in range(1, len(seq)):
                lower_node, upper_node = seq[i - 1], seq[i]
                children[upper_node].discard(lower_node)
                children[lower_node].add(upper_node)
                parent[upper_node] = lower_node
                pedge[upper_node] = old_pedges[i - 1]
            parent[q] = r
            pedge[q] = e
            children[r].add(q)
            state[e] = _IN_TREE
            rebuild_subtree(q)
        else:
            raise RuntimeError("network simplex exceeded its pivot budget")

        unmet = [(int(v), float(aflow[v])) for v in range(n) if aflow[v] > feas_tol]
        feasible = not unmet
        flows_out = flows + lowers
        cost = float(costs @ flows_out)
        return FlowResult(
            feasible=feasible,
            flows=flows_out,
            cost=cost,
            potentials_m=pi_m[:n].copy(),
            potentials=pi_r[:n].copy(),
            basic=state == _IN_TREE,
            unmet=unmet,
        )
