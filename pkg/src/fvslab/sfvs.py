"""Subdivision-based labelling relaxation for FVS.

An FVS instance G is turned into a subset-FVS instance H: every edge
e = uv becomes a path u, a_e, s_e, b_e, v with terminal s_e and pivots
a_e, b_e (all at infinite cost), plus an infinite-cost degree-1 root
attached to vertex 0 by a plain edge.  The labelling LP over H has vertex
variables x_u for the original vertices and label variables z_{u,e}
restricted to the labels reachable without crossing another terminal
(delta_G(u) plus the root label).  Its interesting-cycle constraints are
realised by cutting planes on H (or, for cross-checking, by the distance
system on H).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .caps import Caps
from .graph import Cycle, Graph, GraphError, cyclic_edges
from .lp import Constraint, EQ, GE, LinearProgram, LpError, LpStatus
from .formulations import SolveOutcome, solve_with_costs, x_names, finite_objective
from .rational import Cost, ONE, Q, ZERO, format_rational
from .separation import cheapest_cycle_through, separate_cycle_cover

ROOT_LABEL = "r"


@dataclass(frozen=True)
class SfvsInstance:
    g: Graph                 # original FVS instance
    h: Graph                 # subdivided graph plus root
    root: int                # root vertex id in h
    terminals: tuple[int, ...]            # s_e per original edge id
    pivots: tuple[tuple[int, int], ...]   # (a_e, b_e) per original edge id

    def origin(self, u: int) -> tuple:
        """Classify an h-vertex: original / root / pivot-of-edge / terminal-of-edge."""
        if u < self.g.n:
            return ("original", u)
        if u == self.root:
            return ("root",)
        k = u - self.g.n - 1
        eid, slot = divmod(k, 3)
        return ("terminal", eid) if slot == 1 else ("pivot", eid, 0 if slot == 0 else 1)

    def aux_vertices(self) -> tuple[int, ...]:
        return tuple(range(self.g.n, self.h.n))


def reduce_fvs_to_sfvs(g: Graph, costs: Optional[Sequence[Cost]] = None) -> SfvsInstance:
    """Build H: |V_H| = |V_G| + 1 + 3|E_G|; terminals and pivots get
    infinite cost; the root is attached to vertex 0."""
    if g.n == 0:
        raise GraphError("reduction needs at least one vertex")
    costs = g.costs if costs is None else tuple(costs)
    n = g.n
    root = n
    h_edges: list[tuple[int, int]] = [(0, root)]
    terminals = []
    pivots = []
    for eid, (u, v) in enumerate(g.edges):
        a = n + 1 + 3 * eid
        s = a + 1
        b = a + 2
        terminals.append(s)
        pivots.append((a, b))
        h_edges += [(u, a), (a, s), (s, b), (b, v)]
    h_costs = tuple(costs) + (Cost.infinite(),) * (1 + 3 * g.m)
    h = Graph(n + 1 + 3 * g.m, tuple(h_edges), h_costs)
    return SfvsInstance(g.with_costs(costs), h, root, tuple(terminals), tuple(pivots))


def validate_reduction(inst: SfvsInstance) -> None:
    """Structural assumptions of the labelling LP: infinite-cost degree-2
    terminals with infinite-cost neighbours, no two terminals adjacent or
    sharing a neighbour, an infinite-cost degree-1 root, and every cycle
    through at least two terminals."""
    h = inst.h
    if h.degree(inst.root) != 1 or not h.costs[inst.root].is_infinite:
        raise GraphError("root must be an infinite-cost degree-1 vertex")
    terminal_set = set(inst.terminals)
    for eid, s in enumerate(inst.terminals):
        if h.degree(s) != 2 or not h.costs[s].is_infinite:
            raise GraphError(f"terminal {s} must have degree 2 and infinite cost")
        a, b = inst.pivots[eid]
        if set(h.neighbors(s)) != {a, b}:
            raise GraphError(f"terminal {s} must neighbour its pivots")
        for p in (a, b):
            if not h.costs[p].is_infinite:
                raise GraphError(f"pivot {p} must have infinite cost")
        for w in h.neighbors(s):
            if w in terminal_set:
                raise GraphError("adjacent terminals")
            if any(t in terminal_set for t in h.neighbors(w) if t != s):
                raise GraphError("terminals sharing a neighbour")
    # every original edge is subdivided, so any h-cycle alternates through
    # >= 3 original vertices' paths and hence >= 2 terminals
    for eid in cyclic_edges(inst.h):
        u, v = inst.h.edges[eid]
        if u == inst.root or v == inst.root:
            raise GraphError("root lies on a cycle")


def z_name(u: int, label) -> str:
    return f"z({u},{label})"


def _labels(inst: SfvsInstance, u: int) -> list:
    """Edge labels reachable from u without crossing another terminal, plus
    the root label."""
    kind = inst.origin(u)
    if kind[0] == "original":
        anchor = u
    elif kind[0] == "pivot":
        eid = kind[1]
        anchor = inst.g.edges[eid][kind[2]]
    else:
        raise GraphError(f"vertex {u} carries no labels")
    return [eid for _, eid in inst.g.adjacency[anchor]] + [ROOT_LABEL]


def _nonspecial_edges(inst: SfvsInstance) -> list[tuple[int, int]]:
    """H-edges not incident to a terminal: (u, a_e), (b_e, v), and the root
    edge."""
    out = [(0, inst.root)]
    for eid, (u, v) in enumerate(inst.g.edges):
        a, b = inst.pivots[eid]
        out += [(u, a), (b, v)]
    return out


def build_cm_lp(inst: SfvsInstance) -> LinearProgram:
    """The labelling LP over H (cycle constraints left to cutting planes).

    Substituted constants: x = 0 and z = 0 on terminals, pivots and the
    root, except z(root, r) = 1.  Label-propagation rows are emitted per
    non-special edge, direction and label only when the subtracted variable
    exists; the omitted rows reduce to x >= 0 or 0 >= 0.
    """
    g = inst.g
    names = list(x_names(g.n))
    index: dict[str, int] = {nm: j for j, nm in enumerate(names)}

    def ensure(u: int, label) -> int:
        nm = z_name(u, label)
        if nm not in index:
            index[nm] = len(names)
            names.append(nm)
        return index[nm]

    carriers = list(range(g.n)) + [p for ab in inst.pivots for p in ab]
    for u in carriers:
        for label in _labels(inst, u):
            ensure(u, label)
    nvar = len(names)
    rows: list[Constraint] = []

    # (1) each carrier is deleted or receives exactly one admissible label
    for u in carriers:
        row = [ZERO] * nvar
        if u < g.n:
            row[u] = ONE
        for label in _labels(inst, u):
            row[index[z_name(u, label)]] = ONE
        rows.append(Constraint(tuple(row), EQ, ONE))

    # (2) exactly one pivot of each terminal owns the terminal's label
    for eid, (a, b) in enumerate(inst.pivots):
        row = [ZERO] * nvar
        row[index[z_name(a, eid)]] = ONE
        row[index[z_name(b, eid)]] = ONE
        rows.append(Constraint(tuple(row), EQ, ONE))

    # (3) label propagation along non-special edges
    def z_or_none(u: int, label) -> Optional[int]:
        if u == inst.root:
            return None
        return index.get(z_name(u, label))

    for p, q in _nonspecial_edges(inst):
        for src, dst in ((p, q), (q, p)):
            dst_labels = ([ROOT_LABEL] if dst == inst.root
                          else _labels(inst, dst))
            for label in dst_labels:
                if dst == inst.root:
                    continue  # z(root, r) = 1 makes the row vacuous
                row = [ZERO] * nvar
                rhs = ZERO
                if src < g.n:
                    row[src] = ONE
                if src == inst.root:
                    if label == ROOT_LABEL:
                        rhs -= ONE  # substituted z(root, r) = 1
                else:
                    col = z_or_none(src, label)
                    if col is not None:
                        row[col] = ONE
                row[index[z_name(dst, label)]] = -ONE
                rows.append(Constraint(tuple(row), GE, rhs))

    objective = tuple(finite_objective(g.costs)) + (ZERO,) * (nvar - g.n)
    return LinearProgram(tuple(names), objective, tuple(rows))


def lift_x_to_h(inst: SfvsInstance, x: Sequence) -> list:
    """x over V_H: the original values, 0 on terminals/pivots/root."""
    return list(x) + [ZERO] * (inst.h.n - inst.g.n)


def interesting_cycle_cut(inst: SfvsInstance, x: Sequence):
    """Most violated cycle constraint of H at the lifted point (terminal and
    pivot x treated as 0), as a row over original x variables."""
    vc = separate_cycle_cover(inst.h, lift_x_to_h(inst, x))
    if vc is None:
        return None
    row = [ZERO] * inst.g.n
    members = [v for v in vc.witness.vertices if v < inst.g.n]
    for v in members:
        row[v] = ONE
    return vc, tuple(row)


def distance_system_on_h(inst: SfvsInstance, lp: LinearProgram
                         ) -> tuple[list[str], list[Constraint]]:
    """Cross-check realisation of the cycle constraints: the distance system
    on H with the auxiliary vertices' x fixed to 0, expressed over lp's
    variables extended with d(v,e) columns."""
    h = inst.h
    live = sorted(cyclic_edges(h))
    names = list(lp.variables)
    index = {nm: j for j, nm in enumerate(names)}
    for eid in live:
        for v in range(h.n):
            names.append(f"d({v},{eid})")
    dcol = {}
    pos = len(lp.variables)
    for eid in live:
        for v in range(h.n):
            dcol[(v, eid)] = pos
            pos += 1
    nvar = len(names)

    def xcol(v: int) -> Optional[int]:
        return index.get(f"x({v})")

    rows = []
    for eid in live:
        s, t = h.edges[eid]
        row = [ZERO] * nvar
        row[dcol[(s, eid)]] = ONE
        rows.append(Constraint(tuple(row), EQ, ZERO))
        row = [ZERO] * nvar
        row[dcol[(t, eid)]] = ONE
        if xcol(s) is not None:
            row[xcol(s)] = ONE
        rows.append(Constraint(tuple(row), GE, ONE))
        for other, (a, b) in enumerate(h.edges):
            if other == eid:
                continue
            for p, q in ((a, b), (b, a)):
                row = [ZERO] * nvar
                row[dcol[(p, eid)]] = ONE
                row[dcol[(q, eid)]] = -ONE
                if xcol(q) is not None:
                    row[xcol(q)] = ONE
                rows.append(Constraint(tuple(row), GE, ZERO))
    return names, rows


@dataclass
class CmResult:
    outcome: SolveOutcome
    lp: LinearProgram
    log: list[dict] = field(default_factory=list)


def solve_cm(inst: SfvsInstance, *, caps: Caps = Caps(),
             cycle_mode: str = "cuts") -> CmResult:
    """Solve the labelling LP; cycle constraints by cutting planes on H, or
    by the distance system when cycle_mode='distance'."""
    g = inst.g
    lp = build_cm_lp(inst)
    if cycle_mode == "distance":
        names, extra = distance_system_on_h(inst, lp)
        wide = LinearProgram(
            tuple(names),
            lp.objective + (ZERO,) * (len(names) - lp.n_vars),
            tuple(
                Constraint(con.coeffs + (ZERO,) * (len(names) - lp.n_vars),
                           con.rel, con.rhs)
                for con in lp.constraints
            ) + tuple(extra),
        )
        outcome = solve_with_costs(wide, g, g.costs)
        return CmResult(outcome, wide)
    if cycle_mode != "cuts":
        raise ValueError(f"bad cycle mode {cycle_mode!r}")
    log: list[dict] = []
    for iteration in range(caps.cut_iterations):
        outcome = solve_with_costs(lp, g, g.costs)
        if outcome.status != LpStatus.OPTIMAL:
            return CmResult(outcome, lp, log)
        found = interesting_cycle_cut(inst, outcome.x)
        if found is None:
            return CmResult(outcome, lp, log)
        vc, row = found
        log.append({"iteration": iteration, "family": "cycle",
                    "witness": vc.witness_json(),
                    "lhs": format_rational(vc.lhs),
                    "rhs": format_rational(vc.rhs)})
        wide_row = tuple(row) + (ZERO,) * (lp.n_vars - g.n)
        lp = lp.with_extra_constraints([Constraint(wide_row, GE, ONE)])
    raise LpError("cycle cuts on H did not converge")


@dataclass(frozen=True)
class CmExtraction:
    x: tuple
    y: dict  # (edge id, vertex) -> value


def extract_cm_solution(inst: SfvsInstance, lp: LinearProgram,
                        values: Sequence) -> CmExtraction:
    """Map a labelling-LP point to (x, y) with y_{e,u} = z_{u,e}; verify it
    lies in the orientation polyhedron and covers every cycle (a failure is
    an implementation bug, not a data condition)."""
    g = inst.g
    vmap = dict(zip(lp.variables, values))
    x = tuple(vmap[f"x({v})"] for v in range(g.n))
    y = {}
    for v in range(g.n):
        for _, eid in g.adjacency[v]:
            y[(eid, v)] = vmap.get(z_name(v, eid), ZERO)
    for eid, (u, v) in enumerate(g.edges):
        if x[u] + x[v] + y[(eid, u)] + y[(eid, v)] < 1:
            raise LpError(f"extracted point misses coverage on edge {eid}")
    for v in range(g.n):
        if x[v] + sum((y[(eid, v)] for _, eid in g.adjacency[v]), ZERO) > 1:
            raise LpError(f"extracted point overloads vertex {v}")
    if any(xv < 0 for xv in x) or any(val < 0 for val in y.values()):
        raise LpError("extracted point has a negative coordinate")
    vc = separate_cycle_cover(g, x)
    if vc is not None:
        raise LpError(f"extracted point misses cycle {vc.witness.vertices}")
    return CmExtraction(x, y)
