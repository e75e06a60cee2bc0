"""Separation oracles and the cutting-plane driver.

Polynomial oracles: cycle cover (vertex-weighted shortest paths per cyclic
edge) and 2-pseudotree cover (reduced to node-weighted Steiner tree with at
most four terminals, solved by a Dreyfus-Wagner style dynamic program).
Density families are separated by capped subset enumeration.

All weights are exact rationals; a returned violation is strict.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .caps import Caps, check_cap
from .formulations import (
    FormulationKind,
    SolveOutcome,
    build_formulation,
    combine,
    solve_with_costs,
    weak_density_row,
    wd_subgraph_row,
)
from .graph import (
    Cycle,
    Graph,
    count_edges_within,
    cyclic_edges,
    mask_of,
    surplus,
    vertices_of,
)
from .lp import Constraint, GE, LinearProgram, LpError, LpStatus
from .rational import Cost, ONE, Q, ZERO, format_rational


@dataclass(frozen=True)
class ViolatedConstraint:
    family: str                     # cycle | two-pseudotree | weak-density | strong-density | wd-subgraph
    witness: object                 # Cycle | frozenset | (frozenset, frozenset)
    lhs: object
    rhs: object
    row: tuple                      # x-space coefficients of the >= constraint

    def __post_init__(self):
        if not self.lhs < self.rhs:
            raise ValueError("violation must be strict")

    def witness_json(self) -> object:
        if isinstance(self.witness, Cycle):
            return list(self.witness.vertices)
        if isinstance(self.witness, frozenset):
            return sorted(self.witness)
        vt, et = self.witness
        return {"vertices": sorted(vt), "edges": sorted(et)}


# ---------------------------------------------------------------------------
# Exact vertex-weighted shortest paths
# ---------------------------------------------------------------------------

def vertex_weight_dijkstra(
    g: Graph,
    weights: Sequence,
    source: int,
    excluded_edges: frozenset[int] = frozenset(),
) -> tuple[list, dict[int, int]]:
    """dist[v] = min over source-v paths of the weight of the path minus the
    source (i.e. the source's weight is not counted); parent gives one
    optimal predecessor per reached vertex.  Weights must be >= 0."""
    dist: list = [None] * g.n
    parent: dict[int, int] = {}
    dist[source] = ZERO
    heap = [(ZERO, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d != dist[v]:
            continue
        for w, eid in g.adjacency[v]:
            if eid in excluded_edges:
                continue
            cand = d + weights[w]
            if dist[w] is None or cand < dist[w]:
                dist[w] = cand
                parent[w] = v
                heapq.heappush(heap, (cand, w))
    return dist, parent


def _path_from(parent: dict[int, int], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def cheapest_cycle_through(g: Graph, x: Sequence, eid: int) -> Optional[tuple[object, Cycle]]:
    """Minimum total x-weight of a cycle through edge eid, with a witness."""
    s, t = g.edges[eid]
    dist, parent = vertex_weight_dijkstra(g, x, s, excluded_edges=frozenset({eid}))
    if dist[t] is None:
        return None
    weight = x[s] + dist[t]
    cyc = Cycle(tuple(_path_from(parent, s, t)))
    return weight, cyc


def separate_cycle_cover(g: Graph, x: Sequence) -> Optional[ViolatedConstraint]:
    """Most violated cycle cover constraint, or None.  For each cyclic edge
    e = st the cheapest cycle through e is x_s + x_t + the cheapest interior
    path from s to t in G - e."""
    best: Optional[tuple] = None
    for eid in sorted(cyclic_edges(g)):
        found = cheapest_cycle_through(g, x, eid)
        if found is None:
            continue
        weight, cyc = found
        if weight < 1:
            key = (weight, cyc.vertices)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    weight, vertices = best
    cyc = Cycle(vertices)
    row = [ZERO] * g.n
    for v in vertices:
        row[v] = ONE
    return ViolatedConstraint("cycle", cyc, weight, ONE, tuple(row))


# ---------------------------------------------------------------------------
# Node-weighted Steiner tree (Dreyfus-Wagner style DP) and MC2PT
# ---------------------------------------------------------------------------

def nwst(
    g: Graph,
    weights: Sequence,
    terminals: Iterable[int],
    excluded_edges: frozenset[int] = frozenset(),
) -> Optional[tuple[frozenset[int], object]]:
    """Minimum total vertex weight of a connected acyclic subgraph spanning
    the terminals (each vertex counted once); None when they are not
    connectable.

    DP over (terminal subset, anchor vertex): merge two subtrees at the
    anchor (subtracting its doubly counted weight), then close under
    node-weighted shortest-path growth.
    """
    terms = sorted(set(terminals))
    if not terms:
        raise ValueError("nwst needs at least one terminal")
    k = len(terms)
    full = (1 << k) - 1
    n = g.n
    best: list[list] = [[None] * n for _ in range(full + 1)]
    back: list[list] = [[None] * n for _ in range(full + 1)]

    def close(mask: int) -> None:
        row = best[mask]
        heap = [(row[v], v) for v in range(n) if row[v] is not None]
        heapq.heapify(heap)
        while heap:
            d, v = heapq.heappop(heap)
            if d != row[v]:
                continue
            for w, eid in g.adjacency[v]:
                if eid in excluded_edges:
                    continue
                cand = d + weights[w]
                if row[w] is None or cand < row[w]:
                    row[w] = cand
                    back[mask][w] = ("grow", v)
                    heapq.heappush(heap, (cand, w))

    for i, t in enumerate(terms):
        best[1 << i][t] = weights[t]
        back[1 << i][t] = ("base", t)
        close(1 << i)

    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        row = best[mask]
        sub = (mask - 1) & mask
        while sub:
            if sub & low:  # count each split once
                other = mask ^ sub
                arow, brow = best[sub], best[other]
                for v in range(n):
                    a = arow[v]
                    if a is None:
                        continue
                    b = brow[v]
                    if b is None:
                        continue
                    cand = a + b - weights[v]
                    if row[v] is None or cand < row[v]:
                        row[v] = cand
                        back[mask][v] = ("merge", sub)
            sub = (sub - 1) & mask
        close(mask)

    anchor = None
    for v in range(n):
        val = best[full][v]
        if val is not None and (anchor is None or val < best[full][anchor]):
            anchor = v
    if anchor is None:
        return None

    vertices: set[int] = set()
    stack = [(full, anchor)]
    while stack:
        mask, v = stack.pop()
        vertices.add(v)
        tag = back[mask][v]
        if tag is None:
            raise LpError("nwst reconstruction lost its trail")  # pragma: no cover
        if tag[0] == "grow":
            stack.append((mask, tag[1]))
        elif tag[0] == "merge":
            stack.append((tag[1], v))
            stack.append((mask ^ tag[1], v))
    return frozenset(vertices), best[full][anchor]


def mc2pt(g: Graph, weights: Sequence) -> Optional[tuple[frozenset[int], object]]:
    """Minimum-weight U with G[U] connected and |E[U]| >= |U| + 1: enumerate
    unordered pairs of distinct edges, solve NWST on G - {e1, e2} with the
    (deduplicated) endpoints as terminals, take the best."""
    best: Optional[tuple] = None
    for e1 in range(g.m):
        u1, v1 = g.edges[e1]
        for e2 in range(e1 + 1, g.m):
            u2, v2 = g.edges[e2]
            res = nwst(g, weights, {u1, v1, u2, v2},
                       excluded_edges=frozenset({e1, e2}))
            if res is None:
                continue
            vs, weight = res
            key = (weight, tuple(sorted(vs)))
            if best is None or key < best:
                best = key
    if best is None:
        return None
    weight, vs = best
    return frozenset(vs), weight


def separate_2pt_cover(g: Graph, x: Sequence) -> Optional[ViolatedConstraint]:
    res = mc2pt(g, x)
    if res is None:
        return None
    vs, weight = res
    if not weight < 1:
        return None
    row = [ZERO] * g.n
    for v in vs:
        row[v] = ONE
    return ViolatedConstraint("two-pseudotree", vs, weight, ONE, tuple(row))


# ---------------------------------------------------------------------------
# Density families (enumeration)
# ---------------------------------------------------------------------------

def _separate_density(g: Graph, x: Sequence, strong: bool, cap: int) -> Optional[ViolatedConstraint]:
    check_cap("density separation", g.n, cap)
    best = None
    for mask in range(1, 1 << g.n):
        if strong and count_edges_within(g, mask) == 0:
            continue
        coeffs, rhs = weak_density_row(g, mask)
        if strong:
            rhs = rhs + ONE
        lhs = sum((c * xv for c, xv in zip(coeffs, x) if c != 0), ZERO)
        gap = rhs - lhs
        if gap > 0:
            key = (-gap, vertices_of(mask))
            if best is None or key < best[0]:
                best = (key, coeffs, lhs, rhs, mask)
    if best is None:
        return None
    _, coeffs, lhs, rhs, mask = best
    family = "strong-density" if strong else "weak-density"
    return ViolatedConstraint(family, frozenset(vertices_of(mask)), lhs, rhs, coeffs)


def separate_weak_density(g: Graph, x: Sequence,
                          cap: int = Caps().subset_enum) -> Optional[ViolatedConstraint]:
    return _separate_density(g, x, strong=False, cap=cap)


def separate_strong_density(g: Graph, x: Sequence,
                            cap: int = Caps().subset_enum) -> Optional[ViolatedConstraint]:
    return _separate_density(g, x, strong=True, cap=cap)


def separate_wd_subgraphs(g: Graph, x: Sequence,
                          cap: int = Caps().subset_enum) -> Optional[ViolatedConstraint]:
    """For each vertex subset the worst edge set keeps exactly the edges with
    1 - x_u - x_v > 0 (the constraint rearranges to
    sum_{e in Et}(1 - x_u - x_v) <= sum_{v in Vt}(1 - x_v))."""
    check_cap("wd-subgraph separation", g.n, cap)
    best = None
    for mask in range(1, 1 << g.n):
        vs = vertices_of(mask)
        gain = ZERO
        chosen = []
        for eid, (u, v) in enumerate(g.edges):
            if (mask >> u) & 1 and (mask >> v) & 1:
                term = ONE - x[u] - x[v]
                if term > 0:
                    gain += term
                    chosen.append(eid)
        budget = sum((ONE - x[v] for v in vs), ZERO)
        violation = gain - budget
        if violation > 0:
            key = (-violation, vs, tuple(chosen))
            if best is None or key < best[0]:
                best = (key, mask, chosen)
    if best is None:
        return None
    _, mask, chosen = best
    vt = frozenset(vertices_of(mask))
    et = frozenset(chosen)
    coeffs, rhs = wd_subgraph_row(g, vt, et)
    lhs = sum((c * xv for c, xv in zip(coeffs, x) if c != 0), ZERO)
    return ViolatedConstraint("wd-subgraph", (vt, et), lhs, rhs, coeffs)


# ---------------------------------------------------------------------------
# Distance-system feasibility (block-diagonal per cyclic edge)
# ---------------------------------------------------------------------------

def distance_system_feasible(g: Graph, x: Sequence) -> bool:
    """Exact feasibility of the cycle-cover distance system for the given x:
    the system is block-diagonal per cyclic edge e = st, and the pointwise
    maximal d is the shortest-path distance in G - e, so block e is feasible
    iff x_s + dist(t) >= 1."""
    if any(xv < 0 for xv in x):
        return False
    for eid in sorted(cyclic_edges(g)):
        s, t = g.edges[eid]
        dist, _ = vertex_weight_dijkstra(g, x, s, excluded_edges=frozenset({eid}))
        if dist[t] is not None and x[s] + dist[t] < 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Cutting-plane driver
# ---------------------------------------------------------------------------

CUT_ORACLES: dict[str, Callable] = {
    "cycle": separate_cycle_cover,
    "2pt": separate_2pt_cover,
    "wd": separate_weak_density,
    "sd": separate_strong_density,
    "wd-sub": separate_wd_subgraphs,
}

_ENUM_FAMILIES = {"wd", "sd", "wd-sub"}


@dataclass
class CutResult:
    outcome: SolveOutcome
    lp: LinearProgram
    log: list[dict] = field(default_factory=list)

    def log_lines(self) -> str:
        return "\n".join(json.dumps(entry, sort_keys=True) for entry in self.log)


def cutting_plane_solve(
    g: Graph,
    costs: Optional[Sequence[Cost]],
    base: Iterable[FormulationKind] | FormulationKind,
    cut_families: Sequence[str],
    *,
    caps: Caps = Caps(),
    cycle_cover_mode: str = "distance",
    minimal: bool = False,
    max_iterations: Optional[int] = None,
) -> CutResult:
    """Iterate: solve the LP, query each cut family's oracle at the x part,
    add every violated constraint found, stop when none is violated.  Each
    family is finite, cuts are never removed, and a returned cut is strictly
    violated (hence new), so the loop terminates."""
    if isinstance(base, FormulationKind):
        base = [base]
    kinds = list(base)
    for family in cut_families:
        if family not in CUT_ORACLES:
            raise ValueError(f"unknown cut family {family!r}")
    if kinds:
        lp = combine(*[build_formulation(g, kind, costs, caps=caps,
                                         cycle_cover_mode=cycle_cover_mode)
                       for kind in kinds])
    else:  # pure cutting planes over x >= 0
        from .formulations import finite_objective, x_names
        use = g.costs if costs is None else tuple(costs)
        lp = LinearProgram(x_names(g.n), finite_objective(use), ())
    limit = caps.cut_iterations if max_iterations is None else max_iterations
    log: list[dict] = []
    for iteration in range(limit):
        outcome = solve_with_costs(lp, g, costs, minimal=minimal)
        if outcome.status != LpStatus.OPTIMAL:
            return CutResult(outcome, lp, log)
        new_rows = []
        for family in cut_families:
            oracle = CUT_ORACLES[family]
            if family in _ENUM_FAMILIES:
                vc = oracle(g, outcome.x, cap=caps.subset_enum)
            else:
                vc = oracle(g, outcome.x)
            if vc is not None:
                log.append({
                    "iteration": iteration,
                    "family": vc.family,
                    "witness": vc.witness_json(),
                    "lhs": format_rational(vc.lhs),
                    "rhs": format_rational(vc.rhs),
                })
                row = list(vc.row) + [ZERO] * (lp.n_vars - g.n)
                new_rows.append(Constraint(tuple(row), GE, vc.rhs))
        if not new_rows:
            return CutResult(outcome, lp, log)
        lp = lp.with_extra_constraints(new_rows)
    raise LpError(f"cutting planes did not converge within {limit} iterations")


_DEFAULT_CUT_KINDS = {FormulationKind.TWO_PT_COVER: "2pt",
                      FormulationKind.WD_SUBGRAPHS: "wd-sub"}


def solve_relaxation(
    g: Graph,
    costs: Optional[Sequence[Cost]],
    kinds: Sequence[FormulationKind],
    *,
    caps: Caps = Caps(),
    cycle_cover_mode: str = "distance",
    minimal: bool = False,
) -> CutResult:
    """Solve the intersection of the requested formulations, routing the
    families without a compact builder (2pt, wd-sub; cc when asked) through
    cutting planes."""
    base: list[FormulationKind] = []
    families: list[str] = []
    for kind in kinds:
        if kind in _DEFAULT_CUT_KINDS:
            families.append(_DEFAULT_CUT_KINDS[kind])
        elif kind == FormulationKind.CYCLE_COVER and cycle_cover_mode == "cuts":
            families.append("cycle")
        else:
            base.append(kind)
    return cutting_plane_solve(g, costs, base, families, caps=caps,
                               cycle_cover_mode=cycle_cover_mode, minimal=minimal)
