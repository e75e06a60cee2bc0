"""LP formulations over a graph: density, orientation, and cycle systems.

Every builder returns a LinearProgram whose x-variables are named ``x(v)`` and
come first, with the finite part of the vertex costs as the objective
(infinite costs contribute 0 there and are handled by a lexicographic stage,
see stage_objectives).  Formulations over the same graph can be intersected
with combine().
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Optional, Sequence

from .caps import CapExceeded, Caps, check_cap
from .graph import (
    Graph,
    GraphError,
    components_within,
    count_edges_within,
    cyclic_edges,
    degree_within,
    enumerate_cycles,
    is_acyclic_within,
    mask_of,
    vertices_of,
)
from .lp import (
    Constraint,
    EQ,
    GE,
    LE,
    LinearProgram,
    LpError,
    LpSolution,
    LpStatus,
    is_minimal_point,
    solve,
    solve_lexicographic,
)
from .rational import Cost, ONE, Q, ZERO


class FormulationKind(str, Enum):
    STRONG_DENSITY = "sd"
    WEAK_DENSITY = "wd"
    WD_SUBGRAPHS = "wd-sub"
    ORIENTATION = "orient"
    CYCLE_COVER = "cc"
    TWO_PT_COVER = "2pt"
    ORIENTATION_FVS = "orient-fvs"
    CM = "cm"

    @classmethod
    def from_flag(cls, flag: str) -> "FormulationKind":
        for kind in cls:
            if kind.value == flag:
                return kind
        raise ValueError(f"unknown formulation {flag!r} (known: {[k.value for k in cls]})")


def x_names(n: int) -> tuple[str, ...]:
    return tuple(f"x({v})" for v in range(n))


def finite_objective(costs: Sequence[Cost]) -> tuple:
    return tuple(c.finite_or(ZERO) for c in costs)


def _costs_of(g: Graph, costs: Optional[Sequence[Cost]]) -> tuple[Cost, ...]:
    return g.costs if costs is None else tuple(costs)


# ---------------------------------------------------------------------------
# Density families (subset enumeration, capped)
# ---------------------------------------------------------------------------

def weak_density_row(g: Graph, mask: int) -> tuple[tuple, object]:
    """Row and rhs of the weak density constraint for the subset mask:
    sum_{u in S} (d_S(u)-1) x_u >= |E[S]| - |S|."""
    coeffs = [ZERO] * g.n
    for v in vertices_of(mask):
        coeffs[v] = Q(degree_within(g, v, mask) - 1)
    rhs = Q(count_edges_within(g, mask) - bin(mask).count("1"))
    return tuple(coeffs), rhs


def build_weak_density(g: Graph, costs: Optional[Sequence[Cost]] = None,
                       *, cap: int = Caps().subset_enum) -> LinearProgram:
    """One constraint per nonempty S (all-zero rows with rhs <= 0 dropped)."""
    check_cap("weak density enumeration", g.n, cap)
    costs = _costs_of(g, costs)
    rows = []
    for mask in range(1, 1 << g.n):
        coeffs, rhs = weak_density_row(g, mask)
        if rhs <= 0 and all(c == 0 for c in coeffs):
            continue
        rows.append(Constraint(coeffs, GE, rhs))
    return LinearProgram(x_names(g.n), finite_objective(costs), tuple(rows))


def build_strong_density(g: Graph, costs: Optional[Sequence[Cost]] = None,
                         *, cap: int = Caps().subset_enum) -> LinearProgram:
    """One constraint per S with E[S] nonempty, rhs |E[S]| - |S| + 1."""
    check_cap("strong density enumeration", g.n, cap)
    costs = _costs_of(g, costs)
    rows = []
    for mask in range(1, 1 << g.n):
        if count_edges_within(g, mask) == 0:
            continue
        coeffs, rhs = weak_density_row(g, mask)
        rhs = rhs + ONE
        if rhs <= 0 and all(c == 0 for c in coeffs):
            continue
        rows.append(Constraint(coeffs, GE, rhs))
    return LinearProgram(x_names(g.n), finite_objective(costs), tuple(rows))


def wd_subgraph_row(g: Graph, vt: Iterable[int], et: Iterable[int]) -> tuple[tuple, object]:
    """Constraint row for the subgraph (vt, et):
    sum_{u in vt} (deg_in_subgraph(u) - 1) x_u >= |et| - |vt|."""
    vset = set(vt)
    eset = set(et)
    deg = {v: 0 for v in vset}
    for eid in eset:
        u, v = g.edges[eid]
        if u not in vset or v not in vset:
            raise GraphError(f"edge {eid} leaves the subgraph vertex set")
        deg[u] += 1
        deg[v] += 1
    coeffs = [ZERO] * g.n
    for v in vset:
        coeffs[v] = Q(deg[v] - 1)
    return tuple(coeffs), Q(len(eset) - len(vset))


# ---------------------------------------------------------------------------
# Orientation polyhedron
# ---------------------------------------------------------------------------

def y_name(eid: int, v: int) -> str:
    return f"y({eid},{v})"


def build_orientation(g: Graph, costs: Optional[Sequence[Cost]] = None) -> LinearProgram:
    """x_u + x_v + y_{e,u} + y_{e,v} >= 1 per edge; x_u + sum y_{e,u} <= 1
    per vertex."""
    costs = _costs_of(g, costs)
    names = list(x_names(g.n))
    for eid, (u, v) in enumerate(g.edges):
        names.append(y_name(eid, u))
        names.append(y_name(eid, v))
    index = {nm: j for j, nm in enumerate(names)}
    nvar = len(names)
    rows = []
    for eid, (u, v) in enumerate(g.edges):
        row = [ZERO] * nvar
        row[u] = row[v] = ONE
        row[index[y_name(eid, u)]] = ONE
        row[index[y_name(eid, v)]] = ONE
        rows.append(Constraint(tuple(row), GE, ONE))
    for v in range(g.n):
        row = [ZERO] * nvar
        row[v] = ONE
        for w, eid in g.adjacency[v]:
            row[index[y_name(eid, v)]] = ONE
        rows.append(Constraint(tuple(row), LE, ONE))
    objective = tuple(finite_objective(costs)) + (ZERO,) * (nvar - g.n)
    return LinearProgram(tuple(names), objective, tuple(rows))


def orientation_extension(g: Graph, x: Sequence) -> Optional[dict[str, object]]:
    """If x extends to (x, y) in the orientation polyhedron, return one such
    y (by names); else None.  This decides membership in the projection."""
    if any(xv < 0 for xv in x):
        return None
    names = []
    index = {}
    for eid, (u, v) in enumerate(g.edges):
        for w in (u, v):
            index[(eid, w)] = len(names)
            names.append(y_name(eid, w))
    rows = []
    nvar = len(names)
    for eid, (u, v) in enumerate(g.edges):
        row = [ZERO] * nvar
        row[index[(eid, u)]] = ONE
        row[index[(eid, v)]] = ONE
        rows.append(Constraint(tuple(row), GE, ONE - x[u] - x[v]))
    for v in range(g.n):
        row = [ZERO] * nvar
        for w, eid in g.adjacency[v]:
            row[index[(eid, v)]] = ONE
        rows.append(Constraint(tuple(row), LE, ONE - x[v]))
    lp = LinearProgram(tuple(names), (ZERO,) * nvar, tuple(rows))
    sol = solve(lp)
    if sol.status != LpStatus.OPTIMAL:
        return None
    return dict(zip(names, sol.values))


# ---------------------------------------------------------------------------
# Cycle cover: enumerated (x-space, tiny graphs) and distance realisation
# ---------------------------------------------------------------------------

def build_cycle_cover_enum(g: Graph, costs: Optional[Sequence[Cost]] = None,
                           *, cap: int = Caps().cycle_enum) -> LinearProgram:
    costs = _costs_of(g, costs)
    rows = []
    for cyc in enumerate_cycles(g, cap=cap):
        row = [ZERO] * g.n
        for v in cyc.vertices:
            row[v] = ONE
        rows.append(Constraint(tuple(row), GE, ONE))
    return LinearProgram(x_names(g.n), finite_objective(costs), tuple(rows))


def d_name(v: int, eid: int) -> str:
    return f"d({v},{eid})"


def build_cycle_cover_distance(g: Graph, costs: Optional[Sequence[Cost]] = None) -> LinearProgram:
    """Polynomial-sized system whose x-projection is the cycle cover
    polyhedron: per cyclic edge e = st, distance variables d(v,e) with
    d(s,e) = 0, d(t,e) + x_s >= 1, and for every other edge ab both
    propagation inequalities d(a,e) + x_b >= d(b,e), d(b,e) + x_a >= d(a,e).
    Propagation skips e itself: the distances are path lengths in G - e."""
    costs = _costs_of(g, costs)
    live = sorted(cyclic_edges(g))
    names = list(x_names(g.n))
    index = {}
    for eid in live:
        for v in range(g.n):
            index[(v, eid)] = len(names)
            names.append(d_name(v, eid))
    nvar = len(names)
    rows = []
    for eid in live:
        s, t = g.edges[eid]
        row = [ZERO] * nvar
        row[index[(s, eid)]] = ONE
        rows.append(Constraint(tuple(row), EQ, ZERO))
        row = [ZERO] * nvar
        row[index[(t, eid)]] = ONE
        row[s] = ONE
        rows.append(Constraint(tuple(row), GE, ONE))
        for other, (a, b) in enumerate(g.edges):
            if other == eid:
                continue
            for p, q in ((a, b), (b, a)):
                row = [ZERO] * nvar
                row[index[(p, eid)]] = ONE
                row[q] = ONE
                row[index[(q, eid)]] = -ONE
                rows.append(Constraint(tuple(row), GE, ZERO))
    objective = tuple(finite_objective(costs)) + (ZERO,) * (nvar - g.n)
    return LinearProgram(tuple(names), objective, tuple(rows))


# ---------------------------------------------------------------------------
# 2-pseudotree cover (enumerated; the cutting-plane route uses separation)
# ---------------------------------------------------------------------------

def two_pseudotree_masks(g: Graph, cap: int = Caps().subset_enum) -> list[int]:
    """All vertex subsets whose induced subgraph is a 2-pseudotree
    (connected, |E[U]| >= |U| + 1)."""
    check_cap("2-pseudotree enumeration", g.n, cap)
    out = []
    for mask in range(1, 1 << g.n):
        size = bin(mask).count("1")
        if size < 4:
            continue  # a simple graph needs >= 4 vertices for |E| >= |V|+1
        if count_edges_within(g, mask) < size + 1:
            continue
        if len(components_within(g, mask)) != 1:
            continue
        out.append(mask)
    return out


def build_two_pt_cover(g: Graph, costs: Optional[Sequence[Cost]] = None,
                       *, cap: int = Caps().subset_enum) -> LinearProgram:
    costs = _costs_of(g, costs)
    rows = []
    for mask in two_pseudotree_masks(g, cap):
        row = [ZERO] * g.n
        for v in vertices_of(mask):
            row[v] = ONE
        rows.append(Constraint(tuple(row), GE, ONE))
    return LinearProgram(x_names(g.n), finite_objective(costs), tuple(rows))


# ---------------------------------------------------------------------------
# Orientation-based FVS system (one y block per reference edge f)
# ---------------------------------------------------------------------------

def yf_name(f: int, eid: int, v: int) -> str:
    return f"yf({f},{eid},{v})"


def build_orientation_fvs(g: Graph, costs: Optional[Sequence[Cost]] = None) -> LinearProgram:
    """n + 2m^2 variables; per reference edge f: coverage rows for every
    edge, per-vertex lower bounds x_v + sum_{e=vw} y^f_{e,w} >= 1 (the y is
    read at the opposite endpoint, implemented literally), and one global
    budget row sum_{v not in f} x_v + sum_{e != f} (y^f_{e,u}+y^f_{e,v})
    <= |V| - 2."""
    costs = _costs_of(g, costs)
    names = list(x_names(g.n))
    index = {}
    for f in range(g.m):
        for eid, (u, v) in enumerate(g.edges):
            for w in (u, v):
                index[(f, eid, w)] = len(names)
                names.append(yf_name(f, eid, w))
    nvar = len(names)
    rows = []
    for f in range(g.m):
        for eid, (u, v) in enumerate(g.edges):
            row = [ZERO] * nvar
            row[u] = row[v] = ONE
            row[index[(f, eid, u)]] = ONE
            row[index[(f, eid, v)]] = ONE
            rows.append(Constraint(tuple(row), GE, ONE))
        for v in range(g.n):
            row = [ZERO] * nvar
            row[v] = ONE
            for w, eid in g.adjacency[v]:
                row[index[(f, eid, w)]] = ONE
            rows.append(Constraint(tuple(row), GE, ONE))
    for f, (a, b) in enumerate(g.edges):
        row = [ZERO] * nvar
        for v in range(g.n):
            if v != a and v != b:
                row[v] = ONE
        for eid, (u, v) in enumerate(g.edges):
            if eid != f:
                row[index[(f, eid, u)]] = ONE
                row[index[(f, eid, v)]] = ONE
        rows.append(Constraint(tuple(row), LE, Q(g.n - 2)))
    objective = tuple(finite_objective(costs)) + (ZERO,) * (nvar - g.n)
    return LinearProgram(tuple(names), objective, tuple(rows))


def integral_witness_orientation_fvs(g: Graph, fvs: Iterable[int], f: int) -> dict[str, object]:
    """The 0/1 assignment of the y^f block certifying that indicator(fvs)
    is IP-feasible: orient each surviving vertex along a spanning tree
    (containing every edge avoiding the FVS) towards f's endpoint a, and set
    both y^f values of f itself to 1.

    Components not containing f root their orientation at a deleted vertex
    when one exists, else at an arbitrary vertex whose tree edge is doubled.
    """
    fvs = frozenset(fvs)
    if not is_acyclic_within(g, g.full_mask() & ~mask_of(fvs)):
        raise GraphError("fvs is not a feasible feedback vertex set")
    if not (0 <= f < g.m):
        raise GraphError(f"edge id {f} out of range")
    a, b = g.edges[f]
    assign: dict[str, object] = {yf_name(f, eid, v): ZERO
                                 for eid, (u, v) in enumerate(g.edges)
                                 for v in (u, v)}
    assign[yf_name(f, f, a)] = ONE
    assign[yf_name(f, f, b)] = ONE

    for comp in components_within(g, g.full_mask()):
        comp_vs = vertices_of(comp)
        if len(comp_vs) == 1:
            v = comp_vs[0]
            if v not in fvs and g.m > 0:
                raise GraphError(
                    f"isolated vertex {v} outside the fvs admits no witness "
                    "(the per-vertex bound forces x=1 on it)")
            continue
        if (comp >> a) & 1:
            root = a
        else:
            in_fvs = [v for v in comp_vs if v in fvs]
            root = in_fvs[0] if in_fvs else comp_vs[0]
        tree = _spanning_tree_avoiding(g, comp, fvs)
        parent = _tree_parents(g, tree, root)
        for v in comp_vs:
            if v == root or v in fvs:
                continue
            if v == b and root == a:
                continue  # already served by the doubled edge f
            w, eid = parent[v]
            assign[yf_name(f, eid, w)] = ONE
        if root not in fvs and root != a:
            # no deleted vertex here: double one tree edge at the root
            w, eid = sorted(tree[root])[0]
            assign[yf_name(f, eid, w)] = ONE
    return assign


def _spanning_tree_avoiding(g: Graph, comp: int, fvs: frozenset[int]) -> dict[int, list[tuple[int, int]]]:
    """Spanning tree (adjacency dict v -> [(w, eid)]) of the component that
    contains every component edge with both endpoints outside fvs."""
    verts = vertices_of(comp)
    parent_uf = {v: v for v in verts}

    def find(v):
        while parent_uf[v] != v:
            parent_uf[v] = parent_uf[parent_uf[v]]
            v = parent_uf[v]
        return v

    tree: dict[int, list[tuple[int, int]]] = {v: [] for v in verts}

    def add(u, v, eid) -> bool:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent_uf[ru] = rv
        tree[u].append((v, eid))
        tree[v].append((u, eid))
        return True

    for eid, (u, v) in enumerate(g.edges):
        if (comp >> u) & 1 and (comp >> v) & 1 and u not in fvs and v not in fvs:
            if not add(u, v, eid):  # pragma: no cover - G - fvs is a forest
                raise GraphError("fvs leaves a cycle")
    for eid, (u, v) in enumerate(g.edges):
        if (comp >> u) & 1 and (comp >> v) & 1:
            add(u, v, eid)
    return tree


def _tree_parents(g: Graph, tree: dict[int, list[tuple[int, int]]], root: int) -> dict[int, tuple[int, int]]:
    parent: dict[int, tuple[int, int]] = {}
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w, eid in sorted(tree[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = (v, eid)
                    nxt.append(w)
        frontier = nxt
    return parent


# ---------------------------------------------------------------------------
# Intersection and cost handling
# ---------------------------------------------------------------------------

def combine(*lps: LinearProgram) -> LinearProgram:
    """Intersect constraint systems sharing variables by name (x variables
    shared across formulations of the same graph)."""
    names: list[str] = []
    objective: list = []
    nonneg: list[bool] = []
    index: dict[str, int] = {}
    for lp in lps:
        for j, nm in enumerate(lp.variables):
            if nm not in index:
                index[nm] = len(names)
                names.append(nm)
                objective.append(lp.objective[j])
                nonneg.append(lp.nonnegative[j])
            else:
                k = index[nm]
                if lp.objective[j] != objective[k] or lp.nonnegative[j] != nonneg[k]:
                    raise LpError(f"incompatible shared variable {nm!r}")
    rows = []
    for lp in lps:
        cols = [index[nm] for nm in lp.variables]
        for con in lp.constraints:
            row = [ZERO] * len(names)
            for c, k in zip(con.coeffs, cols):
                if c != 0:
                    row[k] = c
            rows.append(Constraint(tuple(row), con.rel, con.rhs))
    return LinearProgram(tuple(names), tuple(objective), tuple(rows), tuple(nonneg))


def stage_objectives(lp: LinearProgram, costs: Sequence[Cost],
                     minimal: bool = False) -> list[tuple]:
    """Lexicographic stages: infinite-cost x mass first (when present), then
    the finite objective, then (optionally) total support for minimal
    extreme points."""
    stages = []
    inf_row = [ZERO] * lp.n_vars
    any_inf = False
    for v, c in enumerate(costs):
        if c.is_infinite:
            inf_row[lp.index_of(f"x({v})")] = ONE
            any_inf = True
    if any_inf:
        stages.append(tuple(inf_row))
    stages.append(lp.objective)
    if minimal:
        stages.append((ONE,) * lp.n_vars)
    return stages


def big_m_objective(lp: LinearProgram, costs: Sequence[Cost]) -> tuple:
    """Single-objective cross-check: infinite costs replaced by
    M = 1 + (n+1) * sum of finite costs."""
    n = len(costs)
    total = sum((c.finite_or(ZERO) for c in costs), ZERO)
    m_value = ONE + Q(n + 1) * total
    row = list(lp.objective)
    for v, c in enumerate(costs):
        if c.is_infinite:
            row[lp.index_of(f"x({v})")] = m_value
    return tuple(row)


class SolveOutcome:
    """An LP optimum with the cost-aware value (Infinite when the instance
    forces fractional mass on undeletable vertices)."""

    def __init__(self, lp: LinearProgram, solution: LpSolution, g: Graph,
                 costs: Sequence[Cost]):
        self.lp = lp
        self.solution = solution
        self.status = solution.status
        if solution.status != LpStatus.OPTIMAL:
            self.value: Optional[Cost] = None
            self.x: Optional[tuple] = None
            return
        self.x = tuple(solution.values[lp.index_of(f"x({v})")] for v in range(g.n))
        inf_mass = sum((self.x[v] for v, c in enumerate(costs) if c.is_infinite),
                       ZERO)
        self.value = Cost.infinite() if inf_mass > 0 else Cost(solution.objective)


def solve_with_costs(lp: LinearProgram, g: Graph, costs: Optional[Sequence[Cost]] = None,
                     *, minimal: bool = False) -> SolveOutcome:
    """Solve min cost.x over the system; with minimal=True the returned
    vertex is certified minimal (no coordinate can decrease alone), using the
    support stage and, should certification ever fail, a perturbed single
    objective with halving epsilon."""
    costs = _costs_of(g, costs)
    stages = stage_objectives(lp, costs, minimal=minimal)
    sol = solve_lexicographic(lp, stages)
    if sol.status != LpStatus.OPTIMAL or not minimal:
        return SolveOutcome(lp, sol, g, costs)
    if is_minimal_point(lp, sol.values):
        return SolveOutcome(lp, sol, g, costs)
    # fallback: perturb the last stage into the finite objective
    base_stages = stages[:-2]
    finite = stages[-2]
    target = sum((c * v for c, v in zip(finite, sol.values)), ZERO)
    eps = ONE
    for _ in range(64):
        perturbed = tuple(c + eps for c in finite)
        cand = solve_lexicographic(lp, list(base_stages) + [perturbed])
        if cand.status == LpStatus.OPTIMAL:
            value = sum((c * v for c, v in zip(finite, cand.values)), ZERO)
            if value == target and is_minimal_point(lp, cand.values):
                return SolveOutcome(lp, cand, g, costs)
        eps = eps / 2
    raise LpError("could not certify a minimal extreme point")


# ---------------------------------------------------------------------------
# Direct-build dispatch (cut-family kinds are handled by the separation module)
# ---------------------------------------------------------------------------

def build_formulation(g: Graph, kind: FormulationKind,
                      costs: Optional[Sequence[Cost]] = None,
                      *, caps: Caps = Caps(),
                      cycle_cover_mode: str = "distance") -> LinearProgram:
    if kind == FormulationKind.WEAK_DENSITY:
        return build_weak_density(g, costs, cap=caps.subset_enum)
    if kind == FormulationKind.STRONG_DENSITY:
        return build_strong_density(g, costs, cap=caps.subset_enum)
    if kind == FormulationKind.ORIENTATION:
        return build_orientation(g, costs)
    if kind == FormulationKind.ORIENTATION_FVS:
        return build_orientation_fvs(g, costs)
    if kind == FormulationKind.CYCLE_COVER:
        if cycle_cover_mode == "distance":
            return build_cycle_cover_distance(g, costs)
        if cycle_cover_mode == "enum":
            return build_cycle_cover_enum(g, costs, cap=caps.cycle_enum)
        raise ValueError(f"bad cycle cover mode {cycle_cover_mode!r}")
    if kind == FormulationKind.TWO_PT_COVER:
        return build_two_pt_cover(g, costs, cap=caps.subset_enum)
    if kind == FormulationKind.CM:
        from .sfvs import build_cm_lp, reduce_fvs_to_sfvs
        return build_cm_lp(reduce_fvs_to_sfvs(g, costs))
    raise ValueError(f"{kind.value} has no direct builder (use cutting planes)")
