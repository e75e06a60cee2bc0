"""Exact graph representation, structural predicates, and instance generators.

Graphs are simple and undirected, with exact rational (possibly infinite)
vertex costs.  Vertices are ``0..n-1``; an edge's identity is its position in
the edge list (EdgeId), and every LP variable downstream is keyed on
(EdgeId, VertexId) pairs.  All types are immutable and all operations are pure
functions, so values can be shared freely across threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .caps import CapExceeded, check_cap
from .rational import Cost, ONE, parse_cost


class GraphError(ValueError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with per-vertex costs.

    Edge endpoints are normalised to ``u < v``; self-loops and parallel edges
    are rejected.  ``costs`` defaults to all-ones.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    costs: tuple[Cost, ...] = field(default=())

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("vertex count must be non-negative")
        normalised = []
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
            normalised.append((u, v))
        object.__setattr__(self, "edges", tuple(normalised))
        if not self.costs:
            object.__setattr__(self, "costs", tuple(Cost(ONE) for _ in range(self.n)))
        if len(self.costs) != self.n:
            raise GraphError(f"expected {self.n} costs, got {len(self.costs)}")

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, the sorted tuple of (neighbour, edge id)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for eid, (u, v) in enumerate(self.edges):
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def adj_mask(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {uv: eid for eid, uv in enumerate(self.edges)}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(w for w, _ in self.adjacency[v])

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def edge_id(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return self.edge_index[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edge_index

    def with_costs(self, costs: Sequence[Cost]) -> "Graph":
        return Graph(self.n, self.edges, tuple(costs))

    def finite_cost_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if not self.costs[v].is_infinite)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Cycle:
    """A simple cycle given by its vertex sequence (length >= 3, canonical)."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        vs = self.vertices
        if len(vs) < 3:
            raise GraphError(f"cycle needs >= 3 vertices, got {vs}")
        if len(set(vs)) != len(vs):
            raise GraphError(f"repeated vertex in cycle {vs}")
        object.__setattr__(self, "vertices", _canonical_rotation(vs))

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: int) -> bool:
        return v in self.vertices

    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    def edge_pairs(self) -> tuple[tuple[int, int], ...]:
        vs = self.vertices
        return tuple(
            (min(vs[i], vs[(i + 1) % len(vs)]), max(vs[i], vs[(i + 1) % len(vs)]))
            for i in range(len(vs))
        )

    def validate_in(self, g: Graph) -> None:
        for u, v in self.edge_pairs():
            if not g.has_edge(u, v):
                raise GraphError(f"cycle edge ({u}, {v}) missing from graph")


def _canonical_rotation(vs: Sequence[int]) -> tuple[int, int] | tuple[int, ...]:
    """Rotate/reflect so the smallest vertex is first and its smaller
    neighbour second; makes cycles comparable and deterministic."""
    k = len(vs)
    i = min(range(k), key=lambda j: vs[j])
    forward = tuple(vs[(i + j) % k] for j in range(k))
    backward = tuple(vs[(i - j) % k] for j in range(k))
    return min(forward, backward)


# ---------------------------------------------------------------------------
# Mask-based subset helpers (the residual-graph workhorses)
# ---------------------------------------------------------------------------

def degree_within(g: Graph, v: int, mask: int) -> int:
    return _popcount(g.adj_mask[v] & mask)


def edges_within(g: Graph, mask: int) -> list[int]:
    """Edge ids with both endpoints in the mask."""
    return [eid for eid, (u, v) in enumerate(g.edges)
            if (mask >> u) & 1 and (mask >> v) & 1]


def count_edges_within(g: Graph, mask: int) -> int:
    total = 0
    m = mask
    while m:
        v = (m & -m).bit_length() - 1
        total += _popcount(g.adj_mask[v] & mask)
        m &= m - 1
    return total // 2


def surplus(g: Graph, mask: int) -> int:
    """b(S) = |E[S]| - |S| for the vertex subset encoded by mask."""
    return count_edges_within(g, mask) - _popcount(mask)


def components_within(g: Graph, mask: int) -> list[int]:
    comps = []
    todo = mask
    while todo:
        start = todo & -todo
        comp = start
        frontier = start
        while frontier:
            nxt = 0
            f = frontier
            while f:
                v = (f & -f).bit_length() - 1
                nxt |= g.adj_mask[v] & mask & ~comp
                f &= f - 1
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        todo &= ~comp
    return comps


def prune_low_degree(g: Graph, mask: int) -> int:
    """Recursively drop vertices of degree <= 1; result has min degree >= 2
    or is empty.  Dropped vertices lie on no cycle of g[mask]."""
    changed = True
    while changed:
        changed = False
        m = mask
        while m:
            bit = m & -m
            v = bit.bit_length() - 1
            if _popcount(g.adj_mask[v] & mask) <= 1:
                mask &= ~bit
                changed = True
            m &= m - 1
    return mask


def is_acyclic_within(g: Graph, mask: int) -> bool:
    return prune_low_degree(g, mask) == 0


def has_cycle_within(g: Graph, mask: int) -> bool:
    return prune_low_degree(g, mask) != 0


def is_pseudoforest_within(g: Graph, mask: int) -> bool:
    return all(count_edges_within(g, comp) <= _popcount(comp)
               for comp in components_within(g, mask))


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def vertices_of(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        bit = mask & -mask
        out.append(bit.bit_length() - 1)
        mask &= mask - 1
    return tuple(out)


# ---------------------------------------------------------------------------
# Spec operations
# ---------------------------------------------------------------------------

def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """g[S] plus the relabelling map: position i of the returned tuple is the
    original id of new vertex i (original ids kept in ascending order)."""
    keep = sorted(set(s))
    for v in keep:
        if not (0 <= v < g.n):
            raise GraphError(f"vertex {v} out of range")
    new_of_old = {v: i for i, v in enumerate(keep)}
    edges = [(new_of_old[u], new_of_old[v]) for u, v in g.edges
             if u in new_of_old and v in new_of_old]
    costs = tuple(g.costs[v] for v in keep)
    return Graph(len(keep), tuple(edges), costs), tuple(keep)


def is_acyclic(g: Graph) -> bool:
    return is_acyclic_within(g, g.full_mask())


def is_pseudoforest(g: Graph) -> bool:
    """True iff every connected component has |E| <= |V|."""
    return is_pseudoforest_within(g, g.full_mask())


def prune_degree_one(g: Graph) -> tuple[Graph, frozenset[int], tuple[int, ...]]:
    """Recursively remove degree-<=1 vertices.

    Returns (pruned graph, removed vertex set, map new id -> old id).  The
    pruned graph has minimum degree >= 2 or is empty; removed vertices lie on
    no cycle.
    """
    mask = prune_low_degree(g, g.full_mask())
    survivors = vertices_of(mask)
    sub, old_of_new = induced_subgraph(g, survivors)
    removed = frozenset(range(g.n)) - set(survivors)
    return sub, removed, old_of_new


def find_semi_disjoint_cycle(
    g: Graph, mask: int | None = None
) -> Optional[tuple[Cycle, Optional[int]]]:
    """Find a cycle with at most one vertex of degree > 2 in g[mask].

    Intended for graphs of minimum degree >= 2 (prune first).  Returns the
    lexicographically smallest canonical witness and its pivot (the one
    vertex of degree > 2, if any), or None.
    """
    if mask is None:
        mask = g.full_mask()
    candidates: list[tuple[tuple[int, ...], Optional[int]]] = []

    # 2-regular components are themselves semi-disjoint cycles (no pivot).
    for comp in components_within(g, mask):
        vs = vertices_of(comp)
        if len(vs) >= 3 and all(degree_within(g, v, mask) == 2 for v in vs):
            cyc = _trace_cycle_from(g, mask, vs[0])
            candidates.append((cyc, None))

    # Chains of degree-2 vertices whose both ends attach to the same pivot.
    seen_chains = set()
    for h in vertices_of(mask):
        if degree_within(g, h, mask) <= 2:
            continue
        for c, _ in g.adjacency[h]:
            if not ((mask >> c) & 1) or degree_within(g, c, mask) != 2:
                continue
            chain = [c]
            prev, cur = h, c
            while True:
                nxts = [w for w, _ in g.adjacency[cur]
                        if (mask >> w) & 1 and w != prev]
                if len(nxts) != 1:
                    break
                nxt = nxts[0]
                if nxt == h:
                    if len(chain) >= 2:
                        key = (h, frozenset(chain))
                        if key not in seen_chains:
                            seen_chains.add(key)
                            candidates.append((tuple([h] + chain), h))
                    break
                if degree_within(g, nxt, mask) != 2:
                    break
                chain.append(nxt)
                prev, cur = cur, nxt

    if not candidates:
        return None
    best = min(candidates, key=lambda c: _canonical_rotation(c[0]))
    return Cycle(best[0]), best[1]


def _trace_cycle_from(g: Graph, mask: int, start: int) -> tuple[int, ...]:
    order = [start]
    prev, cur = None, start
    while True:
        nxts = [w for w, _ in g.adjacency[cur] if (mask >> w) & 1 and w != prev]
        nxt = nxts[0]
        if nxt == start:
            return tuple(order)
        order.append(nxt)
        prev, cur = cur, nxt


def bridges(g: Graph) -> frozenset[int]:
    """Edge ids of bridges (iterative lowlink DFS)."""
    disc = [-1] * g.n
    low = [0] * g.n
    out: set[int] = set()
    timer = 0
    for root in range(g.n):
        if disc[root] != -1:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]  # vertex, parent edge, adj pos
        while stack:
            v, pe, i = stack.pop()
            if i == 0:
                disc[v] = low[v] = timer
                timer += 1
            if i < len(g.adjacency[v]):
                stack.append((v, pe, i + 1))
                w, eid = g.adjacency[v][i]
                if eid == pe:
                    continue
                if disc[w] == -1:
                    stack.append((w, eid, 0))
                else:
                    low[v] = min(low[v], disc[w])
            else:
                if pe != -1:
                    u, w = g.edges[pe]
                    parent = u if disc[u] < disc[w] else w
                    child = w if parent == u else u
                    low[parent] = min(low[parent], low[child])
                    if low[child] > disc[parent]:
                        out.add(pe)
    return frozenset(out)


def cyclic_edges(g: Graph) -> frozenset[int]:
    """Edge ids lying on at least one cycle: exactly the non-bridges."""
    dead = bridges(g)
    return frozenset(eid for eid in range(g.m) if eid not in dead)


def enumerate_cycles(g: Graph, cap: int = 12) -> list[Cycle]:
    """All simple cycles, each once up to rotation/reflection.

    Backtracking enumeration anchored at the smallest cycle vertex; intended
    for small graphs (raises above the cap).
    """
    check_cap("enumerate_cycles", g.n, cap)
    cycles: list[Cycle] = []
    adj = g.adjacency
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def extend(v: int) -> None:
            for w, _ in adj[v]:
                if w == s and len(path) >= 3 and path[1] < path[-1]:
                    cycles.append(Cycle(tuple(path)))
                elif w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    path.pop()
                    on_path.remove(w)

        extend(s)
    return sorted(cycles, key=lambda c: c.vertices)


def pseudoforest_fvs(g: Graph) -> frozenset[int]:
    """Minimum-cost FVS of a pseudoforest: the cheapest vertex on the unique
    cycle of each cyclic pseudotree component (ties to the lowest index)."""
    if not is_pseudoforest(g):
        raise GraphError("pseudoforest_fvs requires a pseudoforest")
    picked = set()
    for comp in components_within(g, g.full_mask()):
        core = prune_low_degree(g, comp)
        if core == 0:
            continue
        best = None
        for v in vertices_of(core):
            if best is None or g.costs[v] < g.costs[best]:
                best = v
        picked.add(best)
    return frozenset(picked)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def butterfly() -> Graph:
    """Two triangles sharing a centre vertex (vertex 0, degree 4)."""
    return Graph(5, ((0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)))


def complete(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def figure1(n: int) -> Graph:
    """K_n joined to a triangle of undeletable vertices.

    Vertices 0..n-1 form K_n at cost 1; vertices n, n+1, n+2 form a triangle
    at infinite cost, with vertex n additionally adjacent to all of K_n.
    """
    if n < 1:
        raise GraphError("figure1 needs n >= 1")
    u, v, w = n, n + 1, n + 2
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges += [(a, u) for a in range(n)]
    edges += [(u, v), (v, w), (u, w)]
    costs = tuple(Cost(ONE) for _ in range(n)) + (Cost.infinite(),) * 3
    return Graph(n + 3, tuple(edges), costs)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    rng = random.Random(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return Graph(n, tuple(edges))


_GENERATORS = {
    "butterfly": butterfly,
    "complete": complete,
    "cycle": cycle_graph,
    "figure1": figure1,
    "erdos_renyi": erdos_renyi,
}


def generate(kind: str, **params) -> Graph:
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r} (known: {sorted(_GENERATORS)})")
    return gen(**params)


# ---------------------------------------------------------------------------
# Text format:  "n m" header, n cost lines (p/q | int | inf), m "u v" lines.
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise GraphError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphError(f"expected 'n m' header, got {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) != 1 + n + m:
        raise GraphError(f"expected {1 + n + m} lines for n={n} m={m}, got {len(lines)}")
    costs = tuple(parse_cost(lines[1 + i]) for i in range(n))
    edges = []
    for k in range(m):
        parts = lines[1 + n + k].split()
        if len(parts) != 2:
            raise GraphError(f"bad edge line {lines[1 + n + k]!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph(n, tuple(edges), costs)


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out += [str(c) for c in g.costs]
    out += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(out) + "\n"


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())
