import itertools

import pytest
from hypothesis import given, settings, strategies as st

from fvslab.caps import CapExceeded
from fvslab.graph import (
    Cycle, Graph, GraphError, butterfly, complete, count_edges_within,
    cycle_graph, cyclic_edges, enumerate_cycles, figure1, erdos_renyi,
    find_semi_disjoint_cycle, format_graph, generate, induced_subgraph,
    is_acyclic, is_pseudoforest, mask_of, parse_graph, prune_degree_one,
    prune_low_degree, pseudoforest_fvs, surplus, vertices_of,
)
from fvslab.rational import Cost


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def triangle_with_pendant():
    return Graph(4, ((0, 1), (0, 2), (1, 2), (2, 3)))


def test_graph_validation():
    with pytest.raises(GraphError):
        Graph(3, ((0, 0),))
    with pytest.raises(GraphError):
        Graph(3, ((0, 1), (1, 0)))
    with pytest.raises(GraphError):
        Graph(2, ((0, 2),))
    with pytest.raises(GraphError):
        Graph(2, (), costs=(Cost.finite(1),))


def test_edges_normalised_and_indexed():
    g = Graph(3, ((2, 0), (1, 2)))
    assert g.edges == ((0, 2), (1, 2))
    assert g.edge_id(2, 0) == 0
    assert g.degree(2) == 2


# induced_subgraph --------------------------------------------------------

def test_induced_subgraph_butterfly_triangle():
    g = butterfly()
    sub, old = induced_subgraph(g, {0, 1, 2})
    assert old == (0, 1, 2)
    assert sub.n == 3 and sub.m == 3  # a K3


def test_induced_subgraph_k5_triple():
    sub, _ = induced_subgraph(complete(5), {1, 2, 3})
    assert (sub.n, sub.m) == (3, 3)


def test_induced_subgraph_empty():
    sub, old = induced_subgraph(butterfly(), set())
    assert (sub.n, sub.m, old) == (0, 0, ())


def test_induced_subgraph_out_of_range():
    with pytest.raises(GraphError):
        induced_subgraph(butterfly(), {7})


# is_pseudoforest ---------------------------------------------------------

def test_is_pseudoforest():
    assert is_pseudoforest(cycle_graph(5))
    assert is_pseudoforest(path_graph(4))
    # butterfly: single component with |E|=6 > |V|=5
    assert not is_pseudoforest(butterfly())


def test_pseudoforest_by_component_counting_oracle():
    # independent oracle: check each component's edge/vertex counts directly
    from fvslab.graph import components_within
    for g in [butterfly(), cycle_graph(4), complete(4), triangle_with_pendant()]:
        expect = all(
            count_edges_within(g, comp) <= bin(comp).count("1")
            for comp in components_within(g, g.full_mask())
        )
        assert is_pseudoforest(g) == expect


# find_semi_disjoint_cycle -------------------------------------------------

def brute_semi_disjoint(g):
    """Oracle: enumerate all cycles, keep those with <= 1 vertex of host
    degree > 2."""
    found = []
    for cyc in enumerate_cycles(g):
        heavy = [v for v in cyc.vertices if g.degree(v) > 2]
        if len(heavy) <= 1:
            found.append((cyc, heavy[0] if heavy else None))
    return found


def test_semi_disjoint_triangle():
    cyc, pivot = find_semi_disjoint_cycle(complete(3))
    assert cyc.vertices == (0, 1, 2) and pivot is None


def test_semi_disjoint_butterfly():
    cyc, pivot = find_semi_disjoint_cycle(butterfly())
    assert pivot == 0
    assert cyc.vertex_set() in ({0, 1, 2}, {0, 3, 4})
    # deterministic: lowest canonical witness
    assert cyc.vertices == (0, 1, 2)


def test_semi_disjoint_k4_none():
    assert find_semi_disjoint_cycle(complete(4)) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_semi_disjoint_matches_bruteforce(seed):
    g = erdos_renyi(7, 0.45, seed)
    mask = prune_low_degree(g, g.full_mask())
    if mask == 0:
        return
    sub, old = induced_subgraph(g, vertices_of(mask))
    got = find_semi_disjoint_cycle(sub)
    expect = brute_semi_disjoint(sub)
    if got is None:
        assert expect == []
    else:
        got[0].validate_in(sub)
        assert got[0].vertex_set() in [c.vertex_set() for c, _ in expect]


# prune_degree_one ---------------------------------------------------------

def test_prune_path_to_empty():
    sub, removed, _ = prune_degree_one(path_graph(4))
    assert sub.n == 0 and removed == frozenset(range(4))


def test_prune_triangle_with_pendant():
    sub, removed, old = prune_degree_one(triangle_with_pendant())
    assert sub.n == 3 and removed == frozenset({3}) and old == (0, 1, 2)


def test_prune_butterfly_unchanged():
    sub, removed, _ = prune_degree_one(butterfly())
    assert removed == frozenset() and sub.m == 6


def test_prune_never_removes_cycle_vertices():
    for seed in range(40):
        g = erdos_renyi(8, 0.35, seed)
        mask = prune_low_degree(g, g.full_mask())
        on_cycles = set()
        for cyc in enumerate_cycles(g):
            on_cycles |= cyc.vertex_set()
        assert on_cycles <= set(vertices_of(mask))
        # cycles are preserved verbatim
        if mask:
            sub, old = induced_subgraph(g, vertices_of(mask))
            relabel = {o: i for i, o in enumerate(old)}
            orig = {frozenset(relabel[v] for v in c.vertices) for c in enumerate_cycles(g)}
            kept = {frozenset(c.vertices) for c in enumerate_cycles(sub)}
            assert orig == kept


# cyclic_edges --------------------------------------------------------------

def test_cyclic_edges_examples():
    assert cyclic_edges(path_graph(4)) == frozenset()
    assert cyclic_edges(cycle_graph(5)) == frozenset(range(5))
    g = triangle_with_pendant()
    assert cyclic_edges(g) == frozenset({0, 1, 2})


def brute_cyclic_edges(g):
    """Oracle: an edge is cyclic iff removing it keeps endpoints connected."""
    out = set()
    for eid, (u, v) in enumerate(g.edges):
        h = Graph(g.n, tuple(e for i, e in enumerate(g.edges) if i != eid), g.costs)
        from fvslab.graph import components_within
        for comp in components_within(h, h.full_mask()):
            if (comp >> u) & 1 and (comp >> v) & 1:
                out.add(eid)
                break
    return frozenset(out)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_cyclic_edges_matches_bruteforce(seed):
    g = erdos_renyi(9, 0.3, seed)
    assert cyclic_edges(g) == brute_cyclic_edges(g)


def test_cyclic_edges_matches_cycle_enumeration():
    for seed in range(25):
        g = erdos_renyi(8, 0.35, seed)
        through = set()
        for cyc in enumerate_cycles(g):
            for u, v in cyc.edge_pairs():
                through.add(g.edge_id(u, v))
        assert cyclic_edges(g) == frozenset(through)


# enumerate_cycles ----------------------------------------------------------

def test_enumerate_cycles_k4():
    cycles = enumerate_cycles(complete(4))
    assert len(cycles) == 7  # 4 triangles + 3 four-cycles
    assert sum(1 for c in cycles if len(c) == 3) == 4
    assert sum(1 for c in cycles if len(c) == 4) == 3


def test_enumerate_cycles_c5_and_forest():
    assert len(enumerate_cycles(cycle_graph(5))) == 1
    assert enumerate_cycles(path_graph(5)) == []


def test_enumerate_cycles_k5_count():
    # formula: sum_{k=3..n} C(n,k) (k-1)!/2 = 10+30+24+... for n=5: 37
    assert len(enumerate_cycles(complete(5))) == 37


def test_enumerate_cycles_cap():
    with pytest.raises(CapExceeded):
        enumerate_cycles(complete(13), cap=12)


def test_cycle_canonical_form():
    c1 = Cycle((2, 1, 0))
    c2 = Cycle((1, 2, 0))
    assert c1.vertices == c2.vertices == (0, 1, 2)
    with pytest.raises(GraphError):
        Cycle((0, 1))
    with pytest.raises(GraphError):
        Cycle((0, 1, 1))


# pseudoforest_fvs ----------------------------------------------------------

def test_pseudoforest_fvs_c5():
    assert pseudoforest_fvs(cycle_graph(5)) == frozenset({0})


def test_pseudoforest_fvs_two_triangles():
    costs = tuple(Cost.finite(c) for c in (1, 2, 3, 5, 4, 6))
    g = Graph(6, ((0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)), costs)
    assert pseudoforest_fvs(g) == frozenset({0, 4})


def test_pseudoforest_fvs_forest():
    assert pseudoforest_fvs(path_graph(4)) == frozenset()


def test_pseudoforest_fvs_requires_pseudoforest():
    with pytest.raises(GraphError):
        pseudoforest_fvs(butterfly())


# generators ----------------------------------------------------------------

def test_butterfly_shape():
    g = butterfly()
    assert (g.n, g.m) == (5, 6)
    assert g.degree(0) == 4


def test_figure1_shape():
    g = figure1(4)
    assert (g.n, g.m) == (7, 13)
    infinite = [v for v in range(g.n) if g.costs[v].is_infinite]
    assert infinite == [4, 5, 6]
    assert g.degree(4) == 4 + 2  # joined to K_4 and two triangle mates
    # n+3 vertices, C(n,2)+n+3 edges for general n
    for n in (1, 2, 6):
        h = figure1(n)
        assert (h.n, h.m) == (n + 3, n * (n - 1) // 2 + n + 3)


def test_generate_dispatch():
    assert generate("complete", n=4).m == 6
    assert generate("cycle", n=3).m == 3
    with pytest.raises(GraphError):
        generate("petersen")


def test_erdos_renyi_deterministic():
    assert erdos_renyi(8, 0.5, 7).edges == erdos_renyi(8, 0.5, 7).edges


# invariants ----------------------------------------------------------------

def test_surplus_matches_induced_subgraph():
    g = butterfly()
    for size in range(g.n + 1):
        for s in itertools.combinations(range(g.n), size):
            sub, _ = induced_subgraph(g, s)
            assert surplus(g, mask_of(s)) == sub.m - sub.n


# text format ---------------------------------------------------------------

def test_graph_format_roundtrip():
    g = figure1(3)
    text = format_graph(g)
    h = parse_graph(text)
    assert (h.n, h.edges) == (g.n, g.edges)
    assert all(a == b for a, b in zip(h.costs, g.costs))


def test_parse_graph_with_comments():
    text = "# demo\n3 2\n1\n1/2\ninf\n0 1\n1 2\n"
    g = parse_graph(text)
    assert g.costs[1] == Cost.finite("1/2") and g.costs[2].is_infinite
    assert g.edges == ((0, 1), (1, 2))


def test_parse_graph_errors():
    with pytest.raises(GraphError):
        parse_graph("")
    with pytest.raises(GraphError):
        parse_graph("2 1\n1\n1\n0 0\n")
    with pytest.raises(GraphError):
        parse_graph("2 2\n1\n1\n0 1\n")
