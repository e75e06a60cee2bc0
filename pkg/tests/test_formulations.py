import itertools

import pytest

from fvslab.caps import CapExceeded
from fvslab.formulations import (
    build_cycle_cover_distance, build_cycle_cover_enum, build_orientation,
    build_orientation_fvs, build_strong_density, build_two_pt_cover,
    build_weak_density, big_m_objective, combine,
    integral_witness_orientation_fvs, orientation_extension, solve_with_costs,
    stage_objectives, two_pseudotree_masks, wd_subgraph_row, weak_density_row,
    x_names, yf_name, y_name,
)
from fvslab.graph import (
    Graph, butterfly, complete, cycle_graph, enumerate_cycles, figure1,
    erdos_renyi, mask_of,
)
from fvslab.lp import (
    LpStatus, coordinate_range_over_optimal_face, is_minimal_point, is_vertex,
    optimal_face_is_point, solve, solve_lexicographic,
)
from fvslab.rational import Cost, ONE, Q, ZERO


def tree_graph():
    return Graph(4, ((0, 1), (1, 2), (1, 3)))


# weak / strong density -------------------------------------------------------

def test_wd_row_butterfly_full_set():
    g = butterfly()
    coeffs, rhs = weak_density_row(g, g.full_mask())
    assert coeffs == (Q(3), Q(1), Q(1), Q(1), Q(1))  # degrees 4,2,2,2,2
    assert rhs == Q(1)


def test_wd_row_k4_full_set():
    g = complete(4)
    coeffs, rhs = weak_density_row(g, g.full_mask())
    assert coeffs == (Q(2),) * 4 and rhs == Q(2)


def test_sd_k4_full_set_rhs():
    g = complete(4)
    lp = build_strong_density(g)
    rows = {(con.coeffs, con.rhs) for con in lp.constraints}
    assert ((Q(2),) * 4, Q(3)) in rows


def test_sd_single_edge_vacuous():
    g = Graph(2, ((0, 1),))
    lp = build_strong_density(g)
    assert lp.constraints == ()  # rhs 0 with all-zero row is dropped


def test_wd_forest_zero_feasible():
    lp = build_weak_density(tree_graph())
    assert lp.is_feasible((ZERO,) * 4)


def test_wd_cap():
    with pytest.raises(CapExceeded):
        build_weak_density(complete(6), cap=5)


def test_wd_butterfly_optimum_one_third():
    g = butterfly()
    sol = solve(build_weak_density(g))
    assert sol.objective == Q(1, 3)
    assert sol.values == (Q(1, 3), ZERO, ZERO, ZERO, ZERO)


def test_wd_subgraph_row_k5_minus_edge():
    g = complete(5)
    et = frozenset(range(g.m)) - {g.edge_id(0, 1)}
    coeffs, rhs = wd_subgraph_row(g, range(5), et)
    assert coeffs == (Q(3), Q(3), Q(4), Q(4), Q(4))
    assert rhs == Q(4)


def test_wd_subgraph_row_empty_edges():
    coeffs, rhs = wd_subgraph_row(complete(3), {0, 1}, ())
    assert rhs == Q(-2) and coeffs[0] == Q(-1)


def test_wd_subgraph_row_rejects_stray_edge():
    g = complete(4)
    with pytest.raises(Exception):
        wd_subgraph_row(g, {0, 1}, {g.edge_id(2, 3)})


# orientation ----------------------------------------------------------------

def test_orientation_shape_and_c3():
    g = cycle_graph(3)
    lp = build_orientation(g)
    assert lp.n_vars == g.n + 2 * g.m
    assert len(lp.constraints) == g.m + g.n
    sol = solve(lp)
    assert sol.objective == ZERO  # a triangle is already a pseudotree


def test_orientation_butterfly_value():
    sol = solve(build_orientation(butterfly()))
    assert sol.objective == Q(1, 3)


def test_orientation_single_edge():
    g = Graph(2, ((0, 1),))
    lp = build_orientation(g)
    point = {nm: ZERO for nm in lp.variables}
    point[y_name(0, 0)] = ONE
    assert lp.is_feasible(tuple(point[nm] for nm in lp.variables))


def test_orientation_extension_decides_projection():
    g = butterfly()
    assert orientation_extension(g, (Q(1, 3), ZERO, ZERO, ZERO, ZERO)) is not None
    assert orientation_extension(g, (ZERO,) * 5) is None
    assert orientation_extension(g, (ONE,) * 5) is not None


# cycle cover ----------------------------------------------------------------

def test_cycle_cover_enum_matches_cycles():
    g = complete(4)
    lp = build_cycle_cover_enum(g)
    assert len(lp.constraints) == len(enumerate_cycles(g))


def test_distance_projection_c3():
    # on a triangle the projection must force x1 + x2 + x3 >= 1
    g = cycle_graph(3)
    lp = build_cycle_cover_distance(g)
    sol = solve(lp)
    assert sol.objective == ONE
    # and the all-zero x does not extend
    zero_fixed = lp.with_extra_constraints(
        [type(lp.constraints[0])((ONE if i == v else ZERO
                                  for i in range(lp.n_vars)), "=", ZERO)
         for v in range(3)])
    assert solve(zero_fixed).status == LpStatus.INFEASIBLE


def test_distance_tree_no_constraints():
    lp = build_cycle_cover_distance(tree_graph())
    assert lp.n_vars == 4 and lp.constraints == ()


# 2-pseudotree cover ---------------------------------------------------------

def brute_two_pseudotrees(g):
    out = []
    for r in range(1, g.n + 1):
        for vs in itertools.combinations(range(g.n), r):
            from fvslab.graph import components_within, count_edges_within
            mask = mask_of(vs)
            if (count_edges_within(g, mask) >= len(vs) + 1
                    and len(components_within(g, mask)) == 1):
                out.append(mask)
    return sorted(out)


def test_two_pseudotree_masks_match_bruteforce():
    for g in [butterfly(), complete(4), complete(5), cycle_graph(5), figure1(3)]:
        assert sorted(two_pseudotree_masks(g)) == brute_two_pseudotrees(g)


def test_two_pt_cover_butterfly():
    lp = build_two_pt_cover(butterfly())
    # every 2-pseudotree of the butterfly spans all five vertices
    assert all(con.coeffs == (ONE,) * 5 for con in lp.constraints)


# orientation-fvs ------------------------------------------------------------

def test_orientation_fvs_shape():
    g = complete(4)
    lp = build_orientation_fvs(g)
    assert lp.n_vars == g.n + 2 * g.m * g.m
    assert len(lp.constraints) == g.m * g.m + g.n * g.m + g.m


def test_orientation_fvs_c3_value():
    sol = solve(build_orientation_fvs(cycle_graph(3)))
    assert sol.objective == ONE


def test_orientation_fvs_k4_bracket():
    sd = solve(build_strong_density(complete(4)))
    assert sd.objective == Q(3, 2)
    sol = solve(build_orientation_fvs(complete(4)))
    assert Q(3, 2) <= sol.objective <= Q(2)


@pytest.mark.parametrize("g,fvs", [
    (cycle_graph(3), {0}),
    (butterfly(), {0}),
    (complete(4), {0, 1}),
    (tree_graph(), set()),
])
def test_integral_witness_feasible(g, fvs):
    lp = build_orientation_fvs(g)
    for f in range(g.m):
        assign = integral_witness_orientation_fvs(g, fvs, f)
        point = []
        for nm in lp.variables:
            if nm.startswith("x("):
                v = int(nm[2:-1])
                point.append(ONE if v in fvs else ZERO)
            elif nm.startswith(f"yf({f},"):
                point.append(assign[nm])
            else:
                point.append(None)
        # check only block f's rows plus the shared x rows
        for con in lp.constraints:
            if any(c != 0 and val is None for c, val in zip(con.coeffs, point)):
                continue
            lhs = sum((c * val for c, val in zip(con.coeffs, point) if c != 0), ZERO)
            assert (lhs >= con.rhs if con.rel == ">=" else lhs <= con.rhs), \
                f"violated {con} at f={f}"


def test_integral_witness_disconnected():
    # triangle plus a disjoint edge: the witness doubles a tree edge
    g = Graph(5, ((0, 1), (0, 2), (1, 2), (3, 4)))
    lp = build_orientation_fvs(g)
    assign = integral_witness_orientation_fvs(g, {0}, 2)
    full = integral_witness_orientation_fvs(g, {0}, 0)
    assert assign and full


def test_integral_witness_rejects_bad_fvs():
    with pytest.raises(Exception):
        integral_witness_orientation_fvs(complete(4), {0}, 0)


# combine / costs ------------------------------------------------------------

def test_combine_shares_x_variables():
    g = complete(4)
    both = combine(build_weak_density(g), build_cycle_cover_enum(g))
    assert both.variables[: g.n] == x_names(g.n)
    sol = solve(both)
    assert sol.objective == Q(4, 3)
    assert sol.values[: 4] == (Q(1, 3),) * 4


def test_stage_objectives_infinite_costs():
    g = figure1(4)
    lp = build_orientation(g)
    stages = stage_objectives(lp, g.costs)
    assert len(stages) == 2
    # first stage: indicator of the three infinite-cost vertices
    assert sum(1 for c in stages[0] if c == ONE) == 3


def test_solve_with_costs_matches_big_m_on_figure1():
    g = figure1(4)
    lp = build_orientation(g)
    lex = solve_with_costs(lp, g, g.costs)
    assert not lex.value.is_infinite
    big = solve(lp.with_objective(big_m_objective(lp, g.costs)))
    finite_obj = lp.objective
    big_finite = sum((c * v for c, v in zip(finite_obj, big.values)), ZERO)
    assert lex.value.value == big_finite
    # infinite vertices carry no mass in either run
    for v in (4, 5, 6):
        assert lex.x[v] == ZERO and big.values[v] == ZERO


def test_solve_with_costs_minimal_certified():
    g = butterfly()
    lp = build_orientation(g)
    out = solve_with_costs(lp, g, g.costs, minimal=True)
    assert is_minimal_point(lp, out.solution.values)
    assert is_vertex(lp, out.solution.values)
    assert out.value.value == Q(1, 3)
    assert max(out.x) == Q(1, 3)
