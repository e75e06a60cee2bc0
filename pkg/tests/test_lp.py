import random

import pytest
from hypothesis import given, settings, strategies as st

from fvslab.lp import (
    Constraint, EQ, GE, LE, LinearProgram, LpError, LpStatus,
    coordinate_range_over_optimal_face, enumerate_vertices, is_minimal_point,
    is_vertex, optimal_face_is_point, solve, solve_lexicographic, tight_sets,
)
from fvslab.rational import Q


def lp_of(names, objective, rows, nonneg=None):
    cons = tuple(Constraint(tuple(c), rel, rhs) for c, rel, rhs in rows)
    return LinearProgram(tuple(names), tuple(objective), cons,
                         tuple(nonneg) if nonneg else ())


def test_one_variable():
    lp = lp_of(["x"], [1], [([1], GE, Q(1, 3))])
    sol = solve(lp)
    assert sol.status == LpStatus.OPTIMAL
    assert sol.values == (Q(1, 3),)
    assert sol.objective == Q(1, 3)


def test_infeasible():
    lp = lp_of(["x"], [1], [([1], GE, 1), ([1], LE, 0)])
    assert solve(lp).status == LpStatus.INFEASIBLE


def test_unbounded():
    lp = lp_of(["x"], [-1], [([1], GE, 0)])
    assert solve(lp).status == LpStatus.UNBOUNDED


def test_equality_and_exact_values():
    # x + y = 1, x - y >= 1/3, min y -> y = 0? no: x-y>=1/3 with x=1-y: 1-2y>=1/3 -> y<=1/3
    lp = lp_of(["x", "y"], [0, 1], [([1, 1], EQ, 1), ([1, -1], GE, Q(1, 3))])
    sol = solve(lp)
    assert sol.values == (Q(1), Q(0))
    lp_max = lp.with_objective((0, -1))
    sol = solve(lp_max)
    assert sol.values == (Q(2, 3), Q(1, 3))


def test_free_variable():
    lp = lp_of(["x"], [1], [([1], GE, -5)], nonneg=[False])
    sol = solve(lp)
    assert sol.values == (Q(-5),)


def test_beale_cycling_example_terminates():
    # classic degenerate-cycling instance; optimum -1/20
    lp = lp_of(
        ["x1", "x2", "x3", "x4"],
        [Q(-3, 4), 150, Q(-1, 50), 6],
        [
            ([Q(1, 4), -60, Q(-1, 25), 9], LE, 0),
            ([Q(1, 2), -90, Q(-1, 50), 3], LE, 0),
            ([0, 0, 1, 0], LE, 1),
        ],
    )
    sol = solve(lp)
    assert sol.status == LpStatus.OPTIMAL
    assert sol.objective == Q(-1, 20)


def test_kuhn_degenerate_example_terminates():
    lp = lp_of(
        ["x1", "x2", "x3", "x4"],
        [-2, -3, 1, 12],
        [
            ([-2, -9, 1, 9], LE, 0),
            ([Q(1, 3), 1, Q(-1, 3), -2], LE, 0),
        ],
    )
    sol = solve(lp)
    assert sol.status == LpStatus.UNBOUNDED


def test_determinism_bytes():
    lp = lp_of(["x", "y"], [1, 2], [([1, 1], GE, 1), ([2, 1], GE, Q(3, 2))])
    a, b = solve(lp), solve(lp)
    assert a.to_json(lp) == b.to_json(lp)


def test_solution_satisfies_constraints_exactly():
    lp = lp_of(["x", "y", "z"], [1, 1, 1],
               [([1, 2, 3], GE, Q(7, 3)), ([3, 1, 1], GE, Q(5, 7)),
                ([1, 1, 1], LE, 100)])
    sol = solve(lp)
    assert lp.is_feasible(sol.values)
    cons, bounds = tight_sets(lp, sol.values)
    assert (cons, bounds) == (sol.tight_constraints, sol.tight_bounds)


# lexicographic -------------------------------------------------------------

def test_lexicographic_single_objective_matches_solve():
    lp = lp_of(["x", "y"], [1, 1], [([1, 1], GE, 1)])
    assert solve_lexicographic(lp, [lp.objective]).values == solve(lp).values


def test_lexicographic_priorities():
    # min x first, then min y over {x + y >= 1, x <= 1/2}: forced to (0, 1)
    lp = lp_of(["x", "y"], [1, 0], [([1, 1], GE, 1), ([1, 0], LE, Q(1, 2))])
    sol = solve_lexicographic(lp, [(1, 0), (0, 1)])
    assert sol.values == (Q(0), Q(1))


def test_lexicographic_result_is_vertex_of_original():
    lp = lp_of(["x", "y", "z"], [1, 1, 0],
               [([1, 1, 0], GE, 1), ([0, 1, 1], GE, 1), ([1, 1, 1], LE, 3)])
    sol = solve_lexicographic(lp, [(1, 1, 0), (1, 1, 1)])
    assert is_vertex(lp, sol.values)


# certification -------------------------------------------------------------

def unit_square():
    return lp_of(["x", "y"], [0, 0],
                 [([1, 0], LE, 1), ([0, 1], LE, 1)])


def test_is_vertex_square():
    sq = unit_square()
    assert is_vertex(sq, (Q(1), Q(1)))
    assert is_vertex(sq, (Q(0), Q(0)))
    assert not is_vertex(sq, (Q(1, 2), Q(1)))  # midpoint of an edge
    with pytest.raises(LpError):
        is_vertex(sq, (Q(2), Q(0)))


def test_is_minimal_point():
    # x = 1 in {x >= 0}: decreasing is fine, not minimal
    lp0 = lp_of(["x"], [1], [])
    assert not is_minimal_point(lp0, (Q(1),))
    assert is_minimal_point(lp0, (Q(0),))
    # any vertex of {x >= 1} at x = 1 is minimal
    lp1 = lp_of(["x"], [1], [([1], GE, 1)])
    assert is_minimal_point(lp1, (Q(1),))
    # slack coordinate blocked by nothing
    lp2 = lp_of(["x", "y"], [1, 1], [([1, 0], GE, 1)])
    assert not is_minimal_point(lp2, (Q(1), Q(1, 2)))
    assert is_minimal_point(lp2, (Q(1), Q(0)))


def test_coordinate_range_unique_vs_segment():
    # optimal face of min x+y over x+y>=1 in the square is a segment
    lp = lp_of(["x", "y"], [1, 1],
               [([1, 1], GE, 1), ([1, 0], LE, 1), ([0, 1], LE, 1)])
    lo, hi = coordinate_range_over_optimal_face(lp, "x")
    assert (lo, hi) == (Q(0), Q(1))
    assert not optimal_face_is_point(lp)
    # unique optimum
    lp2 = lp_of(["x", "y"], [1, 2], [([1, 1], GE, 1)])
    assert optimal_face_is_point(lp2)


def test_enumerate_vertices_square():
    sq = unit_square()
    vs = enumerate_vertices(sq)
    assert vs == [(Q(0), Q(0)), (Q(0), Q(1)), (Q(1), Q(0)), (Q(1), Q(1))]


# randomised cross-check against vertex enumeration -------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_solve_matches_vertex_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    names = [f"v{i}" for i in range(n)]
    rows = []
    for _ in range(rng.randint(1, 4)):
        coeffs = [Q(rng.randint(-3, 3)) for _ in range(n)]
        rows.append((coeffs, GE, Q(rng.randint(-2, 4))))
    # box to keep the region bounded so every optimum sits at a vertex
    for j in range(n):
        unit = [Q(0)] * n
        unit[j] = Q(1)
        rows.append((unit, LE, Q(5)))
    objective = [Q(rng.randint(-4, 4)) for _ in range(n)]
    lp = lp_of(names, objective, rows)
    sol = solve(lp)
    vertices = enumerate_vertices(lp)
    if sol.status == LpStatus.INFEASIBLE:
        assert vertices == []
        return
    assert sol.status == LpStatus.OPTIMAL
    assert is_vertex(lp, sol.values)
    best = min(sum((c * x for c, x in zip(lp.objective, v)), Q(0)) for v in vertices)
    assert sol.objective == best


def test_dump_format():
    lp = lp_of(["x(0)", "y(1,0)"], [1, 0], [([Q(2, 3), -1], GE, Q(1, 3))])
    text = lp.dump()
    assert "2/3*x(0) + -1*y(1,0) >= 1/3" in text
