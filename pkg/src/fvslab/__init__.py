"""fvslab: exact-rational polyhedral laboratory for FVS and PFDS."""

from .rational import Cost, Q, Rational, ZERO, ONE, rat
from .graph import (
    Cycle,
    Graph,
    GraphError,
    butterfly,
    complete,
    cyclic_edges,
    enumerate_cycles,
    figure1,
    find_semi_disjoint_cycle,
    generate,
    induced_subgraph,
    is_acyclic,
    is_pseudoforest,
    parse_graph,
    format_graph,
    prune_degree_one,
    pseudoforest_fvs,
)
from .lp import (
    Constraint,
    LinearProgram,
    LpSolution,
    LpStatus,
    coordinate_range_over_optimal_face,
    is_minimal_point,
    is_vertex,
    solve,
    solve_lexicographic,
)

__version__ = "0.1.0"
