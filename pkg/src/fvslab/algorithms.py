"""Approximation algorithms with verifiable certificates, plus the exact
brute-force oracles they are measured against.

The primal-dual scheme raises one dual variable per iteration: on the whole
residual vertex set (coefficients d_S(u) - 1, objective contribution
b(S) = |E[S]| - |S|), or on a semi-disjoint cycle (coefficients 1, objective
contribution 1).  Every raise, the tight vertex it produced, and the
reverse-delete decisions are recorded so the 2-approximation inequality can
be re-derived from scratch by verify_certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .caps import Caps, check_cap
from .formulations import build_orientation, solve_with_costs
from .graph import (
    Cycle,
    Graph,
    components_within,
    count_edges_within,
    degree_within,
    find_semi_disjoint_cycle,
    has_cycle_within,
    induced_subgraph,
    is_acyclic_within,
    is_pseudoforest_within,
    mask_of,
    prune_low_degree,
    surplus,
    vertices_of,
)
from .lp import LpStatus
from .rational import Cost, ONE, Q, ZERO, format_rational, sum_costs


class NoFiniteSolution(ValueError):
    """The infinite-cost vertices alone already contain forbidden structure."""


class AlgorithmInvariantError(AssertionError):
    pass


class CounterexampleFound(RuntimeError):
    """A certified minimal extreme point with all x below 1/3; would refute
    the extreme-point theorem for the orientation polyhedron."""

    def __init__(self, g: Graph, x):
        super().__init__("minimal extreme point with max x < 1/3")
        self.graph = g
        self.x = x


# ---------------------------------------------------------------------------
# Brute force (ground truth)
# ---------------------------------------------------------------------------

def _acyclic_table(g: Graph) -> list[bool]:
    """acyclic[mask] for every induced subgraph, by single leaf stripping."""
    size = 1 << g.n
    table = [False] * size
    table[0] = True
    adj = g.adj_mask
    for mask in range(1, size):
        m = mask
        leaf_bit = 0
        while m:
            bit = m & -m
            v = bit.bit_length() - 1
            if bin(adj[v] & mask).count("1") <= 1:
                leaf_bit = bit
                break
            m &= m - 1
        table[mask] = bool(leaf_bit) and table[mask ^ leaf_bit]
    return table


def brute_force(g: Graph, costs: Optional[Sequence[Cost]] = None,
                problem: str = "fvs", *, caps: Caps = Caps(),
                ) -> Optional[tuple[frozenset[int], Cost]]:
    """Exact optimum by subset enumeration over the finite-cost vertices.

    problem: "fvs" (deletion leaves an acyclic graph), "pfds" (leaves a
    pseudoforest), or "mc2pt" (minimum-weight subset inducing a connected
    graph with |E| >= |V| + 1).  Returns None when no finite-cost solution
    exists.
    """
    costs = g.costs if costs is None else tuple(costs)
    if problem == "mc2pt":
        check_cap("brute-force mc2pt", g.n, caps.brute_mc2pt)
        best = None
        for mask in range(1, 1 << g.n):
            size = bin(mask).count("1")
            if count_edges_within(g, mask) < size + 1:
                continue
            if len(components_within(g, mask)) != 1:
                continue
            weight = sum_costs(costs[v] for v in vertices_of(mask))
            if best is None or weight < best[1]:
                best = (frozenset(vertices_of(mask)), weight)
        return best
    if problem not in ("fvs", "pfds"):
        raise ValueError(f"unknown problem {problem!r}")
    deletable = [v for v in range(g.n) if not costs[v].is_infinite]
    check_cap("brute-force search", len(deletable), caps.brute_force)
    full = g.full_mask()
    use_table = problem == "fvs" and g.n <= 14
    table = _acyclic_table(g) if use_table else None

    def feasible(kept: int) -> bool:
        if problem == "fvs":
            return table[kept] if use_table else is_acyclic_within(g, kept)
        return is_pseudoforest_within(g, kept)

    best_mask = None
    best_cost = None
    k = len(deletable)
    for sub in range(1 << k):
        removed = 0
        cost = ZERO
        s = sub
        while s:
            i = (s & -s).bit_length() - 1
            removed |= 1 << deletable[i]
            cost += costs[deletable[i]].value
            s &= s - 1
        if best_cost is not None and cost >= best_cost:
            continue
        if feasible(full ^ removed):
            best_mask = removed
            best_cost = cost
    if best_mask is None:
        return None
    return frozenset(vertices_of(best_mask)), Cost(best_cost)


# ---------------------------------------------------------------------------
# Primal-dual 2-approximation for FVS
# ---------------------------------------------------------------------------

WHOLE_RESIDUAL = "whole-residual"
SEMI_DISJOINT = "semi-disjoint-cycle"


@dataclass(frozen=True)
class DualRaise:
    kind: str                       # WHOLE_RESIDUAL | SEMI_DISJOINT
    vertices: frozenset[int]        # S_i
    cycle: Optional[Cycle]          # set for semi-disjoint raises
    amount: object                  # epsilon_i
    chosen: int                     # vertex whose dual constraint went tight

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "set": sorted(self.vertices),
            "epsilon": format_rational(self.amount),
            "chosen": self.chosen,
        }


@dataclass(frozen=True)
class DualCertificate:
    raises: tuple[DualRaise, ...]

    def y_sets(self) -> dict[frozenset[int], object]:
        agg: dict[frozenset[int], object] = {}
        for r in self.raises:
            if r.kind == WHOLE_RESIDUAL:
                agg[r.vertices] = agg.get(r.vertices, ZERO) + r.amount
        return agg

    def z_cycles(self) -> dict[Cycle, object]:
        agg: dict[Cycle, object] = {}
        for r in self.raises:
            if r.kind == SEMI_DISJOINT:
                agg[r.cycle] = agg.get(r.cycle, ZERO) + r.amount
        return agg

    def dual_value(self, g: Graph):
        total = ZERO
        for s, y in self.y_sets().items():
            total += Q(surplus(g, mask_of(s))) * y
        for z in self.z_cycles().values():
            total += z
        return total

    def load(self, g: Graph, v: int):
        """Left-hand side of v's dual constraint, recomputed from the graph."""
        total = ZERO
        for r in self.raises:
            if v not in r.vertices:
                continue
            if r.kind == SEMI_DISJOINT:
                total += r.amount
            else:
                coeff = degree_within(g, v, mask_of(r.vertices)) - 1
                total += Q(coeff) * r.amount
        return total


@dataclass(frozen=True)
class PrimalDualResult:
    fvs: frozenset[int]
    order: tuple[int, ...]              # vertices in selection order
    kept: tuple[bool, ...]              # reverse-delete decision per position
    certificate: DualCertificate
    primal_cost: object
    dual_value: object

    def trace_json(self) -> str:
        lines = [json.dumps(r.to_json(), sort_keys=True) for r in self.certificate.raises]
        lines.append(json.dumps({
            "reverse_delete_kept": list(self.kept),
            "fvs": sorted(self.fvs),
        }, sort_keys=True))
        return "\n".join(lines)


def primal_dual_fvs(g: Graph, costs: Optional[Sequence[Cost]] = None) -> PrimalDualResult:
    """The primal-dual scheme: prune degree-<=1 vertices, raise the dual of a
    semi-disjoint cycle when one exists (else of the whole residual set)
    until some vertex goes tight, select it, and finish with reverse delete.
    """
    costs = g.costs if costs is None else tuple(costs)
    infinite_mask = mask_of(v for v in range(g.n) if costs[v].is_infinite)
    if has_cycle_within(g, infinite_mask):
        raise NoFiniteSolution("a cycle consists entirely of infinite-cost vertices")

    alive = g.full_mask()
    load = [ZERO] * g.n
    raises: list[DualRaise] = []
    order: list[int] = []
    while has_cycle_within(g, alive):
        alive = prune_low_degree(g, alive)
        found = find_semi_disjoint_cycle(g, alive)
        if found is not None:
            cyc, _pivot = found
            kind = SEMI_DISJOINT
            members = cyc.vertices
            coeff = {v: 1 for v in members}
        else:
            cyc = None
            kind = WHOLE_RESIDUAL
            members = vertices_of(alive)
            coeff = {v: degree_within(g, v, alive) - 1 for v in members}
            if any(c < 1 for c in coeff.values()):
                raise AlgorithmInvariantError(
                    "residual vertex of degree < 2 after pruning")
        eps = None
        for v in members:
            if costs[v].is_infinite:
                continue
            slack = (costs[v].value - load[v]) / Q(coeff[v])
            if eps is None or slack < eps:
                eps = slack
        if eps is None:
            raise NoFiniteSolution("dual raise blocked: no finite-cost vertex in the set")
        chosen = None
        for v in members:
            load[v] += Q(coeff[v]) * eps
            if (chosen is None and not costs[v].is_infinite
                    and load[v] == costs[v].value):
                chosen = v
        if chosen is None:
            raise AlgorithmInvariantError("no vertex went tight")
        raises.append(DualRaise(kind, frozenset(members), cyc, eps, chosen))
        order.append(chosen)
        alive &= ~(1 << chosen)

    # reverse delete on the original graph
    fvs = set(order)
    kept = [True] * len(order)
    full = g.full_mask()
    for pos in range(len(order) - 1, -1, -1):
        v = order[pos]
        trial = fvs - {v}
        if is_acyclic_within(g, full & ~mask_of(trial)):
            fvs = trial
            kept[pos] = False

    certificate = DualCertificate(tuple(raises))
    primal = sum((costs[v].value for v in fvs), ZERO)
    return PrimalDualResult(frozenset(fvs), tuple(order), tuple(kept),
                            certificate, primal, certificate.dual_value(g))


@dataclass
class CertificateReport:
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks[name] = self.checks.get(name, True) and passed
        if not passed:
            self.failures.append(f"{name}: {detail}" if detail else name)


def verify_certificate(g: Graph, costs: Optional[Sequence[Cost]],
                       result: PrimalDualResult, *, strict: bool = True
                       ) -> CertificateReport:
    """Re-derive every guarantee from scratch: dual feasibility (with
    equality at each selected vertex), per-iteration minimality of
    F_{>=i} in G[S_i], the degree-sum bound on whole-residual sets, and
    primal <= 2 * dual."""
    costs = g.costs if costs is None else tuple(costs)
    cert = result.certificate
    report = CertificateReport()

    for v in range(g.n):
        lhs = cert.load(g, v)
        if costs[v].is_infinite:
            continue
        report.record("dual-feasibility", lhs <= costs[v].value,
                      f"vertex {v}: load {lhs} > cost {costs[v]}")
    for v in result.order:
        lhs = cert.load(g, v)
        report.record("tightness-of-selected", lhs == costs[v].value,
                      f"vertex {v}: load {lhs} != cost {costs[v]}")

    full = g.full_mask()
    report.record("fvs-feasible", is_acyclic_within(g, full & ~mask_of(result.fvs)))

    for i, r in enumerate(cert.raises):
        smask = mask_of(r.vertices)
        later = frozenset(result.order[i:]) & result.fvs
        inside = later & r.vertices
        rest = smask & ~mask_of(inside)
        report.record("iteration-fvs-feasible", is_acyclic_within(g, rest),
                      f"iteration {i}")
        for v in inside:
            back = smask & ~mask_of(inside - {v})
            report.record("iteration-fvs-minimal",
                          has_cycle_within(g, back),
                          f"iteration {i}: {v} removable")
        if r.kind == WHOLE_RESIDUAL:
            lhs = sum(degree_within(g, v, smask) - 1 for v in result.fvs & r.vertices)
            report.record("degree-sum-bound", Q(lhs) <= 2 * Q(surplus(g, smask)),
                          f"iteration {i}: {lhs} > 2*b(S)")

    report.record("factor-two", result.primal_cost <= 2 * result.dual_value,
                  f"{result.primal_cost} > 2 * {result.dual_value}")
    report.record("primal-cost-consistent",
                  result.primal_cost == sum((costs[v].value for v in result.fvs), ZERO))
    if strict and not report.ok:
        raise AlgorithmInvariantError("; ".join(report.failures))
    return report


# ---------------------------------------------------------------------------
# Iterative rounding for PFDS via the orientation LP
# ---------------------------------------------------------------------------

THIRD = Q(1, 3)


@dataclass(frozen=True)
class IterativeRoundingResult:
    deleted: frozenset[int]
    first_lp_value: object          # orientation LP optimum of the original instance
    rounds: tuple[tuple[int, object], ...]  # (vertex, its x value) per round
    cost: object


def iterative_rounding_pfds(g: Graph, costs: Optional[Sequence[Cost]] = None
                            ) -> IterativeRoundingResult:
    """Repeat: solve the orientation LP to a certified minimal vertex, pick a
    vertex with x >= 1/3 (the maximum, ties to the lowest index), delete it.
    The extreme-point theorem guarantees such a vertex exists; if it ever
    does not, that is a counterexample and is reported as such."""
    costs = g.costs if costs is None else tuple(costs)
    infinite_mask = mask_of(v for v in range(g.n) if costs[v].is_infinite)
    if not is_pseudoforest_within(g, infinite_mask):
        raise NoFiniteSolution("infinite-cost vertices alone are not a pseudoforest")

    alive = list(range(g.n))
    deleted: list[int] = []
    rounds: list[tuple[int, object]] = []
    first_value = ZERO
    first_round = True
    while True:
        sub, old_of_new = induced_subgraph(g, alive)
        if is_pseudoforest_within(sub, sub.full_mask()):
            break
        sub_costs = sub.costs
        lp = build_orientation(sub, sub_costs)
        outcome = solve_with_costs(lp, sub, sub_costs, minimal=True)
        if outcome.status != LpStatus.OPTIMAL:  # pragma: no cover
            raise AlgorithmInvariantError(f"orientation LP {outcome.status}")
        if first_round:
            if outcome.value.is_infinite:  # pragma: no cover - guarded above
                raise NoFiniteSolution("orientation LP needs infinite-cost mass")
            first_value = outcome.value.value
            first_round = False
        pick_new = None
        for j in range(sub.n):
            if outcome.x[j] >= THIRD:
                if pick_new is None or outcome.x[j] > outcome.x[pick_new]:
                    pick_new = j
        if pick_new is None:
            raise CounterexampleFound(sub, outcome.x)
        v = old_of_new[pick_new]
        if costs[v].is_infinite:  # pragma: no cover - zero inf-mass argument
            raise AlgorithmInvariantError("picked an undeletable vertex")
        rounds.append((v, outcome.x[pick_new]))
        deleted.append(v)
        alive = [u for u in alive if u != v]
    cost = sum((costs[v].value for v in deleted), ZERO)
    return IterativeRoundingResult(frozenset(deleted), first_value,
                                   tuple(rounds), cost)
