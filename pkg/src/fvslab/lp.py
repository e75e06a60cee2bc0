"""Exact rational linear programming.

A two-phase primal simplex over exact rationals, returning basic feasible
(vertex) optima, plus the certification utilities used for every
extreme-point claim: vertex tests by tight-row rank, minimality tests,
coordinate ranges over the optimal face, and brute-force vertex enumeration
for tiny systems.

Determinism: identical inputs produce identical solutions (pivot choices are
fully tie-broken).  Anti-cycling is by Bland's rule: the solver pivots with
Dantzig's rule for speed and switches to Bland's rule during degenerate
stalls, which preserves finite termination.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .rational import ONE, Q, ZERO, format_rational

_QTYPE = type(Q(0))

GE = ">="
LE = "<="
EQ = "="
_RELS = (GE, LE, EQ)


class LpError(ValueError):
    pass


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _q(x) -> "Q":
    return x if isinstance(x, _QTYPE) else Q(x)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    rel: str
    rhs: object

    def __post_init__(self):
        if self.rel not in _RELS:
            raise LpError(f"bad relation {self.rel!r}")
        object.__setattr__(self, "coeffs", tuple(_q(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", _q(self.rhs))

    def evaluate(self, values: Sequence) -> "Q":
        return sum((c * v for c, v in zip(self.coeffs, values)), ZERO)

    def satisfied_by(self, values: Sequence) -> bool:
        lhs = self.evaluate(values)
        if self.rel == GE:
            return lhs >= self.rhs
        if self.rel == LE:
            return lhs <= self.rhs
        return lhs == self.rhs

    def tight_at(self, values: Sequence) -> bool:
        return self.evaluate(values) == self.rhs


@dataclass(frozen=True)
class LinearProgram:
    """min objective . x subject to the constraints (all data exact)."""

    variables: tuple[str, ...]
    objective: tuple
    constraints: tuple[Constraint, ...]
    nonnegative: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        nv = len(self.variables)
        if len(set(self.variables)) != nv:
            raise LpError("duplicate variable names")
        object.__setattr__(self, "objective", tuple(_q(c) for c in self.objective))
        if len(self.objective) != nv:
            raise LpError("objective length mismatch")
        if not self.nonnegative:
            object.__setattr__(self, "nonnegative", (True,) * nv)
        if len(self.nonnegative) != nv:
            raise LpError("nonnegative flags length mismatch")
        for con in self.constraints:
            if len(con.coeffs) != nv:
                raise LpError("constraint row length mismatch")

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def index_of(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise LpError(f"no variable named {name!r}")

    def with_objective(self, objective: Sequence) -> "LinearProgram":
        return LinearProgram(self.variables, tuple(objective), self.constraints,
                             self.nonnegative)

    def with_extra_constraints(self, extra: Iterable[Constraint]) -> "LinearProgram":
        return LinearProgram(self.variables, self.objective,
                             self.constraints + tuple(extra), self.nonnegative)

    def violated_by(self, values: Sequence) -> list[int]:
        bad = [i for i, con in enumerate(self.constraints)
               if not con.satisfied_by(values)]
        bad += [len(self.constraints) + j for j in range(self.n_vars)
                if self.nonnegative[j] and values[j] < 0]
        return bad

    def is_feasible(self, values: Sequence) -> bool:
        return not self.violated_by(values)

    def dump(self) -> str:
        """One constraint per line, exact fractions."""
        lines = ["min: " + _row_str(self.objective, self.variables)]
        for con in self.constraints:
            lines.append(f"{_row_str(con.coeffs, self.variables)} {con.rel} {con.rhs}")
        for j, flag in enumerate(self.nonnegative):
            if flag:
                lines.append(f"1*{self.variables[j]} >= 0")
        return "\n".join(lines) + "\n"


def _row_str(coeffs, names) -> str:
    terms = [f"{c}*{v}" for c, v in zip(coeffs, names) if c != 0]
    return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: Optional[tuple] = None
    objective: Optional[object] = None
    tight_constraints: tuple[int, ...] = ()
    tight_bounds: tuple[int, ...] = ()

    def value_map(self, lp: LinearProgram) -> dict[str, object]:
        return dict(zip(lp.variables, self.values))

    def to_json(self, lp: Optional[LinearProgram] = None) -> str:
        payload: dict = {"status": self.status.value}
        if self.values is not None:
            vals = [format_rational(v) for v in self.values]
            if lp is not None:
                payload["values"] = dict(zip(lp.variables, vals))
            else:
                payload["values"] = vals
            payload["objective"] = format_rational(self.objective)
            payload["tight_constraints"] = list(self.tight_constraints)
            payload["tight_bounds"] = list(self.tight_bounds)
        return json.dumps(payload, sort_keys=True)


def tight_sets(lp: LinearProgram, values: Sequence) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Constraint indices and nonnegativity-bound variable indices satisfied
    with equality at the point."""
    cons = tuple(i for i, con in enumerate(lp.constraints) if con.tight_at(values))
    bounds = tuple(j for j in range(lp.n_vars)
                   if lp.nonnegative[j] and values[j] == 0)
    return cons, bounds


# ---------------------------------------------------------------------------
# Simplex core
# ---------------------------------------------------------------------------

_STALL_LIMIT = 30
_MAX_PIVOTS = 2_000_000


class _Tableau:
    """Dense rational tableau in equality standard form, all vars >= 0."""

    def __init__(self, n_vars: int, rows: list[tuple[list, str, object]]):
        self.n_struct = n_vars
        slack_count = sum(1 for _, rel, _ in rows if rel != EQ)
        self.art_start = n_vars + slack_count
        total = self.art_start
        tab: list[list] = []
        basis: list[int] = []
        slack_at = n_vars
        art_cols: list[int] = []
        pending: list[tuple[list, Optional[int]]] = []
        for coeffs, rel, rhs in rows:
            coeffs = list(coeffs)
            if rhs < 0:
                coeffs = [-c for c in coeffs]
                rhs = -rhs
                rel = {GE: LE, LE: GE, EQ: EQ}[rel]
            row = coeffs + [ZERO] * slack_count
            basic: Optional[int] = None
            if rel == LE:
                row[slack_at] = ONE
                basic = slack_at
                slack_at += 1
            elif rel == GE:
                row[slack_at] = -ONE
                slack_at += 1
            pending.append((row + [rhs], basic))
        for row, basic in pending:
            if basic is None:
                rhs = row.pop()
                row.extend([ZERO] * len(art_cols))
                col = total + len(art_cols)
                art_cols.append(col)
                row.append(ONE)
                row.append(rhs)
                basic = col
            tab.append(row)
            basis.append(basic)
        total += len(art_cols)
        for i, row in enumerate(tab):
            rhs = row.pop()
            row.extend([ZERO] * (total + 1 - len(row) - 1))
            row.append(rhs)
        self.tab = tab
        self.basis = basis
        self.total = total

    def pivot(self, i: int, j: int, zrow: Optional[list]) -> "Q":
        tab = self.tab
        prow = tab[i]
        pv = prow[j]
        if pv != 1:
            inv = ONE / pv
            tab[i] = prow = [a * inv for a in prow]
        # structured LPs keep the tableau sparse; touch only pivot-row nonzeros
        nz = [(k, b) for k, b in enumerate(prow) if b != 0]
        for r, row in enumerate(tab):
            if r != i:
                f = row[j]
                if f != 0:
                    for k, b in nz:
                        row[k] -= f * b
        step = prow[-1]
        delta = ZERO
        if zrow is not None:
            f = zrow[j]
            if f != 0:
                delta = f * step
                last = len(prow) - 1
                for k, b in nz:
                    if k != last:
                        zrow[k] -= f * b
        self.basis[i] = j
        return delta

    def run(self, cost: list) -> LpStatus:
        """Minimise cost over the current basis; returns OPTIMAL/UNBOUNDED."""
        tab = self.tab
        basis = self.basis
        zrow = list(cost)
        for i, b in enumerate(basis):
            cb = cost[b]
            if cb != 0:
                row = tab[i]
                zrow = [a - cb * c for a, c in zip(zrow, row[:-1])]
        self.objective = sum((cost[b] * tab[i][-1] for i, b in enumerate(basis)),
                             ZERO)
        bland = False
        stall = 0
        for _ in range(_MAX_PIVOTS):
            enter = -1
            if bland:
                for j in range(self.total):
                    if zrow[j] < 0:
                        enter = j
                        break
            else:
                best = ZERO
                for j in range(self.total):
                    zj = zrow[j]
                    if zj < best:
                        best = zj
                        enter = j
            if enter < 0:
                return LpStatus.OPTIMAL
            leave = -1
            best_ratio = None
            for i, row in enumerate(tab):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if (best_ratio is None or ratio < best_ratio
                            or (ratio == best_ratio and basis[i] < basis[leave])):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                return LpStatus.UNBOUNDED
            delta = self.pivot(leave, enter, zrow)
            self.objective += delta
            if delta == 0:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False
        raise LpError("simplex pivot limit exceeded")  # pragma: no cover

    def drop_artificials(self) -> None:
        art_start = self.art_start
        keep_rows = []
        for i in range(len(self.tab)):
            if self.basis[i] >= art_start:
                pivot_col = -1
                for j in range(art_start):
                    if self.tab[i][j] != 0:
                        pivot_col = j
                        break
                if pivot_col < 0:
                    continue  # redundant row
                self.pivot(i, pivot_col, None)
            keep_rows.append(i)
        self.tab = [self.tab[i][:art_start] + [self.tab[i][-1]] for i in keep_rows]
        self.basis = [self.basis[i] for i in keep_rows]
        self.total = art_start

    def values(self, n: int) -> list:
        out = [ZERO] * self.total
        for i, b in enumerate(self.basis):
            out[b] = self.tab[i][-1]
        return out[:n]


def _solve_standard(n_vars: int, rows: list[tuple[list, str, object]],
                    cost: list) -> tuple[LpStatus, Optional[list]]:
    t = _Tableau(n_vars, rows)
    if t.total > t.art_start:  # phase 1 needed
        phase1 = [ZERO] * t.art_start + [ONE] * (t.total - t.art_start)
        status = t.run(phase1)
        if status != LpStatus.OPTIMAL:  # pragma: no cover - phase 1 is bounded
            raise LpError("phase 1 did not terminate optimally")
        if t.objective != 0:
            return LpStatus.INFEASIBLE, None
        t.drop_artificials()
    status = t.run(cost + [ZERO] * (t.total - len(cost)))
    if status == LpStatus.UNBOUNDED:
        return status, None
    return LpStatus.OPTIMAL, t.values(n_vars)


def _split_free(lp: LinearProgram):
    """Map to an all-nonnegative system; free x becomes x+ - x-."""
    free = [j for j in range(lp.n_vars) if not lp.nonnegative[j]]
    if not free:
        rows = [(list(con.coeffs), con.rel, con.rhs) for con in lp.constraints]
        return lp.n_vars, rows, list(lp.objective), None
    ext = len(free)
    pos_of = {j: lp.n_vars + k for k, j in enumerate(free)}
    rows = []
    for con in lp.constraints:
        row = list(con.coeffs) + [ZERO] * ext
        for j in free:
            row[pos_of[j]] = -con.coeffs[j]
        rows.append((row, con.rel, con.rhs))
    cost = list(lp.objective) + [ZERO] * ext
    for j in free:
        cost[pos_of[j]] = -lp.objective[j]
    return lp.n_vars + ext, rows, cost, (free, pos_of)


def solve(lp: LinearProgram) -> LpSolution:
    """Solve to a basic feasible optimum (a vertex of the feasible region
    when all variables are sign-constrained).  Exact and deterministic."""
    n_total, rows, cost, split = _split_free(lp)
    status, raw = _solve_standard(n_total, rows, cost)
    if status != LpStatus.OPTIMAL:
        return LpSolution(status=status)
    if split is not None:
        free, pos_of = split
        for j in free:
            raw[j] = raw[j] - raw[pos_of[j]]
    values = tuple(raw[: lp.n_vars])
    obj = sum((c * v for c, v in zip(lp.objective, values)), ZERO)
    cons, bounds = tight_sets(lp, values)
    return LpSolution(LpStatus.OPTIMAL, values, obj, cons, bounds)


def solve_lexicographic(lp: LinearProgram, objectives: Sequence[Sequence]) -> LpSolution:
    """Minimise the objectives in priority order over successive optimal
    faces.  The result is a vertex of the original feasible region; the
    reported objective is lp.objective evaluated at it."""
    if not objectives:
        raise LpError("need at least one objective")
    current = lp
    sol = None
    for obj in objectives:
        obj = tuple(_q(c) for c in obj)
        sol = solve(current.with_objective(obj))
        if sol.status != LpStatus.OPTIMAL:
            return LpSolution(status=sol.status)
        face = Constraint(obj, EQ, sol.objective)
        current = current.with_extra_constraints([face])
    values = sol.values
    obj_value = sum((c * v for c, v in zip(lp.objective, values)), ZERO)
    cons, bounds = tight_sets(lp, values)
    return LpSolution(LpStatus.OPTIMAL, values, obj_value, cons, bounds)


# ---------------------------------------------------------------------------
# Point certification
# ---------------------------------------------------------------------------

def _rank(rows: list[list]) -> int:
    if not rows:
        return 0
    work = [list(r) for r in rows]
    ncols = len(work[0])
    rank = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(rank, len(work)):
            if work[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        work[rank], work[pivot_row] = work[pivot_row], work[rank]
        prow = work[rank]
        inv = ONE / prow[col]
        work[rank] = prow = [a * inv for a in prow]
        for r in range(len(work)):
            if r != rank and work[r][col] != 0:
                f = work[r][col]
                work[r] = [a - f * b for a, b in zip(work[r], prow)]
        rank += 1
        if rank == len(work):
            break
    return rank


def is_vertex(lp: LinearProgram, values: Sequence) -> bool:
    """True iff the tight constraint rows (including tight nonnegativity
    bounds) at the point have full column rank."""
    values = tuple(_q(v) for v in values)
    if not lp.is_feasible(values):
        raise LpError("point is infeasible")
    cons, bounds = tight_sets(lp, values)
    rows = [list(lp.constraints[i].coeffs) for i in cons]
    for j in bounds:
        row = [ZERO] * lp.n_vars
        row[j] = ONE
        rows.append(row)
    return _rank(rows) == lp.n_vars


def is_minimal_point(lp: LinearProgram, values: Sequence) -> bool:
    """True iff no single coordinate can be decreased while staying feasible:
    every variable is blocked by a tight >= with positive coefficient, a
    tight <= with negative coefficient, an equality with nonzero coefficient,
    or its own tight bound at zero."""
    values = tuple(_q(v) for v in values)
    if not lp.is_feasible(values):
        raise LpError("point is infeasible")
    if not all(lp.nonnegative):
        raise LpError("is_minimal_point requires all variables nonnegative")
    cons, bounds = tight_sets(lp, values)
    blocked = set(bounds)
    for i in cons:
        con = lp.constraints[i]
        for j, c in enumerate(con.coeffs):
            if j in blocked or c == 0:
                continue
            if (con.rel == EQ or (con.rel == GE and c > 0)
                    or (con.rel == LE and c < 0)):
                blocked.add(j)
    return len(blocked) == lp.n_vars


def coordinate_range_over_optimal_face(
    lp: LinearProgram, coordinate: int | str
) -> tuple[Optional[object], Optional[object]]:
    """(min, max) of one coordinate over the optimal face of lp; None marks
    an unbounded direction.  The optimum is the unique point of the face iff
    every coordinate's range is degenerate."""
    j = lp.index_of(coordinate) if isinstance(coordinate, str) else coordinate
    base = solve(lp)
    if base.status != LpStatus.OPTIMAL:
        raise LpError(f"LP is {base.status.value}; no optimal face")
    face = lp.with_extra_constraints([Constraint(lp.objective, EQ, base.objective)])
    unit = [ZERO] * lp.n_vars
    unit[j] = ONE
    lo_sol = solve(face.with_objective(tuple(unit)))
    unit[j] = -ONE
    hi_sol = solve(face.with_objective(tuple(unit)))
    lo = lo_sol.values[j] if lo_sol.status == LpStatus.OPTIMAL else None
    hi = hi_sol.values[j] if hi_sol.status == LpStatus.OPTIMAL else None
    return lo, hi


def optimal_face_is_point(lp: LinearProgram) -> bool:
    return all(
        (pair := coordinate_range_over_optimal_face(lp, j))[0] is not None
        and pair[0] == pair[1]
        for j in range(lp.n_vars)
    )


def _solve_square(rows: list[list], rhs: list) -> Optional[list]:
    """Solve a square rational system; None if singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = ONE / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def enumerate_vertices(lp: LinearProgram, max_combinations: int = 500_000) -> list[tuple]:
    """All vertices of the feasible region, by trying every n-subset of
    tight rows.  Exponential; small systems only."""
    n = lp.n_vars
    rows: list[tuple[list, object]] = [
        (list(con.coeffs), con.rhs) for con in lp.constraints
    ]
    for j in range(n):
        if lp.nonnegative[j]:
            row = [ZERO] * n
            row[j] = ONE
            rows.append((row, ZERO))
    count = math.comb(len(rows), n)
    if count > max_combinations:
        raise LpError(f"vertex enumeration needs {count} subsets (cap {max_combinations})")
    seen = set()
    out = []
    for subset in itertools.combinations(range(len(rows)), n):
        sol = _solve_square([rows[i][0] for i in subset],
                            [rows[i][1] for i in subset])
        if sol is None:
            continue
        point = tuple(sol)
        if point in seen or not lp.is_feasible(point):
            continue
        seen.add(point)
        out.append(point)
    return sorted(out)
