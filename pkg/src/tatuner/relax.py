"""Integer relaxation of clock constraints.

A witness path turns into a parametric difference system over prefix-sum time
variables T_0..T_n (T_i is the absolute time of the i-th transition, delays
are delta_i = T_{i+1} - T_i). The value of clock x at transition i is
T_i - T_k where k indexes the transition that last reset x, or 0. Every guard
atom, arriving-invariant atom and leaving-invariant atom on the path becomes
one row ``T_a - T_b ~ c + p`` where the integer relaxation variable p is
present only for atoms in the chosen relaxation set; a variable is shared by
every occurrence of its atom along the path.

Feasibility for a fixed integer p-vector is a negative-cycle check with
strictness-aware (value, strict) bounds. Because p occurs only additively on
right-hand sides, feasibility is monotone in p, and the optimal integer
valuation is found by monotone lattice search rather than a general MILP
solver. The same lattice search drives the verifier-backed global optimum,
the maximal total change of a guarantee, and the uniform robustness degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .errors import (
    AlreadyReachable,
    BudgetExceeded,
    InfeasibleSystem,
    LimitExceeded,
    NonMonotoneOracle,
)
from .model import (
    INFINITY,
    ConstraintTable,
    Reduction,
    TimedAutomaton,
    apply_relaxation,
    complement_guarantee,
)
from .verifier import (
    DEFAULT_STATE_LIMIT,
    Inconclusive,
    Reachable,
    Unreachable,
    WitnessPath,
    check_reachability,
)

GALLOP_CAP = 1 << 20
DEFAULT_ORACLE_BUDGET = 500_000


def gamma(ta: TimedAutomaton, path: WitnessPath, clock: Optional[int], i: int) -> tuple[int, int]:
    """Closed delay-index interval [k, i-1] giving clock value at transition i.

    k is the index of the transition that last reset the clock before
    transition i, or 0 when it was never reset. The zero term (clock None)
    yields the empty interval (i, i-1).
    """
    n = len(path.edge_ids)
    if not (1 <= i <= n):
        raise ValueError(f"transition index {i} outside 1..{n}")
    if clock is None:
        return (i, i - 1)
    k = 0
    for m in range(1, i):
        if clock in ta.edges[path.edge_ids[m - 1]].resets:
            k = m
    return (k, i - 1)


@dataclass(frozen=True)
class Row:
    """T_a - T_b < c + p  (or <=); pvar indexes relax_vars, None means fixed."""

    a: int
    b: int
    bound: int
    strict: bool
    pvar: Optional[int]


@dataclass(frozen=True)
class DifferenceSystem:
    num_delays: int
    rows: tuple[Row, ...]
    relax_vars: tuple[int, ...]  # constraint ids owning each p variable


def build_difference_system(
    ta: TimedAutomaton,
    table: ConstraintTable,
    path: WitnessPath,
    relax_set: Reduction,
) -> DifferenceSystem:
    """Translate a structurally valid path into its parametric row system."""
    n = len(path.edge_ids)
    raw: list[tuple[int, int, int, bool, Optional[int]]] = []
    for i in range(n):
        raw.append((i, i + 1, 0, False, None))  # delta_i >= 0

    last_reset = [0] * len(ta.clocks)

    def endpoint(clock: Optional[int], i: int) -> Optional[int]:
        # None encodes the constant-zero term
        return None if clock is None else last_reset[clock]

    def add_row(tx: Optional[int], ty: Optional[int], i: int, atom, cid: int) -> None:
        # term(x) - term(y) ~ c where term is T_i - T_k or 0
        if tx is None and ty is None:
            a = b = i
        elif ty is None:
            a, b = i, tx
        elif tx is None:
            a, b = ty, i
        else:
            a, b = ty, tx
        raw.append((a, b, atom.bound, atom.strict, cid if cid in relax_set else None))

    for i in range(1, n + 1):
        edge = ta.edges[path.edge_ids[i - 1]]
        loc = path.location_ids[i]
        # guard rows, clock values before the transition's resets
        for ai, atom in enumerate(edge.guard):
            cid = table.cid_of("edge", path.edge_ids[i - 1], ai)
            add_row(endpoint(atom.lhs, i), endpoint(atom.rhs, i), i, atom, cid)
        # arriving rows for the target invariant; reset clocks contribute 0
        for ai, atom in enumerate(ta.locations[loc].invariant):
            cid = table.cid_of("location", loc, ai)
            tx = None if (atom.lhs is None or atom.lhs in edge.resets) else endpoint(atom.lhs, i)
            ty = None if (atom.rhs is None or atom.rhs in edge.resets) else endpoint(atom.rhs, i)
            add_row(tx, ty, i, atom, cid)
        for c in edge.resets:
            last_reset[c] = i

    # leaving rows for positions 0..n-1 need the reset state before each step,
    # so walk again tracking it
    last_reset = [0] * len(ta.clocks)
    for pos in range(n):
        loc = path.location_ids[pos]
        for ai, atom in enumerate(ta.locations[loc].invariant):
            cid = table.cid_of("location", loc, ai)
            add_row(endpoint(atom.lhs, pos + 1), endpoint(atom.rhs, pos + 1), pos + 1, atom, cid)
        for c in ta.edges[path.edge_ids[pos]].resets:
            last_reset[c] = pos + 1

    used = sorted({cid for *_x, cid in raw if cid is not None})
    index = {cid: k for k, cid in enumerate(used)}
    rows = tuple(
        Row(a, b, bound, strict, index[cid] if cid is not None else None)
        for a, b, bound, strict, cid in raw
    )
    return DifferenceSystem(n, rows, tuple(used))


def feasible(sys: DifferenceSystem, p: Sequence[int]) -> bool:
    """No negative cycle in the constraint graph for this integer p-vector."""
    if len(p) != len(sys.relax_vars):
        raise ValueError("p vector length does not match the relaxation variables")
    nv = sys.num_delays + 1
    # dist as (value, strict); all nodes start at 0 (implicit virtual source)
    dist = [(0, False)] * nv
    edges = [
        (r.b, r.a, r.bound + (p[r.pvar] if r.pvar is not None else 0), r.strict)
        for r in sys.rows
    ]
    for _ in range(nv):
        changed = False
        for b, a, w, s in edges:
            db = dist[b]
            if db[0] == INFINITY:
                continue
            cand = (db[0] + w, db[1] or s)
            da = dist[a]
            if cand[0] < da[0] or (cand[0] == da[0] and cand[1] and not da[1]):
                dist[a] = cand
                changed = True
        if not changed:
            return True
    for b, a, w, s in edges:
        db = dist[b]
        cand = (db[0] + w, db[1] or s)
        da = dist[a]
        if cand[0] < da[0] or (cand[0] == da[0] and cand[1] and not da[1]):
            return False
    return True


def realize_delays(sys: DifferenceSystem, p: Sequence[int]) -> Optional[tuple[Fraction, ...]]:
    """Concrete rational delays for a feasible p, from shortest-path potentials.

    Strict bounds c are tightened to c - eps with eps = 1/(2(n+2)); with
    integer constants the strict system is feasible iff this one is.
    """
    nv = sys.num_delays + 1
    eps = Fraction(1, 2 * (nv + 1))
    dist = [Fraction(0)] * nv
    edges = []
    for r in sys.rows:
        w = Fraction(r.bound + (p[r.pvar] if r.pvar is not None else 0))
        if r.strict:
            w -= eps
        edges.append((r.b, r.a, w))
    for _ in range(nv):
        changed = False
        for b, a, w in edges:
            if dist[b] + w < dist[a]:
                dist[a] = dist[b] + w
                changed = True
        if not changed:
            break
    else:
        for b, a, w in edges:
            if dist[b] + w < dist[a]:
                return None
    t = [d - dist[0] for d in dist]
    return tuple(t[i + 1] - t[i] for i in range(sys.num_delays))


# ---------------------------------------------------------------------------
# Monotone lattice optimization
# ---------------------------------------------------------------------------


def _compositions(total: int, bounds: Sequence[int]) -> Iterator[tuple[int, ...]]:
    if not bounds:
        if total == 0:
            yield ()
        return
    rest_cap = sum(bounds[1:])
    lo = max(0, total - rest_cap)
    hi = min(total, bounds[0])
    for v0 in range(lo, hi + 1):
        for rest in _compositions(total - v0, bounds[1:]):
            yield (v0,) + rest


def monotone_lattice_optimize(
    oracle: Callable[[tuple[int, ...]], bool],
    mode: str,
    dims: int,
    per_dim_bounds: Sequence[int],
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> tuple[tuple[int, ...], int]:
    """Exact extremal-sum point of a monotone 0/1 oracle inside a box.

    minimize: least sum with oracle true (oracle must be upward closed);
    maximize: greatest sum with oracle true (downward closed). Enumerates
    candidate vectors in sum order with dominance pruning and memoization.
    Raises NonMonotoneOracle on an observed dominance violation and
    BudgetExceeded when the call budget runs out.
    """
    if mode not in ("minimize", "maximize"):
        raise ValueError(f"unknown mode {mode!r}")
    bounds = tuple(per_dim_bounds)
    if len(bounds) != dims:
        raise ValueError("per_dim_bounds length does not match dims")
    memo: dict[tuple[int, ...], bool] = {}
    false_pts: list[tuple[int, ...]] = []
    calls = 0

    def leq(u, v) -> bool:
        return all(a <= b for a, b in zip(u, v))

    def query(v: tuple[int, ...]) -> bool:
        nonlocal calls
        if v in memo:
            return memo[v]
        calls += 1
        if calls > budget:
            raise BudgetExceeded(f"lattice search exceeded {budget} oracle calls")
        r = bool(oracle(v))
        memo[v] = r
        if r:
            bad = (
                any(leq(v, u) for u in false_pts)
                if mode == "minimize"
                else any(leq(u, v) for u in false_pts)
            )
            if bad:
                raise NonMonotoneOracle(f"oracle true at {v} contradicts a dominated false point")
        else:
            false_pts.append(v)
        return r

    total = sum(bounds)
    sums = range(total + 1) if mode == "minimize" else range(total, -1, -1)
    for s in sums:
        for v in _compositions(s, bounds):
            if mode == "minimize" and any(leq(v, u) for u in false_pts):
                continue
            if mode == "maximize" and any(leq(u, v) for u in false_pts):
                continue
            if query(v):
                return v, s
    raise InfeasibleSystem("no feasible point within the per-dimension bounds")


# ---------------------------------------------------------------------------
# Optimal relaxations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelaxOutcome:
    valuation: dict  # constraint id -> int (finite relaxations only)
    cost: int
    delays: Optional[tuple[Fraction, ...]] = None


def min_total_relaxation_milp(
    ta: TimedAutomaton,
    table: ConstraintTable,
    msr: Reduction,
    witness: WitnessPath,
    budget: int = DEFAULT_ORACLE_BUDGET,
    limit: int = DEFAULT_STATE_LIMIT,
) -> RelaxOutcome:
    """Least total integer relaxation realizing the witness path.

    The system built from the path must be feasible once every relaxation
    variable is large enough; otherwise the witness does not belong to the
    reduced automaton and InfeasibleSystem is raised. The returned valuation
    is checked to make the target reachable on the relaxed automaton.
    """
    sys = build_difference_system(ta, table, witness, msr)
    scale = 2 * sum(abs(r.bound) for r in sys.rows) + 2
    caps = tuple(scale + max((abs(r.bound) for r in sys.rows), default=0) for _ in sys.relax_vars)
    if not feasible(sys, caps):
        raise InfeasibleSystem("witness path is not realizable even with maximal relaxation")
    vec, cost = monotone_lattice_optimize(
        lambda v: feasible(sys, v), "minimize", len(sys.relax_vars), caps, budget
    )
    valuation = {cid: 0 for cid in msr.ids()}
    valuation.update({cid: vec[k] for k, cid in enumerate(sys.relax_vars)})
    delays = realize_delays(sys, vec)
    relaxed = apply_relaxation(ta, table, valuation)
    if not isinstance(check_reachability(relaxed, limit=limit), Reachable):
        raise InfeasibleSystem("relaxed automaton failed the reachability post-check")
    return RelaxOutcome(valuation, cost, delays)


def _reachability_oracle(ta, table, fixed_removals, ids, limit):
    removals = {cid: INFINITY for cid in fixed_removals}

    def oracle(vec: tuple[int, ...]) -> bool:
        valuation = dict(removals)
        valuation.update({cid: vec[k] for k, cid in enumerate(ids)})
        res = check_reachability(apply_relaxation(ta, table, valuation), limit=limit)
        if isinstance(res, Inconclusive):
            raise LimitExceeded("reachability inconclusive during relaxation search")
        return isinstance(res, Reachable)

    return oracle


def min_total_relaxation_global(
    ta: TimedAutomaton,
    table: ConstraintTable,
    msr: Reduction,
    budget: int = DEFAULT_ORACLE_BUDGET,
    limit: int = DEFAULT_STATE_LIMIT,
) -> RelaxOutcome:
    """Least total integer relaxation over all paths, verifier as the oracle.

    Never worse than the path-bound optimum of the MILP route for the same
    reduction set.
    """
    ids = tuple(sorted(msr.ids()))
    reach = _reachability_oracle(ta, table, (), ids, limit)
    if not ids:
        if reach(()):
            return RelaxOutcome({}, 0)
        raise InfeasibleSystem("empty relaxation set on an unreachable automaton")
    b = 1
    while not reach((b,) * len(ids)):
        b *= 2
        if b > GALLOP_CAP:
            raise BudgetExceeded("galloping exceeded the relaxation cap")
    bounds = (b * len(ids),) * len(ids)
    vec, cost = monotone_lattice_optimize(reach, "minimize", len(ids), bounds, budget)
    return RelaxOutcome({cid: vec[k] for k, cid in enumerate(ids)}, cost)


def _solo_max(unreach: Callable[[tuple[int, ...]], bool], dims: int, d: int) -> int:
    """Largest solo value in dimension d keeping the oracle true."""

    def probe(v: int) -> bool:
        vec = [0] * dims
        vec[d] = v
        return unreach(tuple(vec))

    hi = 1
    while probe(hi):
        hi *= 2
        if hi > GALLOP_CAP:
            raise BudgetExceeded("galloping exceeded the relaxation cap")
    lo = hi // 2 if hi > 1 else 0
    if lo == hi:
        return 0
    # probe(lo) true (or lo == 0), probe(hi) false
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_total_relaxation(
    ta: TimedAutomaton,
    table: ConstraintTable,
    mg: Reduction,
    budget: int = DEFAULT_ORACLE_BUDGET,
    limit: int = DEFAULT_STATE_LIMIT,
) -> RelaxOutcome:
    """Greatest total integer relaxation of the guarantee keeping targets out.

    Operates on the automaton reduced to exactly the guarantee constraints;
    per-atom galloping bounds are finite because the guarantee is minimal.
    """
    removed = complement_guarantee(mg, table)
    ids = tuple(sorted(mg.ids()))
    reach = _reachability_oracle(ta, table, removed.ids(), ids, limit)

    def unreach(vec: tuple[int, ...]) -> bool:
        return not reach(vec)

    if not unreach((0,) * len(ids)):
        raise AlreadyReachable("the guarantee set does not keep the target unreachable")
    bounds = tuple(_solo_max(unreach, len(ids), d) for d in range(len(ids)))
    vec, cost = monotone_lattice_optimize(unreach, "maximize", len(ids), bounds, budget)
    return RelaxOutcome({cid: vec[k] for k, cid in enumerate(ids)}, cost)


def robustness_degree(
    ta: TimedAutomaton,
    table: ConstraintTable,
    mg: Reduction,
    limit: int = DEFAULT_STATE_LIMIT,
) -> int:
    """Largest uniform integer relaxation of the guarantee preserving safety.

    Relaxing by one more than the result makes the target reachable; that is
    verified before returning.
    """
    removed = complement_guarantee(mg, table)
    ids = tuple(sorted(mg.ids()))
    reach = _reachability_oracle(ta, table, removed.ids(), ids, limit)

    def reachable_at(delta: int) -> bool:
        return reach((delta,) * len(ids))

    if reachable_at(0):
        raise AlreadyReachable("the guarantee set does not keep the target unreachable")
    hi = 1
    while not reachable_at(hi):
        hi *= 2
        if hi > GALLOP_CAP:
            raise BudgetExceeded("galloping exceeded the relaxation cap")
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reachable_at(mid):
            hi = mid
        else:
            lo = mid
    assert reachable_at(lo + 1)
    return lo
