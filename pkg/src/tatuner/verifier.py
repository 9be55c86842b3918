"""Zone-based reachability over difference bound matrices.

Zones are (n+1) x (n+1) matrices of bounds ``(value, strict)`` where row/col 0
is the constant clock. Entry ``D[i][j]`` bounds ``x_i - x_j``. A bound
``(m, True)`` means strictly less than ``m`` and orders below ``(m, False)``.

Exploration is breadth-first over (location, zone) with inclusion subsumption
and, on diagonal-free automata, classic per-clock maximal-constant
extrapolation. Diagonal automata are explored without extrapolation under a
visited-state budget and report Inconclusive on exhaustion.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from .errors import LimitExceeded
from .model import Edge, SimpleConstraint, TimedAutomaton

INF = float("inf")

Bound = tuple  # (value: int | INF, strict: bool)

BOUND_INF: Bound = (INF, False)
BOUND_ZERO: Bound = (0, False)

DEFAULT_STATE_LIMIT = 200_000


def bound_lt(a: Bound, b: Bound) -> bool:
    return a[0] < b[0] or (a[0] == b[0] and a[1] and not b[1])


def bound_add(a: Bound, b: Bound) -> Bound:
    if a[0] == INF or b[0] == INF:
        return BOUND_INF
    return (a[0] + b[0], a[1] or b[1])


def bound_min(a: Bound, b: Bound) -> Bound:
    return a if bound_lt(a, b) else b


Zone = list  # list[list[Bound]]; None stands for the empty zone


def zone_zero(n: int) -> Zone:
    """All clocks exactly 0."""
    return [[BOUND_ZERO] * (n + 1) for _ in range(n + 1)]


def zone_universal(n: int) -> Zone:
    z = [[BOUND_INF] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        z[i][i] = BOUND_ZERO
        z[0][i] = BOUND_ZERO  # clocks are nonnegative
    z[0][0] = BOUND_ZERO
    return z


def zone_copy(z: Zone) -> Zone:
    return [row[:] for row in z]


def zone_freeze(z: Zone) -> tuple:
    return tuple(tuple(row) for row in z)


def canonicalize(z: Zone) -> Optional[Zone]:
    """All-pairs shortest-path closure; None when the zone is empty."""
    z = zone_copy(z)
    m = len(z)
    for k in range(m):
        zk = z[k]
        for i in range(m):
            zik = z[i][k]
            if zik == BOUND_INF:
                continue
            zi = z[i]
            for j in range(m):
                cand = bound_add(zik, zk[j])
                if bound_lt(cand, zi[j]):
                    zi[j] = cand
    for i in range(m):
        if bound_lt(z[i][i], BOUND_ZERO):
            return None
    return z


def _up(z: Zone) -> None:
    """Delay closure: drop upper bounds on clocks. Preserves canonical form."""
    for i in range(1, len(z)):
        z[i][0] = BOUND_INF


def _and_atom(z: Zone, x: int, y: int, b: Bound) -> bool:
    """Conjoin x - y <= b (indices in DBM space). False when it empties the zone."""
    if not bound_lt(b, z[x][y]):
        return True
    if bound_lt(bound_add(z[y][x], b), BOUND_ZERO):
        return False
    z[x][y] = b
    m = len(z)
    for i in range(m):
        zix = bound_add(z[i][x], b)
        if zix == BOUND_INF:
            continue
        zi = z[i]
        zy = z[y]
        for j in range(m):
            cand = bound_add(zix, zy[j])
            if bound_lt(cand, zi[j]):
                zi[j] = cand
    return True


def _reset(z: Zone, x: int) -> None:
    """x := 0. Preserves canonical form."""
    m = len(z)
    for j in range(m):
        z[x][j] = z[0][j]
        z[j][x] = z[j][0]
    z[x][x] = BOUND_ZERO


def _dbm_index(clock: Optional[int]) -> int:
    return 0 if clock is None else clock + 1


def _conjoin(z: Zone, atoms) -> bool:
    for a in atoms:
        if not _and_atom(z, _dbm_index(a.lhs), _dbm_index(a.rhs), (a.bound, a.strict)):
            return False
    return True


def successor(
    z: Zone,
    invariant_src: tuple[SimpleConstraint, ...],
    edge: Edge,
    invariant_dst: tuple[SimpleConstraint, ...],
) -> Optional[Zone]:
    """One symbolic step: delay within the source invariant, take the edge.

    Computes up(z) /\\ Inv(src), then /\\ guard, then resets, then /\\ Inv(dst).
    Returns None when empty. Input must be canonical and nonempty.
    """
    z = zone_copy(z)
    _up(z)
    if not _conjoin(z, invariant_src):
        return None
    if not _conjoin(z, edge.guard):
        return None
    for c in sorted(edge.resets):
        _reset(z, c + 1)
    if not _conjoin(z, invariant_dst):
        return None
    return z


def zone_includes(outer, inner) -> bool:
    """Every bound of outer is at least as loose as inner's."""
    for row_o, row_i in zip(outer, inner):
        for bo, bi in zip(row_o, row_i):
            if bound_lt(bo, bi):
                return False
    return True


def _extrapolation_bounds(ta: TimedAutomaton) -> list:
    m = [0] * (len(ta.clocks) + 1)
    for atoms in ta.all_atom_groups():
        for a in atoms:
            for clk in (a.lhs, a.rhs):
                if clk is not None:
                    m[clk + 1] = max(m[clk + 1], abs(a.bound))
    return m


def _extrapolate(z: Zone, m: list) -> Zone:
    changed = False
    for i in range(len(z)):
        for j in range(len(z)):
            if i == j:
                continue
            v = z[i][j][0]
            if v == INF:
                continue
            if i > 0 and v > m[i]:
                z[i][j] = BOUND_INF
                changed = True
            elif v < -m[j]:
                z[i][j] = (-m[j], True)
                changed = True
    if changed:
        z = canonicalize(z)
        assert z is not None  # loosening cannot empty a nonempty zone
    return z


@dataclass(frozen=True)
class WitnessPath:
    """Alternating locations and edges: l0, e1, l1, ..., en, ln."""

    location_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]

    def __post_init__(self):
        assert len(self.location_ids) == len(self.edge_ids) + 1

    def interleaved(self, ta: TimedAutomaton) -> tuple[str, ...]:
        out = [ta.locations[self.location_ids[0]].name]
        for e, l in zip(self.edge_ids, self.location_ids[1:]):
            out.append(ta.edges[e].name)
            out.append(ta.locations[l].name)
        return tuple(out)


@dataclass(frozen=True)
class Reachable:
    path: WitnessPath


@dataclass(frozen=True)
class Unreachable:
    pass


@dataclass(frozen=True)
class Inconclusive:
    visited: int


CheckResult = Union[Reachable, Unreachable, Inconclusive]


def check_reachability(
    ta: TimedAutomaton,
    limit: int = DEFAULT_STATE_LIMIT,
    targets: Optional[frozenset[int]] = None,
) -> CheckResult:
    """Decide whether some target location is reachable; deterministic.

    Returns Reachable with a witness path, Unreachable after exhaustive
    exploration, or Inconclusive when a diagonal-constrained automaton blows
    the state budget. Raises LimitExceeded if the budget is hit even though
    extrapolation applies.
    """
    if targets is None:
        targets = ta.targets
    n = len(ta.clocks)
    diagonal_free = ta.is_diagonal_free()
    extr = _extrapolation_bounds(ta) if diagonal_free else None

    edges_from: list[list[int]] = [[] for _ in ta.locations]
    for ei, e in enumerate(ta.edges):
        edges_from[e.source].append(ei)

    init_loc = ta.initial_location
    z0 = zone_zero(n)
    if not _conjoin(z0, ta.locations[init_loc].invariant):
        return Unreachable()
    if extr is not None:
        z0 = _extrapolate(z0, extr)

    # nodes: (location, frozen zone, parent node index, incoming edge id)
    nodes: list[tuple] = [(init_loc, zone_freeze(z0), -1, -1)]
    if init_loc in targets:
        return Reachable(WitnessPath((init_loc,), ()))
    stored: dict[int, list] = {init_loc: [nodes[0][1]]}
    queue = deque([0])
    visited = 1

    def path_to(idx: int) -> WitnessPath:
        locs, eids = [], []
        while idx != -1:
            loc, _, parent, eid = nodes[idx]
            locs.append(loc)
            if eid != -1:
                eids.append(eid)
            idx = parent
        locs.reverse()
        eids.reverse()
        return WitnessPath(tuple(locs), tuple(eids))

    while queue:
        idx = queue.popleft()
        loc, frozen, _, _ = nodes[idx]
        zone = [list(row) for row in frozen]
        for ei in edges_from[loc]:
            edge = ta.edges[ei]
            nxt = successor(
                zone, ta.locations[loc].invariant, edge, ta.locations[edge.target].invariant
            )
            if nxt is None:
                continue
            if extr is not None:
                nxt = _extrapolate(nxt, extr)
            frozen_nxt = zone_freeze(nxt)
            seen = stored.setdefault(edge.target, [])
            if any(zone_includes(old, frozen_nxt) for old in seen):
                continue
            nodes.append((edge.target, frozen_nxt, idx, ei))
            if edge.target in targets:
                return Reachable(path_to(len(nodes) - 1))
            seen.append(frozen_nxt)
            queue.append(len(nodes) - 1)
            visited += 1
            if visited > limit:
                if diagonal_free:
                    raise LimitExceeded(f"visited more than {limit} symbolic states")
                return Inconclusive(visited)
    return Unreachable()
