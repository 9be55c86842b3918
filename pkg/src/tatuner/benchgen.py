"""Machine-scheduling benchmark family A_(c,p,M).

A scheduler automaton has p disjoint paths from l0 to l1, each with M
intermediate operation locations, so M*p + 2 locations and (M+1)*p edges.
Periodic restrictions (t, c, ~) put ``x ~ c`` on every t-th transition of a
path and reset x there, modelling duration limits over windows of t
consecutive operations. One extra clock that is never reset carries the
total execution-time bound T on each path's final edge. The target is l1;
every generated instance keeps l1 unreachable.

Restriction clocks are shared across paths by position in the restriction
set, so an instance has exactly c clocks regardless of p.

The paper-style restriction sets pair a lower bound of period t with an
upper bound of period t+1; the family's published per-instance constraint
counts confirm the (12, ...) lower bound in the largest set is paired with a
period-13 upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams
from .model import (
    ConstraintTable,
    Edge,
    Location,
    Model,
    TimedAutomaton,
    normalize_atom,
)

VALID_CLOCKS = (3, 5, 7)
VALID_PATHS = (1, 2)
VALID_LENGTHS = (12, 18, 24, 30)


@dataclass(frozen=True)
class PeriodicRestriction:
    period: int
    constant: int
    op: str  # one of < <= > >=

    def __post_init__(self):
        if self.period < 1 or self.constant < 0 or self.op not in ("<", "<=", ">", ">="):
            raise InvalidParams(f"bad periodic restriction {self!r}")


_BASE = {
    (3, 1): ((2, 11, ">="), (3, 15, "<=")),
    (3, 2): ((4, 17, ">="), (5, 20, "<=")),
    (5, 1): ((4, 21, ">="), (5, 25, "<=")),
    (5, 2): ((8, 33, ">="), (9, 36, "<=")),
    (7, 1): ((6, 31, ">="), (7, 35, "<=")),
    (7, 2): ((12, 49, ">="), (13, 52, "<=")),
}


def restriction_sets(clock_count: int, path_index: int) -> tuple[PeriodicRestriction, ...]:
    """Cumulative restriction set R_{c,i}; each family extends the previous."""
    if clock_count not in VALID_CLOCKS or path_index not in VALID_PATHS:
        raise InvalidParams(f"no restriction set for ({clock_count}, {path_index})")
    out: list[PeriodicRestriction] = []
    for c in VALID_CLOCKS:
        out.extend(PeriodicRestriction(*r) for r in _BASE[(c, path_index)])
        if c == clock_count:
            break
    return tuple(out)


def default_total_bound(paths: int, length: int) -> int:
    # chosen so the published per-instance analysis values are reproduced
    return (11 * length) // 2 if paths == 1 else 4 * length - 10


def generate_scheduler(
    clocks: int, paths: int, length: int, total_bound: int | None = None
) -> Model:
    """Build A_(c,p,M) with M*p + 2 locations and (M+1)*p edges, target l1."""
    if clocks not in VALID_CLOCKS or paths not in VALID_PATHS or length not in VALID_LENGTHS:
        raise InvalidParams(
            f"unsupported instance ({clocks}, {paths}, {length}); "
            f"need c in {VALID_CLOCKS}, p in {VALID_PATHS}, M in {VALID_LENGTHS}"
        )
    if total_bound is None:
        total_bound = default_total_bound(paths, length)
    if total_bound < 0:
        raise InvalidParams("total bound must be nonnegative")

    restriction_clocks = clocks - 1
    clock_names = tuple(f"x{i + 1}" for i in range(restriction_clocks)) + ("g",)
    global_clock = restriction_clocks

    locations = [Location("l0", (), initial=True), Location("l1", ())]
    edges: list[Edge] = []
    for p in range(1, paths + 1):
        restrictions = restriction_sets(clocks, p)
        if len(restrictions) != restriction_clocks:
            raise InvalidParams(
                f"restriction set size {len(restrictions)} does not match {clocks} clocks"
            )
        inner = []
        for i in range(1, length + 1):
            inner.append(len(locations))
            locations.append(Location(f"p{p}n{i}", ()))
        hops = [0] + inner + [1]  # l0, intermediates, l1
        for i in range(1, length + 2):
            guard = []
            resets = set()
            if i <= length:
                for k, r in enumerate(restrictions):
                    if i % r.period == 0:
                        guard.append(normalize_atom(k, None, r.op, r.constant))
                        resets.add(k)
            else:
                guard.append(normalize_atom(global_clock, None, "<=", total_bound))
            edges.append(
                Edge(f"p{p}e{i}", hops[i - 1], hops[i], tuple(guard), frozenset(resets))
            )

    ta = TimedAutomaton(clock_names, tuple(locations), tuple(edges), frozenset({1}))
    return Model(ta, ConstraintTable(ta))


# Published constraint counts for the 24 instances, keyed by (c, p, M).
EXPECTED_CONSTRAINT_COUNTS = {
    (3, 1, 12): 11, (3, 2, 12): 17, (3, 1, 18): 16, (3, 2, 18): 24,
    (3, 1, 24): 21, (3, 2, 24): 32, (3, 1, 30): 26, (3, 2, 30): 40,
    (5, 1, 12): 16, (5, 2, 12): 24, (5, 1, 18): 23, (5, 2, 18): 35,
    (5, 1, 24): 31, (5, 2, 24): 47, (5, 1, 30): 39, (5, 2, 30): 59,
    (7, 1, 12): 19, (7, 2, 12): 28, (7, 1, 18): 28, (7, 2, 18): 42,
    (7, 1, 24): 38, (7, 2, 24): 57, (7, 1, 30): 48, (7, 2, 30): 72,
}
