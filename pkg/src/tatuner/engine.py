"""Minimal-sufficient-reduction and maximal-insufficient-reduction search.

A reduction is sufficient when removing its constraints makes some target
location reachable. Sufficiency is monotone under inclusion, so minimum MSRs
and maximum MIRs are found by the dual seed-shrink / seed-enlarge schemes:
walk a chain of strictly shrinking MSRs (growing MIRs), at each step asking
the symbolic store for an unblocked candidate one cardinality below (above)
the last result, until the candidate space is exhausted.

shrink probes members in ascending constraint-id order and, after every
sufficient probe, collapses the working set to its reduction core: the
members whose owning edge or location lies on the verifier's witness path.
enlarge is the exact dual. Both consult the store before calling the
verifier and record every newly classified cone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .errors import (
    AlreadyReachable,
    BudgetExceeded,
    InsufficientInput,
    LimitExceeded,
    NoStructuralPath,
    SufficientInput,
)
from .model import ConstraintTable, Reduction, TimedAutomaton, apply_reduction, mask_ids
from .symstore import CnfStore
from .verifier import (
    DEFAULT_STATE_LIMIT,
    Inconclusive,
    Reachable,
    WitnessPath,
    check_reachability,
)


@dataclass(frozen=True)
class Stats:
    verifier_calls: int
    sat_calls: int
    wall_time: float


@dataclass(frozen=True)
class MsmpResult:
    result: Reduction
    stats: Stats
    chain: tuple[int, ...]  # cardinalities of the intermediate MSRs/MIRs
    mir: Optional[Reduction] = None  # the maximum MIR behind a guarantee result
    witness: Optional[WitnessPath] = None  # a witness for the final MSR


def reduction_core(red: Reduction, witness: WitnessPath, table: ConstraintTable) -> Reduction:
    """Restriction of a sufficient reduction to constraints on the witness path."""
    locs = set(witness.location_ids)
    edges = set(witness.edge_ids)
    mask = 0
    for cid in red.ids():
        e = table.entries[cid]
        on_path = e.owner in locs if e.owner_kind == "location" else e.owner in edges
        if on_path:
            mask |= 1 << cid
    return Reduction(mask)


class _Session:
    """Shared verifier access, memoization and bookkeeping for one analysis."""

    def __init__(self, ta: TimedAutomaton, table: ConstraintTable, limit: int,
                 store: Optional[CnfStore] = None):
        self.ta = ta
        self.table = table
        self.limit = limit
        self.store = store if store is not None else CnfStore(table)
        self.verifier_calls = 0
        self._memo: dict[int, Optional[WitnessPath]] = {}

    def _classify(self, mask: int) -> Optional[WitnessPath]:
        if mask in self._memo:
            return self._memo[mask]
        self.verifier_calls += 1
        reduced = apply_reduction(self.ta, self.table, Reduction(mask))
        res = check_reachability(reduced, limit=self.limit)
        if isinstance(res, Inconclusive):
            raise LimitExceeded(
                f"exploration inconclusive after {res.visited} states (diagonal constraints)"
            )
        out = res.path if isinstance(res, Reachable) else None
        self._memo[mask] = out
        return out

    def sufficient(self, mask: int) -> bool:
        return self._classify(mask) is not None

    def witness(self, mask: int) -> WitnessPath:
        path = self._classify(mask)
        assert path is not None
        return path

    # -- core algorithms ------------------------------------------------------

    def shrink(self, mask: int) -> int:
        if not self.sufficient(mask):
            raise InsufficientInput("shrink needs a sufficient reduction")
        work = mask
        done = 0
        while work != done:
            rest = work & ~done
            c = rest & -rest  # lowest unprocessed id
            cand = work & ~c
            if not self.store.known_insufficient(Reduction(cand)) and self.sufficient(cand):
                core = reduction_core(Reduction(cand), self.witness(cand), self.table).bits
                assert done & ~core == 0  # critical members survive the core
                work = core
            else:
                done |= c
                self.store.mark_insufficient(Reduction(cand))
        return work

    def enlarge(self, mask: int) -> int:
        if self.sufficient(mask):
            raise SufficientInput("enlarge needs an insufficient reduction")
        work = mask
        done = 0
        universe = self.table.universe
        while universe & ~work != done:
            rest = universe & ~work & ~done
            c = rest & -rest
            cand = work | c
            if not self.store.known_sufficient(Reduction(cand)) and not self.sufficient(cand):
                work = cand
            else:
                done |= c
                self.store.mark_sufficient(Reduction(cand))
        return work

    def find_sseed(self, m_mask: int) -> Optional[int]:
        k = m_mask.bit_count() - 1
        if k < 0:
            return None
        while (cand := self.store.sseed_candidate(k)) is not None:
            if self.sufficient(cand.bits):
                return cand.bits
            grown = self.enlarge(cand.bits)
            self.store.mark_insufficient(Reduction(grown))
        return None

    def find_iseed(self, m_mask: int) -> Optional[int]:
        k = m_mask.bit_count() + 1
        if k > self.store.universe_size:
            return None
        while (cand := self.store.iseed_candidate(k)) is not None:
            if not self.sufficient(cand.bits):
                return cand.bits
            shrunk = self.shrink(cand.bits)
            self.store.mark_sufficient(Reduction(shrunk))
        return None


def _finish(session: _Session, t0: float) -> Stats:
    return Stats(session.verifier_calls, session.store.sat_calls, time.perf_counter() - t0)


def is_critical(ta: TimedAutomaton, table: ConstraintTable, red: Reduction, cid: int,
                limit: int = DEFAULT_STATE_LIMIT) -> bool:
    """A member is critical when dropping it from the reduction loses sufficiency."""
    if cid not in red:
        raise ValueError(f"constraint {cid} is not in the reduction")
    sess = _Session(ta, table, limit)
    return not sess.sufficient(red.bits & ~(1 << cid))


def is_conflicting(ta: TimedAutomaton, table: ConstraintTable, red: Reduction, cid: int,
                   limit: int = DEFAULT_STATE_LIMIT) -> bool:
    """An outside constraint conflicts when adding it makes the reduction sufficient."""
    if cid in red:
        raise ValueError(f"constraint {cid} is already in the reduction")
    sess = _Session(ta, table, limit)
    return sess.sufficient(red.bits | (1 << cid))


def shrink(ta: TimedAutomaton, table: ConstraintTable, red: Reduction,
           store: Optional[CnfStore] = None, limit: int = DEFAULT_STATE_LIMIT) -> Reduction:
    """Shrink a sufficient reduction to an MSR; every member ends up critical."""
    sess = _Session(ta, table, limit, store)
    return Reduction(sess.shrink(red.bits))


def enlarge(ta: TimedAutomaton, table: ConstraintTable, red: Reduction,
            store: Optional[CnfStore] = None, limit: int = DEFAULT_STATE_LIMIT) -> Reduction:
    """Enlarge an insufficient reduction to an MIR; every outsider conflicts."""
    sess = _Session(ta, table, limit, store)
    return Reduction(sess.enlarge(red.bits))


def find_sseed(ta: TimedAutomaton, table: ConstraintTable, m: Reduction, store: CnfStore,
               limit: int = DEFAULT_STATE_LIMIT) -> Optional[Reduction]:
    sess = _Session(ta, table, limit, store)
    out = sess.find_sseed(m.bits)
    return None if out is None else Reduction(out)


def find_iseed(ta: TimedAutomaton, table: ConstraintTable, m: Reduction, store: CnfStore,
               limit: int = DEFAULT_STATE_LIMIT) -> Optional[Reduction]:
    sess = _Session(ta, table, limit, store)
    out = sess.find_iseed(m.bits)
    return None if out is None else Reduction(out)


def minimum_msr(ta: TimedAutomaton, table: ConstraintTable,
                limit: int = DEFAULT_STATE_LIMIT) -> MsmpResult:
    """Globally minimum-cardinality MSR over the table's tunable universe."""
    t0 = time.perf_counter()
    sess = _Session(ta, table, limit)
    if sess.sufficient(0):
        raise AlreadyReachable("the target set is already reachable")
    if not sess.sufficient(table.universe):
        raise NoStructuralPath("no structural path reaches the target set")
    chain: list[int] = []
    work = table.universe
    while True:
        m = sess.shrink(work)
        chain.append(m.bit_count())
        sess.store.mark_sufficient(Reduction(m))
        for cid in mask_ids(m):
            sess.store.mark_insufficient(Reduction(m & ~(1 << cid)))
        nxt = sess.find_sseed(m)
        if nxt is None:
            break
        work = nxt
    return MsmpResult(Reduction(m), _finish(sess, t0), tuple(chain),
                      witness=sess.witness(m))


def minimum_mg(ta: TimedAutomaton, table: ConstraintTable,
               limit: int = DEFAULT_STATE_LIMIT) -> MsmpResult:
    """Minimum guarantee: complement of a maximum MIR."""
    t0 = time.perf_counter()
    sess = _Session(ta, table, limit)
    if sess.sufficient(0):
        raise AlreadyReachable("the target set is reachable; nothing to guarantee")
    chain: list[int] = []
    work = 0
    while True:
        m = sess.enlarge(work)
        chain.append(m.bit_count())
        sess.store.mark_insufficient(Reduction(m))
        nxt = sess.find_iseed(m)
        if nxt is None:
            break
        work = nxt
    mg = table.universe & ~m
    return MsmpResult(Reduction(mg), _finish(sess, t0), tuple(chain), mir=Reduction(m))


def enumerate_all(ta: TimedAutomaton, table: ConstraintTable, budget: int = 100_000,
                  limit: int = DEFAULT_STATE_LIMIT) -> tuple[list[Reduction], list[Reduction]]:
    """Exhaustive, duplicate-free lists of all MSRs and all MIRs.

    Seeds any unclassified reduction, shrinks or enlarges it, and blocks the
    resulting cone until no unclassified reduction remains. The budget caps
    the number of seeds.
    """
    sess = _Session(ta, table, limit)
    msrs: list[Reduction] = []
    mirs: list[Reduction] = []
    seeds = 0
    while (cand := sess.store.unexplored_candidate()) is not None:
        seeds += 1
        if seeds > budget:
            raise BudgetExceeded(f"enumeration exceeded {budget} seeds")
        if sess.sufficient(cand.bits):
            m = sess.shrink(cand.bits)
            msrs.append(Reduction(m))
            sess.store.mark_sufficient(Reduction(m))
        else:
            e = sess.enlarge(cand.bits)
            mirs.append(Reduction(e))
            sess.store.mark_insufficient(Reduction(e))
    return msrs, mirs
