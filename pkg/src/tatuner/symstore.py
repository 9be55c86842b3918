"""Symbolic store for the known-insufficient / known-sufficient reduction sets.

A reduction over the tunable universe maps one-to-one to a valuation of one
Boolean selector variable per tunable constraint id. Marking a reduction
insufficient adds the positive clause over the selectors OUTSIDE it, which
simultaneously blocks the whole subset cone; marking sufficient adds the
negative clause over the selectors INSIDE it, blocking the superset cone.

Candidate queries conjoin the persistent clauses with a fresh exactly-k
sequential-counter encoding and ask the embedded DPLL solver for any model.
Membership tests bypass the solver and use subset/superset checks against the
generating sets, which is semantically identical.
"""

from __future__ import annotations

from typing import IO, Optional

from .model import ConstraintTable, Reduction, mask_ids
from .sat import SatSolver, exactly_k


class CnfStore:
    def __init__(self, table: ConstraintTable):
        self.table = table
        self.var_ids = tuple(mask_ids(table.universe))  # selector var v+1 <-> cid
        self.nvars = len(self.var_ids)
        self._var_of = {cid: v + 1 for v, cid in enumerate(self.var_ids)}
        self.clauses_i: list[list[int]] = []  # positive clauses, formula over insufficiency
        self.clauses_s: list[list[int]] = []  # negative clauses, formula over sufficiency
        self.insufficient_gens: list[int] = []
        self.sufficient_gens: list[int] = []
        self.sat_calls = 0

    @property
    def universe_size(self) -> int:
        return self.nvars

    def _check(self, red: Reduction) -> int:
        if red.bits & ~self.table.universe:
            raise ValueError("reduction leaves the tunable universe")
        return red.bits

    # -- marking ------------------------------------------------------------

    def mark_insufficient(self, red: Reduction) -> None:
        mask = self._check(red)
        if any(mask & ~g == 0 for g in self.insufficient_gens):
            return  # already covered by a superset generator
        self.insufficient_gens = [g for g in self.insufficient_gens if g & ~mask]
        self.insufficient_gens.append(mask)
        clause = [self._var_of[cid] for cid in self.var_ids if not (mask >> cid) & 1]
        self.clauses_i.append(clause)

    def mark_sufficient(self, red: Reduction) -> None:
        mask = self._check(red)
        if any(g & ~mask == 0 for g in self.sufficient_gens):
            return  # already covered by a subset generator
        self.sufficient_gens = [g for g in self.sufficient_gens if mask & ~g]
        self.sufficient_gens.append(mask)
        clause = [-self._var_of[cid] for cid in self.var_ids if (mask >> cid) & 1]
        self.clauses_s.append(clause)

    # -- membership ----------------------------------------------------------

    def known_insufficient(self, red: Reduction) -> bool:
        mask = self._check(red)
        return any(mask & ~g == 0 for g in self.insufficient_gens)

    def known_sufficient(self, red: Reduction) -> bool:
        mask = self._check(red)
        return any(g & ~mask == 0 for g in self.sufficient_gens)

    # -- candidate queries ----------------------------------------------------

    def _solve(self, persistent: list[list[int]], k: Optional[int]) -> Optional[Reduction]:
        self.sat_calls += 1
        selectors = list(range(1, self.nvars + 1))
        card: list[list[int]] = []
        next_aux = self.nvars + 1
        if k is not None:
            card, next_aux = exactly_k(selectors, k, next_aux)
        solver = SatSolver(next_aux - 1)
        for cl in persistent:
            solver.add_clause(cl)
        for cl in card:
            solver.add_clause(cl)
        model = solver.solve()
        if model is None:
            return None
        mask = 0
        for v, cid in enumerate(self.var_ids):
            if model[v + 1]:
                mask |= 1 << cid
        return Reduction(mask)

    def sseed_candidate(self, k: int) -> Optional[Reduction]:
        """Any size-k reduction not yet known insufficient, or None."""
        if not (0 <= k <= self.nvars):
            return None
        return self._solve(self.clauses_i, k)

    def iseed_candidate(self, k: int) -> Optional[Reduction]:
        """Any size-k reduction not yet known sufficient, or None."""
        if not (0 <= k <= self.nvars):
            return None
        return self._solve(self.clauses_s, k)

    def unexplored_candidate(self) -> Optional[Reduction]:
        """Any reduction in neither cone, for enumeration sweeps."""
        return self._solve(self.clauses_i + self.clauses_s, None)

    # -- debugging -------------------------------------------------------------

    def dump_dimacs(self, fp: IO[str], which: str) -> None:
        clauses = self.clauses_i if which == "insufficient" else self.clauses_s
        fp.write(f"p cnf {self.nvars} {len(clauses)}\n")
        for cl in clauses:
            fp.write(" ".join(map(str, cl)) + " 0\n")
