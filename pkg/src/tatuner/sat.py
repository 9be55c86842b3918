"""Small complete DPLL solver with two-literal watching.

Literals are nonzero ints (DIMACS convention), variables are 1..nvars.
Decisions follow ascending variable order with false tried first, so the
model returned for a satisfiable formula is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence


class SatSolver:
    def __init__(self, nvars: int):
        self.nvars = nvars
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.units: list[int] = []
        self.unsat = False

    def add_clause(self, lits: Iterable[int]) -> None:
        clause = sorted(set(lits), key=abs)
        for l in clause:
            assert l != 0 and abs(l) <= self.nvars
        if any(-l in clause for l in clause):
            return  # tautology
        if not clause:
            self.unsat = True
            return
        if len(clause) == 1:
            self.units.append(clause[0])
            return
        idx = len(self.clauses)
        self.clauses.append(clause)
        self.watches.setdefault(clause[0], []).append(idx)
        self.watches.setdefault(clause[1], []).append(idx)

    def solve(self) -> Optional[list[bool]]:
        """Return a model as assign[1..nvars] or None when unsatisfiable."""
        if self.unsat:
            return None
        n = self.nvars
        assign: list[Optional[bool]] = [None] * (n + 1)
        trail: list[int] = []
        # decision stack entries: (trail length before decision, literal, flipped)
        decisions: list[list] = []

        def value(lit: int) -> Optional[bool]:
            v = assign[abs(lit)]
            if v is None:
                return None
            return v if lit > 0 else not v

        def enqueue(lit: int) -> bool:
            v = value(lit)
            if v is not None:
                return v
            assign[abs(lit)] = lit > 0
            trail.append(lit)
            return True

        def propagate(start: int) -> bool:
            # process trail from index start; watches keep clauses lazy
            qi = start
            while qi < len(trail):
                lit = trail[qi]
                qi += 1
                falsified = -lit
                watchlist = self.watches.get(falsified)
                if not watchlist:
                    continue
                kept = []
                for ci in watchlist:
                    clause = self.clauses[ci]
                    # ensure falsified literal sits at position 1
                    if clause[0] == falsified:
                        clause[0], clause[1] = clause[1], clause[0]
                    if value(clause[0]) is True:
                        kept.append(ci)
                        continue
                    moved = False
                    for k in range(2, len(clause)):
                        if value(clause[k]) is not False:
                            clause[1], clause[k] = clause[k], clause[1]
                            self.watches.setdefault(clause[1], []).append(ci)
                            moved = True
                            break
                    if moved:
                        continue
                    kept.append(ci)
                    if not enqueue(clause[0]):
                        kept.extend(watchlist[watchlist.index(ci) + 1:])
                        self.watches[falsified] = kept
                        return False
                self.watches[falsified] = kept
            return True

        for u in self.units:
            if not enqueue(u):
                return None
        if not propagate(0):
            return None

        next_var = 1
        while True:
            while next_var <= n and assign[next_var] is not None:
                next_var += 1
            if next_var > n:
                return [bool(assign[v]) for v in range(n + 1)]
            mark = len(trail)
            lit = -next_var  # try false first
            decisions.append([mark, lit, False, next_var])
            enqueue(lit)
            while not propagate(decisions[-1][0] if decisions else 0):
                # conflict: backtrack to the most recent unflipped decision
                while decisions and decisions[-1][2]:
                    mark, lit, _, dv = decisions.pop()
                    for l in trail[mark:]:
                        assign[abs(l)] = None
                    del trail[mark:]
                if not decisions:
                    return None
                dec = decisions[-1]
                mark, lit, _, dv = dec
                for l in trail[mark:]:
                    assign[abs(l)] = None
                del trail[mark:]
                dec[1] = -lit
                dec[2] = True
                enqueue(-lit)
            if decisions:
                next_var = decisions[-1][3]


def at_most_k(lits: Sequence[int], k: int, next_aux: int) -> tuple[list[list[int]], int]:
    """Sequential-counter encoding of sum(lits) <= k.

    Returns (clauses, next free auxiliary variable). Aux var s(i,j) is true
    when at least j of the first i+1 literals hold.
    """
    n = len(lits)
    if k >= n:
        return [], next_aux
    if k == 0:
        return [[-l] for l in lits], next_aux
    clauses: list[list[int]] = []
    # s[i][j] for i in 0..n-1, j in 1..k
    s = [[0] * (k + 1) for _ in range(n)]
    for i in range(n):
        for j in range(1, k + 1):
            s[i][j] = next_aux
            next_aux += 1
    clauses.append([-lits[0], s[0][1]])
    for i in range(1, n):
        clauses.append([-lits[i], s[i][1]])
        clauses.append([-s[i - 1][1], s[i][1]])
        for j in range(2, k + 1):
            clauses.append([-lits[i], -s[i - 1][j - 1], s[i][j]])
            clauses.append([-s[i - 1][j], s[i][j]])
        clauses.append([-lits[i], -s[i - 1][k]])
    return clauses, next_aux


def exactly_k(lits: Sequence[int], k: int, next_aux: int) -> tuple[list[list[int]], int]:
    """sum(lits) == k via two opposed at-most-k counters."""
    n = len(lits)
    assert 0 <= k <= n
    upper, next_aux = at_most_k(lits, k, next_aux)
    lower, next_aux = at_most_k([-l for l in lits], n - k, next_aux)
    return upper + lower, next_aux
