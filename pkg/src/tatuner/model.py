"""Timed-automaton data model, constraint indexing, and the textual format.

Simple clock constraints are stored in upper-bound normal form ``x - y ~ c``
with ``~`` either ``<`` or ``<=`` and one side possibly the constant zero.
Lower-bound surface syntax (``x >= c``, ``x - y > c``) is normalized at parse
time; pretty-printing renders the equivalent surface form back.

Constraint ids are assigned deterministically: invariant atoms of all
locations first (declaration order, atoms in written order), then guard atoms
of all edges. The id universe can be restricted to a tunable subset via a
mask; every analysis quantifies over that mask.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import ParseError, SemanticError

INFINITY = float("inf")

_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class SimpleConstraint:
    """Upper-bound atom ``lhs - rhs ~ bound`` with clock indices or None for 0.

    ``strict`` selects ``<`` over ``<=``. ``bound`` is always a plain int in a
    stored automaton; removal is expressed by dropping the atom, never by an
    infinite bound.
    """

    lhs: Optional[int]
    rhs: Optional[int]
    strict: bool
    bound: int

    def __post_init__(self):
        if self.lhs is None and self.rhs is None:
            raise SemanticError("constraint with no clock")
        if self.lhs == self.rhs:
            raise SemanticError("a clock minus itself is disallowed")

    def relaxed(self, amount: int) -> "SimpleConstraint":
        return replace(self, bound=self.bound + amount)

    def pretty(self, clocks: Sequence[str]) -> str:
        op = "<" if self.strict else "<="
        if self.lhs is None:
            # 0 - x ~ c  is the normal form of  x >/>= -c
            flipped = ">" if self.strict else ">="
            return f"{clocks[self.rhs]} {flipped} {-self.bound}"
        if self.rhs is None:
            return f"{clocks[self.lhs]} {op} {self.bound}"
        return f"{clocks[self.lhs]} - {clocks[self.rhs]} {op} {self.bound}"


def normalize_atom(lhs: Optional[int], rhs: Optional[int], op: str, c: int) -> SimpleConstraint:
    """Normalize ``lhs - rhs op c`` (rhs possibly None for the 0 term).

    ``>`` and ``>=`` flip the term, negate the constant and keep/flip
    strictness: ``x >= c`` becomes ``0 - x <= -c`` and ``x - y > c`` becomes
    ``y - x < -c``.
    """
    if op not in _OPS:
        raise SemanticError(f"unsupported comparison {op!r}")
    if op in ("<", "<="):
        return SimpleConstraint(lhs, rhs, strict=(op == "<"), bound=c)
    return SimpleConstraint(rhs, lhs, strict=(op == ">"), bound=-c)


@dataclass(frozen=True)
class Location:
    name: str
    invariant: tuple[SimpleConstraint, ...]
    initial: bool = False


@dataclass(frozen=True)
class Edge:
    name: str
    source: int
    target: int
    guard: tuple[SimpleConstraint, ...]
    resets: frozenset[int]


@dataclass(frozen=True)
class TimedAutomaton:
    clocks: tuple[str, ...]
    locations: tuple[Location, ...]
    edges: tuple[Edge, ...]
    targets: frozenset[int]

    def __post_init__(self):
        initials = [i for i, l in enumerate(self.locations) if l.initial]
        if len(initials) != 1:
            raise SemanticError(f"expected exactly one initial location, found {len(initials)}")
        nloc = len(self.locations)
        for e in self.edges:
            if not (0 <= e.source < nloc and 0 <= e.target < nloc):
                raise SemanticError(f"edge {e.name} has a dangling endpoint")
        for t in self.targets:
            if not (0 <= t < nloc):
                raise SemanticError("target is not a valid location index")

    @property
    def initial_location(self) -> int:
        return next(i for i, l in enumerate(self.locations) if l.initial)

    def location_index(self, name: str) -> int:
        for i, l in enumerate(self.locations):
            if l.name == name:
                return i
        raise SemanticError(f"unknown location {name!r}")

    def is_diagonal_free(self) -> bool:
        for atoms in self.all_atom_groups():
            for a in atoms:
                if a.lhs is not None and a.rhs is not None:
                    return False
        return True

    def all_atom_groups(self) -> Iterator[tuple[SimpleConstraint, ...]]:
        for l in self.locations:
            yield l.invariant
        for e in self.edges:
            yield e.guard


@dataclass(frozen=True)
class ConstraintEntry:
    cid: int
    owner_kind: str  # "location" | "edge"
    owner: int
    atom_index: int
    atom: SimpleConstraint


class ConstraintTable:
    """Indexed universe of all simple constraints of an automaton.

    Ids are dense ints in deterministic source order. ``universe`` is the
    tunable-subset bitmask; it defaults to every entry.
    """

    def __init__(self, ta: TimedAutomaton, universe: Optional[int] = None):
        entries = []
        cid = 0
        for li, loc in enumerate(ta.locations):
            for ai, atom in enumerate(loc.invariant):
                entries.append(ConstraintEntry(cid, "location", li, ai, atom))
                cid += 1
        for ei, edge in enumerate(ta.edges):
            for ai, atom in enumerate(edge.guard):
                entries.append(ConstraintEntry(cid, "edge", ei, ai, atom))
                cid += 1
        self.ta = ta
        self.entries: tuple[ConstraintEntry, ...] = tuple(entries)
        self.full_mask = (1 << len(entries)) - 1
        self.universe = self.full_mask if universe is None else universe
        if self.universe & ~self.full_mask:
            raise SemanticError("tunable universe references unknown constraint ids")
        self._by_owner = {}
        for e in self.entries:
            self._by_owner[(e.owner_kind, e.owner, e.atom_index)] = e.cid

    def __len__(self) -> int:
        return len(self.entries)

    def cid_of(self, kind: str, owner: int, atom_index: int) -> int:
        return self._by_owner[(kind, owner, atom_index)]

    def owner_name(self, cid: int) -> str:
        e = self.entries[cid]
        if e.owner_kind == "location":
            return self.ta.locations[e.owner].name
        return self.ta.edges[e.owner].name

    def surface_id(self, cid: int) -> str:
        e = self.entries[cid]
        return f"{self.owner_name(cid)}#{e.atom_index}"

    def pretty(self, cid: int) -> str:
        return self.entries[cid].atom.pretty(self.ta.clocks)

    def parse_id(self, text: str) -> int:
        name, sep, idx = text.partition("#")
        if not sep or not idx.isdigit():
            raise SemanticError(f"malformed constraint id {text!r}, expected owner#index")
        atom_index = int(idx)
        for kind, seq in (("location", self.ta.locations), ("edge", self.ta.edges)):
            for oi, obj in enumerate(seq):
                if obj.name == name:
                    key = (kind, oi, atom_index)
                    if key not in self._by_owner:
                        raise SemanticError(f"{name!r} has no constraint #{atom_index}")
                    return self._by_owner[key]
        raise SemanticError(f"unknown owner {name!r} in constraint id {text!r}")

    def with_universe(self, mask: int) -> "ConstraintTable":
        return ConstraintTable(self.ta, universe=mask)

    def with_tunable(self, ids: Iterable[Union[int, str]]) -> "ConstraintTable":
        mask = 0
        for i in ids:
            cid = self.parse_id(i) if isinstance(i, str) else i
            mask |= 1 << cid
        return self.with_universe(mask)


@dataclass(frozen=True)
class Reduction:
    """Subset of constraint ids to remove, as a bitmask."""

    bits: int = 0

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "Reduction":
        mask = 0
        for i in ids:
            mask |= 1 << i
        return cls(mask)

    def ids(self) -> tuple[int, ...]:
        out, bits, i = [], self.bits, 0
        while bits:
            if bits & 1:
                out.append(i)
            bits >>= 1
            i += 1
        return tuple(out)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, cid: int) -> bool:
        return bool(self.bits >> cid & 1)

    def __or__(self, other: "Reduction") -> "Reduction":
        return Reduction(self.bits | other.bits)

    def __sub__(self, other: "Reduction") -> "Reduction":
        return Reduction(self.bits & ~other.bits)

    def issubset(self, other: "Reduction") -> bool:
        return not (self.bits & ~other.bits)


# iteration order of ids in a mask, shared by the engine
def mask_ids(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def complement_guarantee(red: Reduction, table: ConstraintTable) -> Reduction:
    """Complement within the tunable universe; an MIR maps to its MG and back."""
    if red.bits & ~table.universe:
        raise SemanticError("reduction leaves the tunable universe")
    return Reduction(table.universe & ~red.bits)


def apply_reduction(ta: TimedAutomaton, table: ConstraintTable, red: Reduction) -> TimedAutomaton:
    """Drop exactly the atoms named by ``red``; ids and names are preserved."""
    return _rebuild(ta, table, {cid: None for cid in red.ids()})


def apply_relaxation(
    ta: TimedAutomaton, table: ConstraintTable, valuation: Mapping[int, Union[int, float]]
) -> TimedAutomaton:
    """Loosen each atom in the valuation by its amount; infinity removes it."""
    changes: dict[int, Optional[int]] = {}
    for cid, amount in valuation.items():
        if amount == INFINITY:
            changes[cid] = None
        else:
            if amount < 0 or amount != int(amount):
                raise SemanticError(f"relaxation of constraint {cid} must be a nonnegative integer")
            changes[cid] = int(amount)
    return _rebuild(ta, table, changes)


def _rebuild(
    ta: TimedAutomaton, table: ConstraintTable, changes: Mapping[int, Optional[int]]
) -> TimedAutomaton:
    # changes: cid -> None (drop) or int (add to bound)
    for cid in changes:
        if not (0 <= cid < len(table)):
            raise SemanticError(f"unknown constraint id {cid}")

    def rebuilt(kind: str, owner: int, atoms: tuple[SimpleConstraint, ...]):
        out = []
        for ai, atom in enumerate(atoms):
            cid = table.cid_of(kind, owner, ai)
            if cid in changes:
                delta = changes[cid]
                if delta is None:
                    continue
                atom = atom.relaxed(delta)
            out.append(atom)
        return tuple(out)

    locations = tuple(
        replace(loc, invariant=rebuilt("location", li, loc.invariant))
        for li, loc in enumerate(ta.locations)
    )
    edges = tuple(
        replace(e, guard=rebuilt("edge", ei, e.guard)) for ei, e in enumerate(ta.edges)
    )
    return TimedAutomaton(ta.clocks, locations, edges, ta.targets)


@dataclass(frozen=True)
class Model:
    """Parse/generation result: the automaton plus its constraint table."""

    ta: TimedAutomaton
    table: ConstraintTable


# ---------------------------------------------------------------------------
# Textual model format
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<|>)
  | (?P<sym>[{};,\-#]|&&)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "int" | "name" | "op" | "sym" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    prev_ws = True  # start of input counts as whitespace for the comment rule
    while i < len(text):
        ch = text[i]
        if ch == "#" and prev_ws:
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            for c in tok:
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            prev_ws = True
        else:
            tokens.append(_Token(kind, tok, line, col))
            col += len(tok)
            prev_ws = False
        i = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Token]:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None


def parse_model(text: str) -> Model:
    """Parse model text into an automaton and its constraint table.

    Raises ParseError with line/column on grammar violations and
    SemanticError on structural ones (unknown clock or location, duplicate
    names, not exactly one initial location).
    """
    p = _Parser(text)
    clocks: list[str] = []
    clock_index: dict[str, int] = {}
    # raw location/edge records before index resolution
    locations: list[dict] = []
    edges: list[dict] = []
    loc_index: dict[str, int] = {}
    edge_names: set[str] = set()
    target_names: list[str] = []
    tunable_ids: Optional[list[str]] = None

    def parse_atom() -> SimpleConstraint:
        tok = p.expect("name")
        if tok.text not in clock_index:
            raise SemanticError(f"unknown clock {tok.text!r}")
        lhs: Optional[int] = clock_index[tok.text]
        rhs: Optional[int] = None
        if p.accept("sym", "-"):
            tok2 = p.expect("name")
            if tok2.text not in clock_index:
                raise SemanticError(f"unknown clock {tok2.text!r}")
            rhs = clock_index[tok2.text]
        op = p.expect("op").text
        c = int(p.expect("int").text)
        return normalize_atom(lhs, rhs, op, c)

    def parse_conjunction() -> tuple[SimpleConstraint, ...]:
        atoms = [parse_atom()]
        while p.accept("sym", "&&"):
            atoms.append(parse_atom())
        return tuple(atoms)

    while p.peek().kind != "eof":
        tok = p.expect("name")
        if tok.text == "clocks":
            if clocks:
                raise SemanticError("duplicate clocks declaration")
            clocks.append(p.expect("name").text)
            while p.accept("sym", ","):
                clocks.append(p.expect("name").text)
            for i, c in enumerate(clocks):
                if c in clock_index:
                    raise SemanticError(f"duplicate clock {c!r}")
                clock_index[c] = i
        elif tok.text == "location":
            name = p.expect("name").text
            if name in loc_index:
                raise SemanticError(f"duplicate location {name!r}")
            p.expect("sym", "{")
            initial = False
            invariant: tuple[SimpleConstraint, ...] = ()
            while not p.accept("sym", "}"):
                item = p.expect("name")
                if item.text == "initial":
                    initial = True
                elif item.text == "invariant":
                    invariant = invariant + parse_conjunction()
                else:
                    raise ParseError(
                        f"unknown location item {item.text!r}", item.line, item.col
                    )
                p.expect("sym", ";")
            loc_index[name] = len(locations)
            locations.append({"name": name, "invariant": invariant, "initial": initial})
        elif tok.text == "edge":
            name = p.expect("name").text
            if name in edge_names:
                raise SemanticError(f"duplicate edge {name!r}")
            edge_names.add(name)
            p.expect("sym", "{")
            rec = {"name": name, "source": None, "target": None, "guard": (), "resets": []}
            while not p.accept("sym", "}"):
                item = p.expect("name")
                if item.text == "from":
                    rec["source"] = p.expect("name").text
                elif item.text == "to":
                    rec["target"] = p.expect("name").text
                elif item.text == "guard":
                    rec["guard"] = rec["guard"] + parse_conjunction()
                elif item.text == "reset":
                    rec["resets"].append(p.expect("name").text)
                    while p.accept("sym", ","):
                        rec["resets"].append(p.expect("name").text)
                else:
                    raise ParseError(f"unknown edge item {item.text!r}", item.line, item.col)
                p.expect("sym", ";")
            if rec["source"] is None or rec["target"] is None:
                raise SemanticError(f"edge {name!r} needs both from and to")
            edges.append(rec)
        elif tok.text == "target":
            target_names.append(p.expect("name").text)
            while p.accept("sym", ","):
                target_names.append(p.expect("name").text)
        elif tok.text == "tunable":
            tunable_ids = []

            def read_id() -> str:
                owner = p.expect("name").text
                p.expect("sym", "#")
                idx = p.expect("int").text
                return f"{owner}#{idx}"

            tunable_ids.append(read_id())
            while p.accept("sym", ","):
                tunable_ids.append(read_id())
        else:
            raise ParseError(f"unknown directive {tok.text!r}", tok.line, tok.col)

    if not clocks:
        raise SemanticError("model declares no clocks")

    def resolve_loc(name: str) -> int:
        if name not in loc_index:
            raise SemanticError(f"unknown location {name!r}")
        return loc_index[name]

    built_locations = tuple(
        Location(r["name"], r["invariant"], r["initial"]) for r in locations
    )
    built_edges = []
    for r in edges:
        resets = set()
        for cname in r["resets"]:
            if cname not in clock_index:
                raise SemanticError(f"unknown clock {cname!r} in reset")
            resets.add(clock_index[cname])
        built_edges.append(
            Edge(r["name"], resolve_loc(r["source"]), resolve_loc(r["target"]),
                 r["guard"], frozenset(resets))
        )
    targets = frozenset(resolve_loc(n) for n in target_names)
    ta = TimedAutomaton(tuple(clocks), built_locations, tuple(built_edges), targets)
    table = ConstraintTable(ta)
    if tunable_ids is not None:
        table = table.with_tunable(tunable_ids)
    return Model(ta, table)


def serialize_model(model: Model) -> str:
    """Render a model back to canonical text; parse(serialize(m)) round-trips."""
    ta, table = model.ta, model.table
    lines = ["clocks " + ", ".join(ta.clocks)]
    for loc in ta.locations:
        body = []
        if loc.initial:
            body.append("initial;")
        if loc.invariant:
            body.append("invariant " + " && ".join(a.pretty(ta.clocks) for a in loc.invariant) + ";")
        inner = " " + " ".join(body) + " " if body else " "
        lines.append(f"location {loc.name} {{{inner}}}")
    for e in ta.edges:
        body = [f"from {ta.locations[e.source].name};", f"to {ta.locations[e.target].name};"]
        if e.guard:
            body.append("guard " + " && ".join(a.pretty(ta.clocks) for a in e.guard) + ";")
        if e.resets:
            body.append("reset " + ", ".join(ta.clocks[c] for c in sorted(e.resets)) + ";")
        lines.append(f"edge {e.name} {{ " + " ".join(body) + " }")
    if ta.targets:
        lines.append("target " + ", ".join(ta.locations[t].name for t in sorted(ta.targets)))
    if table.universe != table.full_mask:
        ids = ", ".join(table.surface_id(cid) for cid in mask_ids(table.universe))
        lines.append("tunable " + ids)
    return "\n".join(lines) + "\n"
