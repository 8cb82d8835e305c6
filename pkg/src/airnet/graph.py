"""Directed snapshot graphs built from timetable edge records.

A snapshot is the set of scheduled domestic routes of one half-year
timetable.  Airports of one city are merged into a single node, flights
leaving the domestic set are dropped and repeated flights collapse into a
single arc, so adjacency is binary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import IngestError, ParseError

_PERIOD_RE = re.compile(r"^\s*(\d{4})\s*\(?\s*(H?)([12])\s*\)?\s*$", re.IGNORECASE)


@dataclass(frozen=True, order=True)
class PeriodLabel:
    """Half-year timetable period, ordered by ``(year, half)``."""

    year: int
    half: int

    def __post_init__(self):
        if self.half not in (1, 2):
            raise ValueError(f"half must be 1 or 2, got {self.half!r}")

    @classmethod
    def parse(cls, text: str) -> "PeriodLabel":
        """Accept ``2009H1``, ``2009h1`` and the table style ``2009(1)``."""
        m = _PERIOD_RE.match(text)
        if not m:
            raise ParseError(f"invalid period label {text!r}")
        return cls(int(m.group(1)), int(m.group(3)))

    def __str__(self) -> str:
        return f"{self.year}H{self.half}"


def canonical_code(raw: str) -> str:
    code = raw.strip().upper()
    if not code:
        raise IngestError("empty airport code")
    return code


@dataclass(frozen=True)
class DegreeRecord:
    node: str
    k: int
    k_in: int
    k_out: int


@dataclass(frozen=True)
class UndirectedView:
    """Undirected projection: ``{i, j}`` is an edge iff ``i->j`` or ``j->i``."""

    nodes: tuple[str, ...]
    adjacency: Mapping[str, frozenset[str]]

    @cached_property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    @cached_property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(
            (u, v) for u in self.nodes for v in sorted(self.adjacency[u]) if u < v
        )

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])


@dataclass(frozen=True)
class GraphSnapshot:
    period: PeriodLabel
    nodes: frozenset[str]
    arcs: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        if not self.nodes:
            raise ValueError(f"snapshot {self.period} has no nodes")
        for u, v in self.arcs:
            if u == v:
                raise ValueError(f"self-loop {u}->{v} in snapshot {self.period}")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(
                    f"arc {u}->{v} has an endpoint outside the node set of {self.period}"
                )

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def sorted_nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def sorted_arcs(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.arcs))

    @cached_property
    def successors(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.arcs:
            out[u].add(v)
        return {n: frozenset(s) for n, s in out.items()}

    @cached_property
    def predecessors(self) -> dict[str, frozenset[str]]:
        inc: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.arcs:
            inc[v].add(u)
        return {n: frozenset(s) for n, s in inc.items()}

    @cached_property
    def undirected(self) -> UndirectedView:
        return undirected_projection(self)

    def relabel(self, mapping: Mapping[str, str]) -> "GraphSnapshot":
        """Rename nodes through an injective mapping."""
        return GraphSnapshot(
            self.period,
            frozenset(mapping[n] for n in self.nodes),
            frozenset((mapping[u], mapping[v]) for u, v in self.arcs),
        )


def build_snapshot(
    records: Iterable[tuple[str, str]],
    merge_map: Mapping[str, str] | None = None,
    domestic_set: Iterable[str] | None = None,
    period: PeriodLabel | str = PeriodLabel(2000, 1),
    isolated: Iterable[str] = (),
) -> GraphSnapshot:
    """Build a snapshot from raw ``(src, dst)`` flight records.

    Codes are upper-cased, then resolved through ``merge_map``.  A code
    resolves if it is a key of the map or is already canonical (a value of
    the map or a member of ``domestic_set``); anything else is an
    :class:`IngestError`.  ``merge_map=None`` means identity merging.

    Arcs with an endpoint outside ``domestic_set`` are dropped together with
    that endpoint.  Arcs that collapse into a self-loop after merging are
    dropped but their (domestic) city stays a node.
    """
    if isinstance(period, str):
        period = PeriodLabel.parse(period)
    records = list(records)
    if not records:
        raise IngestError(f"no flight records for period {period}")

    domestic = None if domestic_set is None else {canonical_code(c) for c in domestic_set}
    resolve = _resolver(merge_map, domestic)

    nodes: set[str] = set()
    arcs: set[tuple[str, str]] = set()
    unmapped: set[str] = set()
    for src, dst in records:
        try:
            u = resolve(src)
        except KeyError as exc:
            unmapped.add(exc.args[0])
            continue
        try:
            v = resolve(dst)
        except KeyError as exc:
            unmapped.add(exc.args[0])
            continue
        if domestic is not None and (u not in domestic or v not in domestic):
            continue
        nodes.add(u)
        nodes.add(v)
        if u != v:
            arcs.add((u, v))
    if unmapped:
        raise IngestError(
            f"unmapped airport code(s) in period {period}: {', '.join(sorted(unmapped))}"
        )
    for code in isolated:
        try:
            nodes.add(resolve(code))
        except KeyError as exc:
            raise IngestError(
                f"unmapped isolated airport {exc.args[0]} in period {period}"
            ) from None
    if not nodes:
        raise IngestError(f"no domestic flights left in period {period}")
    return GraphSnapshot(period, frozenset(nodes), frozenset(arcs))


def _resolver(merge_map, domestic):
    if merge_map is None:
        return canonical_code
    table = {canonical_code(k): canonical_code(v) for k, v in merge_map.items()}
    known = set(table.values()) | (domestic or set())

    def resolve(raw: str) -> str:
        code = canonical_code(raw)
        if code in table:
            return table[code]
        if code in known:
            return code
        raise KeyError(code)

    return resolve


def undirected_projection(g: GraphSnapshot) -> UndirectedView:
    adj: dict[str, set[str]] = {n: set() for n in g.nodes}
    for u, v in g.arcs:
        adj[u].add(v)
        adj[v].add(u)
    return UndirectedView(g.sorted_nodes, {n: frozenset(s) for n, s in adj.items()})


def degree_sequences(g: GraphSnapshot) -> list[DegreeRecord]:
    """One :class:`DegreeRecord` per node, sorted by node code."""
    view = g.undirected
    return [
        DegreeRecord(n, view.degree(n), len(g.predecessors[n]), len(g.successors[n]))
        for n in g.sorted_nodes
    ]


def mean_degree(g: GraphSnapshot) -> float:
    return 2 * g.undirected.edge_count / g.n
