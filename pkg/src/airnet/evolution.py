"""Cross-snapshot accounting: airport/route turnover and the per-period table."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .errors import AirnetError, ComputationError, OrderingError
from .fitting import fit_two_regime_power_law
from .graph import GraphSnapshot, PeriodLabel, mean_degree
from .metrics import clustering, degree_distribution, reciprocity, shortest_path_stats

ADDED = ("aOO", "aON", "aNN")
DELETED = ("dOO", "dOR", "dRR")

Arc = tuple[str, str]


@dataclass(frozen=True)
class TurnoverReport:
    """Node and route changes between two consecutive snapshots.

    Added routes are classed by how many endpoints are new airports
    (aOO / aON / aNN), deleted routes by how many endpoints were removed
    (dOO / dOR / dRR).  ``pct_changed`` is relative to the arc count of the
    earlier snapshot.
    """

    period_from: PeriodLabel
    period_to: PeriodLabel
    nodes_added: tuple[str, ...]
    nodes_removed: tuple[str, ...]
    arcs: dict[str, tuple[Arc, ...]] = field(default_factory=dict)
    pct_changed: float = 0.0

    def count(self, category: str) -> int:
        return len(self.arcs[category])

    @property
    def counts(self) -> dict[str, int]:
        return {c: len(self.arcs[c]) for c in ADDED + DELETED}

    @property
    def added_arcs(self) -> frozenset[Arc]:
        return frozenset(a for c in ADDED for a in self.arcs[c])

    @property
    def deleted_arcs(self) -> frozenset[Arc]:
        return frozenset(a for c in DELETED for a in self.arcs[c])

    def to_dict(self) -> dict:
        return {
            "period_from": str(self.period_from),
            "period_to": str(self.period_to),
            "pct_changed_base": "arcs in period_from",
            "pct_changed": self.pct_changed,
            "nodes_added": {"count": len(self.nodes_added), "ids": list(self.nodes_added)},
            "nodes_removed": {
                "count": len(self.nodes_removed),
                "ids": list(self.nodes_removed),
            },
            "links": {
                c: {"count": len(self.arcs[c]), "arcs": [list(a) for a in self.arcs[c]]}
                for c in ADDED + DELETED
            },
        }


def diff_snapshots(g_t: GraphSnapshot, g_next: GraphSnapshot) -> TurnoverReport:
    if not g_t.period < g_next.period:
        raise OrderingError(
            f"diff needs increasing periods, got {g_t.period} -> {g_next.period}"
        )
    new = g_next.nodes - g_t.nodes
    removed = g_t.nodes - g_next.nodes
    arcs: dict[str, list[Arc]] = {c: [] for c in ADDED + DELETED}
    for u, v in sorted(g_next.arcs - g_t.arcs):
        arcs[ADDED[(u in new) + (v in new)]].append((u, v))
    for u, v in sorted(g_t.arcs - g_next.arcs):
        arcs[DELETED[(u in removed) + (v in removed)]].append((u, v))
    changed = sum(len(a) for a in arcs.values())
    base = len(g_t.arcs)
    pct = 100.0 * changed / base if base else (0.0 if changed == 0 else float("inf"))
    return TurnoverReport(
        g_t.period,
        g_next.period,
        tuple(sorted(new)),
        tuple(sorted(removed)),
        {c: tuple(a) for c, a in arcs.items()},
        pct,
    )


@dataclass(frozen=True)
class EvolutionRow:
    period: PeriodLabel
    mean_k: float
    lambda1: float | None
    lambda2: float | None
    mean_k_in: float
    mean_k_out: float
    R: float | None
    C: float
    d: float
    D: int
    notes: tuple[str, ...] = ()

    COLUMNS = ("period", "mean_k", "lambda1", "lambda2", "mean_k_in", "mean_k_out",
               "R", "C", "d", "D", "notes")

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in self.COLUMNS)


@dataclass(frozen=True)
class EvolutionTable:
    rows: tuple[EvolutionRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def evolution_row(
    g: GraphSnapshot,
    binning: str | float = 1.5,
    low_degree: str = "zero",
    workers: int = 1,
) -> EvolutionRow:
    """Table row for one snapshot.

    A failed breakpoint fit or undefined reciprocity leaves that cell empty
    and records the reason in ``notes``; anything else propagates as a
    :class:`ComputationError` naming the period.
    """
    notes = []
    try:
        fit = fit_two_regime_power_law(degree_distribution(g, binning))
        lam1, lam2 = fit.lambda1, fit.lambda2
    except ComputationError as exc:
        lam1 = lam2 = None
        notes.append(f"lambda: {exc}")
    try:
        R = reciprocity(g).r
    except ComputationError as exc:
        R = None
        notes.append(f"R: {exc}")
    try:
        paths = shortest_path_stats(g, workers)
        C = clustering(g, low_degree).mean
    except AirnetError as exc:
        raise ComputationError(f"{g.period}: {exc}") from exc
    if len(paths.component_sizes) > 1:
        notes.append(f"disconnected: components {list(paths.component_sizes)}")
    arcs_per_node = len(g.arcs) / g.n
    return EvolutionRow(
        g.period, mean_degree(g), lam1, lam2, arcs_per_node, arcs_per_node,
        R, C, paths.d, paths.D, tuple(notes),
    )


def _row_task(args):
    return evolution_row(*args)


def evolution_table(
    snapshots: Sequence[GraphSnapshot],
    binning: str | float = 1.5,
    low_degree: str = "zero",
    workers: int = 1,
) -> EvolutionTable:
    if not snapshots:
        raise ComputationError("evolution table needs at least one snapshot")
    for a, b in zip(snapshots, snapshots[1:]):
        if not a.period < b.period:
            raise OrderingError(f"snapshots out of order: {a.period} then {b.period}")
    tasks = [(g, binning, low_degree, 1) for g in snapshots]
    if workers > 1 and len(snapshots) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_task, tasks))
    else:
        rows = [_row_task(t) for t in tasks]
    return EvolutionTable(tuple(rows))


def turnover_series(snapshots: Sequence[GraphSnapshot]) -> list[TurnoverReport]:
    return [diff_snapshots(a, b) for a, b in zip(snapshots, snapshots[1:])]
