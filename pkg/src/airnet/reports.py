"""Report blocks and the batch report bundle.

Blocks are plain dicts keyed so that ``json.dumps(..., sort_keys=True)``
gives byte-stable output.  Node tables use the columns
``node, k, k_in, k_out, c, b, knn``.

Bundle layout (``output_dir``)::

    manifest.json               schema version, flags, file list, status
    metrics/<period>.json|csv   per-snapshot node table and summary
    evolution.csv               one row per period, Table-1 column order
    turnover/<from>_<to>.json   turnover between consecutive periods
    traffic.json                traffic analyses (only with a traffic file)
    error.json                  only on failure; lists partial outputs
"""

from __future__ import annotations

import csv
import io
import json
import math
import datetime as _dt
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .errors import AirnetError, ComputationError
from .evolution import EvolutionRow, EvolutionTable, evolution_table, turnover_series
from .fitting import fit_two_regime_power_law
from .graph import GraphSnapshot, mean_degree
from .io import RunConfig, parse_snapshot_dir, read_domestic_list, read_merge_map, read_traffic
from .metrics import (
    clustering,
    degree_distribution,
    in_out_correlation,
    nearest_neighbor_degree,
    node_metrics,
    reciprocity,
    shortest_path_stats,
)
from .traffic import (
    NATIONAL,
    TrafficSeries,
    correlate_series,
    period_of,
    per_link_per_node_traffic,
    seasonal_decompose,
    series_growth,
    strength_degree_fit,
    strength_table,
    trend_growth,
)

SCHEMA_VERSION = "1.0"
NODE_COLUMNS = ("node", "k", "k_in", "k_out", "c", "b", "knn")


def _clean(value):
    """Replace non-finite floats by None so JSON stays strict."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def dumps(block) -> str:
    return json.dumps(_clean(block), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _attempt(fn, *args, **kwargs):
    """Run an optional statistic; a computation error becomes ``{"error": ...}``."""
    try:
        result = fn(*args, **kwargs)
    except ComputationError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    return result.to_dict() if hasattr(result, "to_dict") else result


def _reciprocity(g: GraphSnapshot) -> dict:
    r = reciprocity(g)
    return {"R": r.r, "a_bar": r.a_bar}


def metrics_block(
    g: GraphSnapshot,
    binning_base: float = 1.5,
    betweenness: str = "raw",
    low_degree: str = "zero",
    workers: int = 1,
) -> dict:
    nodes = node_metrics(g, betweenness == "normalized", workers)
    paths = shortest_path_stats(g, workers)
    clus = clustering(g, low_degree)
    raw_pdf = degree_distribution(g)
    binned = degree_distribution(g, binning_base)
    try:
        knn_table = [list(row) for row in nearest_neighbor_degree(g)]
    except ComputationError as exc:
        knn_table = {"error": str(exc)}
    return {
        "schema_version": SCHEMA_VERSION,
        "period": str(g.period),
        "summary": {
            "N": g.n,
            "arcs": len(g.arcs),
            "edges": g.undirected.edge_count,
            "mean_k": mean_degree(g),
            "mean_k_in": len(g.arcs) / g.n,
            "mean_k_out": len(g.arcs) / g.n,
            "C": clus.mean,
            "clustering_convention": low_degree,
            "reciprocity": _attempt(_reciprocity, g),
            "paths": paths.to_dict(),
            "betweenness_scale": betweenness,
        },
        "degree_distribution": raw_pdf.to_dict(),
        "degree_distribution_log": binned.to_dict(),
        "two_regime_fit": _attempt(fit_two_regime_power_law, binned),
        "in_out_fit": _attempt(in_out_correlation, g),
        "knn_by_degree": knn_table,
        "clustering_by_degree": [list(row) for row in clus.by_degree],
        "nodes": [
            {"node": m.node, "k": m.k, "k_in": m.k_in, "k_out": m.k_out,
             "c": m.c, "b": m.b, "knn": m.knn}
            for m in nodes
        ],
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def metrics_csv(block: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["# schema_version", block["schema_version"]])
    w.writerow(["# period", block["period"]])
    w.writerow(NODE_COLUMNS)
    for row in block["nodes"]:
        w.writerow([_fmt(row[c]) for c in NODE_COLUMNS])
    return buf.getvalue()


def evolution_csv(table: EvolutionTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EvolutionRow.COLUMNS)
    for row in table:
        cells = list(row.as_tuple())
        cells[0] = str(cells[0])
        cells[-1] = "; ".join(cells[-1])
        w.writerow([_fmt(c) for c in cells])
    return buf.getvalue()


def evolution_block(table: EvolutionTable) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "columns": list(EvolutionRow.COLUMNS),
        "rows": [
            {c: (str(v) if c == "period" else list(v) if c == "notes" else v)
             for c, v in zip(EvolutionRow.COLUMNS, row.as_tuple())}
            for row in table
        ],
    }


def traffic_block(
    traffic: Mapping[str, TrafficSeries],
    snapshots: Sequence[GraphSnapshot] = (),
    merge_map: Mapping[str, str] | None = None,
) -> dict:
    """Growth, seasonality, correlations, strengths and per-node/link traffic."""
    out: dict = {"schema_version": SCHEMA_VERSION, "series": {}}
    for scope in sorted(traffic):
        s = traffic[scope]
        entry: dict = {"observations": len(s.observations)}
        for name in ("passengers", "cargo"):
            entry[f"growth_{name}"] = _attempt(series_growth, s, name)
        entry["cargo_vs_passengers"] = _attempt(correlate_series, s, s, "passengers", "cargo")
        if any(o.gdp is not None for o in s.observations):
            entry["passengers_vs_gdp"] = _attempt(correlate_series, s, s, "gdp", "passengers")
            entry["cargo_vs_gdp"] = _attempt(correlate_series, s, s, "gdp", "cargo")
        monthly = [o for o in s.observations if o.date.monthly]
        if len(monthly) >= 24 and len(monthly) == len(s.observations):
            for name in ("passengers", "cargo"):
                try:
                    dec = seasonal_decompose(s, name)
                except ComputationError as exc:
                    entry[f"seasonal_{name}"] = {"error": str(exc)}
                    continue
                entry[f"seasonal_{name}"] = {
                    **dec.to_dict(),
                    "trend_growth_per_month": _attempt(trend_growth, dec),
                }
        else:
            entry["seasonal"] = {"skipped": "needs at least 24 consecutive monthly observations"}
        out["series"][scope] = entry

    national = traffic.get(NATIONAL)
    if national is not None and snapshots:
        periods = {g.period for g in snapshots}
        covered = [o for o in national.observations
                   if o.date.monthly and period_of(o.date) in periods]
        if covered:
            sub = TrafficSeries(NATIONAL, covered)
            out["per_node_per_link"] = {
                name: [
                    {"date": str(r.date), "period": str(r.period), "value": r.value,
                     "per_node": r.per_node, "per_link": r.per_link}
                    for r in per_link_per_node_traffic(sub, snapshots, name)
                ]
                for name in ("passengers", "cargo")
            }

    airports = [s for scope, s in traffic.items() if scope != NATIONAL]
    strengths = {}
    if airports:
        by_year: dict[int, GraphSnapshot] = {}
        for g in snapshots:
            by_year[g.period.year] = g  # latest half of each year wins
        years = sorted({o.date.year for s in airports for o in s.observations
                        if not o.date.monthly} & set(by_year))
        for year in years:
            table = strength_table(airports, by_year[year], merge_map, year)
            strengths[str(year)] = {
                "snapshot": str(by_year[year].period),
                "records": [
                    {"node": r.node, "k": r.k, "s_passenger": r.s_passenger, "s_cargo": r.s_cargo}
                    for r in table.records
                ],
                "ccdf_passenger": table.passenger_ccdf.to_dict(),
                "ccdf_cargo": table.cargo_ccdf.to_dict(),
                "fit_passenger": _attempt(strength_degree_fit, table.records, "passenger"),
                "fit_cargo": _attempt(strength_degree_fit, table.records, "cargo"),
            }
    out["strength"] = strengths
    return out


class ReportWriter:
    """Writes bundle files in a fixed order and remembers what was written."""

    def __init__(self, root: Path):
        self.root = root
        self.written: list[str] = []

    def write(self, relpath: str, text: str) -> None:
        path = self.root / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.written.append(relpath)


def _config_echo(config: RunConfig) -> dict:
    return {
        "snapshot_dir": config.snapshot_dir.name if config.snapshot_dir else None,
        "merge_map": config.merge_map.name if config.merge_map else None,
        "domestic": config.domestic.name if config.domestic else None,
        "traffic": config.traffic.name if config.traffic else None,
        "binning_base": config.binning_base,
        "betweenness": config.betweenness,
        "clustering": config.clustering,
        "seasonal_model": config.seasonal_model,
        "format": config.format,
    }


def run_report(config: RunConfig) -> dict:
    """Produce the full bundle for ``config``; returns the manifest.

    Configuration problems surface before anything is computed or written.
    On a later failure ``error.json`` lists the files already written and
    the error is re-raised.
    """
    config.validate()
    writer = ReportWriter(Path(config.output_dir))
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": _config_echo(config),
    }
    if config.timestamp:
        manifest["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        merge_map = read_merge_map(config.merge_map) if config.merge_map else None
        domestic = read_domestic_list(config.domestic) if config.domestic else None
        traffic = read_traffic(config.traffic) if config.traffic else None
        snapshots = parse_snapshot_dir(config.snapshot_dir, merge_map, domestic)

        for g in snapshots:
            block = metrics_block(g, config.binning_base, config.betweenness,
                                  config.clustering, config.workers)
            if config.format == "json":
                writer.write(f"metrics/{g.period}.json", dumps(block))
            else:
                writer.write(f"metrics/{g.period}.csv", metrics_csv(block))
                summary = {k: v for k, v in block.items() if k != "nodes"}
                writer.write(f"metrics/{g.period}.summary.json", dumps(summary))

        table = evolution_table(snapshots, config.binning_base, config.clustering, config.workers)
        writer.write("evolution.csv", evolution_csv(table))
        if config.format == "json":
            writer.write("evolution.json", dumps(evolution_block(table)))

        for rep in turnover_series(snapshots):
            writer.write(f"turnover/{rep.period_from}_{rep.period_to}.json",
                         dumps({"schema_version": SCHEMA_VERSION, **rep.to_dict()}))

        if traffic is not None:
            writer.write("traffic.json", dumps(traffic_block(traffic, snapshots, merge_map)))
    except AirnetError as exc:
        writer.write("error.json", dumps({
            "schema_version": SCHEMA_VERSION,
            "status": "failed",
            "partial": True,
            "error": {"type": type(exc).__name__, "message": str(exc),
                      "exit_code": exc.exit_code},
            "written": list(writer.written),
        }))
        raise
    manifest["status"] = "ok"
    manifest["files"] = list(writer.written)
    writer.write("manifest.json", dumps(manifest))
    return manifest
