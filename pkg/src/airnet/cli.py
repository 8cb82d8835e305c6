"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 parse error,
4 computation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import AirnetError, ConfigError
from .evolution import diff_snapshots, evolution_table
from .fitting import (
    fit_exponential,
    fit_exponential_growth,
    fit_linear,
    fit_power,
    fit_two_regime_power_law,
)
from .io import (
    RunConfig,
    parse_snapshot_dir,
    read_config,
    read_domestic_list,
    read_merge_map,
    read_points,
    read_snapshot_file,
    read_traffic,
)
from .reports import (
    SCHEMA_VERSION,
    dumps,
    evolution_block,
    evolution_csv,
    metrics_block,
    metrics_csv,
    run_report,
    traffic_block,
)

log = logging.getLogger("airnet")

FITS = {
    "two-regime": fit_two_regime_power_law,
    "exponential": fit_exponential,
    "power": fit_power,
    "linear": fit_linear,
    "growth": fit_exponential_growth,
}


def _graph_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--merge-map", type=Path, help="CSV raw_code,city_code")
    p.add_argument("--domestic", type=Path, help="domestic airport list, one code per line")


def _metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--binning-base", type=float, default=1.5)
    p.add_argument("--clustering", choices=("zero", "exclude"), default="zero",
                   help="how nodes with k < 2 enter the mean clustering")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="per-snapshot statistics")
    p.add_argument("snapshot", type=Path)
    _graph_inputs(p)
    _metric_flags(p)
    p.add_argument("--betweenness", choices=("raw", "normalized"), default="raw")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("evolve", help="per-period table over a snapshot directory")
    p.add_argument("directory", type=Path)
    _graph_inputs(p)
    _metric_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("diff", help="turnover between two snapshots")
    p.add_argument("earlier", type=Path)
    p.add_argument("later", type=Path)
    _graph_inputs(p)
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("traffic", help="traffic analyses of a traffic CSV")
    p.add_argument("file", type=Path)
    p.add_argument("--snapshots", type=Path, help="snapshot directory for strength and per-node traffic")
    _graph_inputs(p)
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("fit", help="fit a model to an x,y CSV")
    p.add_argument("kind", choices=sorted(FITS))
    p.add_argument("file", type=Path)
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("report", help="full batch report from a key=value config")
    p.add_argument("config", type=Path)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--output-dir", type=Path)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit generated_at so reports are byte-identical across runs")
    return parser


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8")


def _load_graph_inputs(args):
    merge = read_merge_map(args.merge_map) if args.merge_map else None
    domestic = read_domestic_list(args.domestic) if args.domestic else None
    return merge, domestic


def _existing(*paths: Path | None) -> None:
    for p in paths:
        if p is not None and not p.exists():
            raise ConfigError(f"path does not exist: {p}")


def cmd_metrics(args) -> None:
    _existing(args.snapshot, args.merge_map, args.domestic)
    merge, domestic = _load_graph_inputs(args)
    g = read_snapshot_file(args.snapshot, merge, domestic)
    block = metrics_block(g, args.binning_base, args.betweenness, args.clustering, args.workers)
    _emit(dumps(block) if args.format == "json" else metrics_csv(block), args.output)


def cmd_evolve(args) -> None:
    _existing(args.merge_map, args.domestic)
    merge, domestic = _load_graph_inputs(args)
    snapshots = parse_snapshot_dir(args.directory, merge, domestic)
    table = evolution_table(snapshots, args.binning_base, args.clustering, args.workers)
    _emit(evolution_csv(table) if args.format == "csv" else dumps(evolution_block(table)),
          args.output)


def cmd_diff(args) -> None:
    _existing(args.earlier, args.later, args.merge_map, args.domestic)
    merge, domestic = _load_graph_inputs(args)
    a = read_snapshot_file(args.earlier, merge, domestic)
    b = read_snapshot_file(args.later, merge, domestic)
    _emit(dumps({"schema_version": SCHEMA_VERSION, **diff_snapshots(a, b).to_dict()}),
          args.output)


def cmd_traffic(args) -> None:
    _existing(args.file, args.snapshots, args.merge_map, args.domestic)
    merge, domestic = _load_graph_inputs(args)
    traffic = read_traffic(args.file)
    snapshots = parse_snapshot_dir(args.snapshots, merge, domestic) if args.snapshots else []
    _emit(dumps(traffic_block(traffic, snapshots, merge)), args.output)


def cmd_fit(args) -> None:
    _existing(args.file)
    points = read_points(args.file)
    fit = FITS[args.kind](points)
    _emit(dumps({"schema_version": SCHEMA_VERSION, **fit.to_dict()}), args.output)


def cmd_report(args) -> None:
    config = read_config(args.config)
    overrides = dict(_split(s) for s in args.set)
    if args.output_dir is not None:
        overrides["output_dir"] = str(args.output_dir)
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    if args.no_timestamp:
        overrides["timestamp"] = "false"
    config = config.with_overrides(overrides)
    manifest = run_report(config)
    log.info("wrote %d files to %s", len(manifest["files"]), config.output_dir)


def _split(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
    key, value = item.split("=", 1)
    return key.strip(), value.strip()


COMMANDS = {
    "metrics": cmd_metrics,
    "evolve": cmd_evolve,
    "diff": cmd_diff,
    "traffic": cmd_traffic,
    "fit": cmd_fit,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except AirnetError as exc:
        print(f"airnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
