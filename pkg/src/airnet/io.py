"""Readers for snapshot, merge-map, domestic-list, traffic and config files.

Every parse failure raises :class:`~airnet.errors.ParseError` with a
``path:line`` location.
"""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, IngestError, ParseError
from .graph import GraphSnapshot, PeriodLabel, build_snapshot, canonical_code
from .traffic import Observation, TrafficDate, TrafficSeries

_META_RE = re.compile(r"^#\s*(\w+)\s*=\s*(.*?)\s*$")


def _lines(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            yield lineno, line.rstrip("\r\n")


def read_snapshot_file(
    path: str | Path,
    merge_map: Mapping[str, str] | None = None,
    domestic: set[str] | None = None,
    period: PeriodLabel | None = None,
) -> GraphSnapshot:
    """Read one ``src,dst`` CSV.

    ``# period=2009H1`` sets the period (else the file stem is parsed) and
    ``# nodes=AAA;BBB`` lists isolated airports.
    """
    path = Path(path)
    records = []
    isolated: list[str] = []
    header_seen = False
    for lineno, line in _lines(path):
        where = f"{path}:{lineno}"
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _META_RE.match(stripped)
            if m and m.group(1).lower() == "period" and period is None:
                try:
                    period = PeriodLabel.parse(m.group(2))
                except ParseError as exc:
                    raise ParseError(str(exc), where) from None
            elif m and m.group(1).lower() == "nodes":
                isolated.extend(c for c in re.split(r"[;,\s]+", m.group(2)) if c)
            continue
        cells = [c.strip() for c in next(csv.reader([stripped]))]
        if not header_seen:
            header_seen = True
            if [c.lower() for c in cells] != ["src", "dst"]:
                raise ParseError(f"expected header 'src,dst', got {stripped!r}", where)
            continue
        if len(cells) != 2 or not all(cells):
            raise ParseError(f"expected 'src,dst', got {stripped!r}", where)
        records.append((cells[0], cells[1]))
    if not header_seen:
        raise ParseError("missing 'src,dst' header", str(path))
    if period is None:
        if not _valid(path.stem):
            raise ParseError(f"no period comment and file name {path.name!r} is not a period", str(path))
        period = PeriodLabel.parse(path.stem)
    try:
        return build_snapshot(records, merge_map, domestic, period, isolated)
    except IngestError as exc:
        raise IngestError(str(exc), str(path)) from None


def _valid(text: str) -> bool:
    try:
        PeriodLabel.parse(text)
    except ParseError:
        return False
    return True


def parse_snapshot_dir(
    path: str | Path,
    merge_map: Mapping[str, str] | None = None,
    domestic: set[str] | None = None,
) -> list[GraphSnapshot]:
    """All ``*.csv`` snapshots in a directory, sorted by period."""
    path = Path(path)
    if not path.is_dir():
        raise ConfigError(f"snapshot directory not found: {path}")
    files = sorted(path.glob("*.csv"))
    if not files:
        raise ParseError("no snapshot files", str(path))
    seen: dict[PeriodLabel, Path] = {}
    snapshots = []
    for f in files:
        g = read_snapshot_file(f, merge_map, domestic)
        if g.period in seen:
            raise ParseError(f"duplicate period {g.period} (also in {seen[g.period].name})", str(f))
        seen[g.period] = f
        snapshots.append(g)
    return sorted(snapshots, key=lambda g: g.period)


def read_merge_map(path: str | Path) -> dict[str, str]:
    path = Path(path)
    out: dict[str, str] = {}
    header_seen = False
    for lineno, line in _lines(path):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in stripped.split(",")]
        where = f"{path}:{lineno}"
        if not header_seen:
            header_seen = True
            if [c.lower() for c in cells] != ["raw_code", "city_code"]:
                raise ParseError(f"expected header 'raw_code,city_code', got {stripped!r}", where)
            continue
        if len(cells) != 2 or not all(cells):
            raise ParseError(f"expected 'raw_code,city_code', got {stripped!r}", where)
        raw = canonical_code(cells[0])
        if raw in out and out[raw] != canonical_code(cells[1]):
            raise ParseError(f"conflicting mapping for {raw}", where)
        out[raw] = canonical_code(cells[1])
    return out


def read_domestic_list(path: str | Path) -> set[str]:
    path = Path(path)
    codes = set()
    for lineno, line in _lines(path):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "," in stripped or " " in stripped:
            raise ParseError(f"expected one airport code per line, got {stripped!r}",
                             f"{path}:{lineno}")
        codes.add(canonical_code(stripped))
    return codes


_TRAFFIC_REQUIRED = ("date", "scope", "passengers")


def read_traffic(path: str | Path) -> dict[str, TrafficSeries]:
    """Traffic CSV keyed by scope (``NATIONAL`` or an airport code).

    Cargo comes from ``cargo_tonnes`` or, converted, from ``cargo_kg``.
    """
    path = Path(path)
    content = [(n, line) for n, line in _lines(path)
               if line.strip() and not line.lstrip().startswith("#")]
    if not content:
        raise ParseError("empty traffic file", str(path))
    header_line, header = content[0]
    cols = [c.strip().lower() for c in next(csv.reader([header]))]
    missing = [c for c in _TRAFFIC_REQUIRED if c not in cols]
    cargo_col = "cargo_tonnes" if "cargo_tonnes" in cols else (
        "cargo_kg" if "cargo_kg" in cols else None)
    if missing or cargo_col is None:
        raise ParseError(
            "traffic header needs date,scope,passengers,cargo_tonnes[,gdp]",
            f"{path}:{header_line}")
    rows: dict[str, list[Observation]] = defaultdict(list)
    for lineno, line in content[1:]:
        where = f"{path}:{lineno}"
        cells = next(csv.reader([line]))
        if len(cells) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(cells)}", where)
        row = dict(zip(cols, (c.strip() for c in cells)))
        try:
            date = TrafficDate.parse(row["date"])
            cargo = float(row[cargo_col])
            if cargo_col == "cargo_kg":
                cargo /= 1000.0
            gdp = row.get("gdp")
            obs = Observation(date, float(row["passengers"]), cargo,
                              float(gdp) if gdp else None)
            scope = canonical_code(row["scope"])
        except ValueError as exc:
            raise ParseError(str(exc), where) from None
        except IngestError:
            raise ParseError("empty scope", where) from None
        rows[scope].append(obs)
    out = {}
    for scope, obs in rows.items():
        try:
            if len({o.date for o in obs}) != len(obs):
                raise ValueError(f"{scope}: duplicate dates")
            out[scope] = TrafficSeries(scope, sorted(obs, key=lambda o: o.date))
        except ValueError as exc:
            raise ParseError(str(exc), str(path)) from None
    return out


def read_points(path: str | Path) -> list[tuple[float, float]]:
    """Two-column numeric CSV (``x,y``); a non-numeric first row is a header."""
    path = Path(path)
    points = []
    for lineno, line in _lines(path):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in stripped.split(",")]
        try:
            if len(cells) != 2:
                raise ValueError
            points.append((float(cells[0]), float(cells[1])))
        except ValueError:
            if not points and lineno == _first_content_line(path):
                continue
            raise ParseError(f"expected two numbers, got {stripped!r}", f"{path}:{lineno}") from None
    return points


def _first_content_line(path: Path) -> int:
    for lineno, line in _lines(path):
        if line.strip() and not line.strip().startswith("#"):
            return lineno
    return 0


# --- run configuration -------------------------------------------------------

BETWEENNESS_SCALES = ("raw", "normalized")
REPORT_FORMATS = ("json", "csv")
SEASONAL_MODELS = ("multiplicative",)


@dataclass(frozen=True)
class RunConfig:
    snapshot_dir: Path | None = None
    merge_map: Path | None = None
    domestic: Path | None = None
    traffic: Path | None = None
    output_dir: Path = Path("report")
    binning_base: float = 1.5
    betweenness: str = "raw"
    clustering: str = "zero"
    seasonal_model: str = "multiplicative"
    format: str = "json"
    workers: int = 1
    timestamp: bool = True

    def validate(self) -> "RunConfig":
        if self.snapshot_dir is None:
            raise ConfigError("snapshot_dir is required")
        for name in ("snapshot_dir", "merge_map", "domestic", "traffic"):
            p = getattr(self, name)
            if p is not None and not p.exists():
                raise ConfigError(f"{name}: path does not exist: {p}")
        if self.binning_base <= 1:
            raise ConfigError(f"binning_base must exceed 1, got {self.binning_base}")
        _choice("betweenness", self.betweenness, BETWEENNESS_SCALES)
        _choice("clustering", self.clustering, ("zero", "exclude"))
        _choice("seasonal_model", self.seasonal_model, SEASONAL_MODELS)
        _choice("format", self.format, REPORT_FORMATS)
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    def with_overrides(self, overrides: Mapping[str, str]) -> "RunConfig":
        return replace(self, **_coerce(overrides, "command line"))


def _choice(name, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {', '.join(allowed)}, got {value!r}")


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(raw: Mapping[str, str], where: str, base: Path | None = None) -> dict:
    types = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    for key, value in raw.items():
        if key not in types:
            raise ConfigError(f"{where}: unknown config key {key!r}")
        kind = types[key]
        try:
            if "Path" in kind:
                p = Path(value)
                out[key] = p if p.is_absolute() or base is None else base / p
            elif kind == "float":
                out[key] = float(value)
            elif kind == "int":
                out[key] = int(value)
            elif kind == "bool":
                out[key] = _BOOL[value.strip().lower()]
            else:
                out[key] = value.strip()
        except (ValueError, KeyError):
            raise ConfigError(f"{where}: invalid value for {key}: {value!r}") from None
    return out


def read_config(path: str | Path) -> RunConfig:
    """Flat ``key = value`` file; relative paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = {}
    for lineno, line in _lines(path):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, value = (s.strip() for s in stripped.split("=", 1))
        raw[key] = value
    return RunConfig(**_coerce(raw, str(path), path.parent))
