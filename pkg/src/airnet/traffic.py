"""Traffic analytics: strength distributions, strength-degree coupling,
growth and seasonality of monthly series, and series correlations.

Cargo is held in tonnes throughout.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .distribution import DistributionTable, ccdf
from .errors import (
    AlignmentError,
    DomainError,
    InsufficientDataError,
    JoinError,
    MappingError,
)
from .fitting import GrowthFit, LinearFit, PowerFit, fit_exponential_growth, fit_linear, fit_power
from .graph import GraphSnapshot, PeriodLabel, canonical_code

FIELDS = ("passengers", "cargo", "gdp")
NATIONAL = "NATIONAL"
_DATE_RE = re.compile(r"^\s*(\d{4})(?:-(\d{1,2}))?\s*$")


@dataclass(frozen=True, order=True)
class TrafficDate:
    """A year, or a year and month.  ``month == 0`` marks an annual value."""

    year: int
    month: int = 0

    def __post_init__(self):
        if not 0 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "TrafficDate":
        m = _DATE_RE.match(text)
        if not m:
            raise ValueError(f"invalid date {text!r}, expected YYYY or YYYY-MM")
        month = int(m.group(2)) if m.group(2) else 0
        if m.group(2) and not 1 <= month <= 12:
            raise ValueError(f"invalid month in {text!r}")
        return cls(int(m.group(1)), month)

    @property
    def monthly(self) -> bool:
        return self.month != 0

    def index(self) -> int:
        """Months since year 0 (monthly) or the year itself (annual)."""
        return self.year * 12 + self.month - 1 if self.monthly else self.year

    def __str__(self) -> str:
        return f"{self.year}-{self.month:02d}" if self.monthly else str(self.year)


@dataclass(frozen=True)
class Observation:
    date: TrafficDate
    passengers: float
    cargo: float
    gdp: float | None = None


@dataclass(frozen=True)
class TrafficSeries:
    scope: str
    observations: tuple[Observation, ...]

    def __post_init__(self):
        object.__setattr__(self, "scope", canonical_code(self.scope))
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        for a, b in zip(obs, obs[1:]):
            if not a.date < b.date:
                raise ValueError(f"{self.scope}: dates not strictly increasing at {b.date}")
        for o in obs:
            for name in FIELDS:
                v = getattr(o, name)
                if v is not None and v < 0:
                    raise ValueError(f"{self.scope} {o.date}: negative {name}")

    @property
    def dates(self) -> list[TrafficDate]:
        return [o.date for o in self.observations]

    def values(self, name: str) -> list[float]:
        if name not in FIELDS:
            raise ValueError(f"unknown traffic field {name!r}")
        return [getattr(o, name) for o in self.observations]

    def mapping(self, name: str) -> dict[TrafficDate, float]:
        return {o.date: getattr(o, name) for o in self.observations if getattr(o, name) is not None}

    def at(self, date: TrafficDate) -> Observation | None:
        for o in self.observations:
            if o.date == date:
                return o
        return None


# --- strength ---------------------------------------------------------------


@dataclass(frozen=True)
class StrengthRecord:
    node: str
    s_passenger: float
    s_cargo: float
    k: int


@dataclass(frozen=True)
class StrengthTable:
    records: tuple[StrengthRecord, ...]
    passenger_ccdf: DistributionTable
    cargo_ccdf: DistributionTable


def strength_table(
    traffic: Iterable[TrafficSeries],
    g: GraphSnapshot,
    merge_map: Mapping[str, str] | None = None,
    year: int | None = None,
) -> StrengthTable:
    """Join per-airport annual throughput to the degrees of snapshot ``g``.

    Airports merged into one city are summed.  Every airport-scoped series
    must resolve to a node of ``g``; the offending codes are listed in the
    :class:`JoinError` otherwise.
    """
    year = g.period.year if year is None else year
    if year != g.period.year:
        raise JoinError(f"traffic year {year} does not match snapshot {g.period}")
    table = {canonical_code(k): canonical_code(v) for k, v in (merge_map or {}).items()}
    totals: dict[str, list[float]] = defaultdict(lambda: [0.0, 0.0])
    unknown = set()
    for series in traffic:
        if series.scope == NATIONAL:
            continue
        obs = series.at(TrafficDate(year))
        if obs is None:
            continue
        city = table.get(series.scope, series.scope)
        if city not in g.nodes:
            unknown.add(series.scope)
            continue
        totals[city][0] += obs.passengers
        totals[city][1] += obs.cargo
    if unknown:
        raise JoinError(
            f"traffic for airports not in snapshot {g.period}: {', '.join(sorted(unknown))}",
            sorted(unknown),
        )
    if not totals:
        raise InsufficientDataError(f"no airport traffic for year {year}")
    view = g.undirected
    records = tuple(
        StrengthRecord(n, totals[n][0], totals[n][1], view.degree(n)) for n in sorted(totals)
    )
    return StrengthTable(
        records,
        ccdf(r.s_passenger for r in records),
        ccdf(r.s_cargo for r in records),
    )


def strength_degree_fit(
    records: Sequence[StrengthRecord], field: str = "passenger", binned: bool = True
) -> PowerFit:
    """Fit ``s = c * k**beta``.

    Records with ``s <= 0`` or ``k <= 0`` are dropped and counted in
    ``n_excluded``.  By default the fit runs on the mean strength of each
    degree class; ``binned=False`` fits the raw node scatter.
    """
    attr = {"passenger": "s_passenger", "passengers": "s_passenger",
            "cargo": "s_cargo"}[field]
    usable = [(r.k, getattr(r, attr)) for r in records if r.k > 0 and getattr(r, attr) > 0]
    excluded = len(records) - len(usable)
    if not usable:
        raise InsufficientDataError("no records with positive degree and strength")
    if binned:
        classes: dict[int, list[float]] = defaultdict(list)
        for k, s in usable:
            classes[k].append(s)
        points = [(k, math.fsum(v) / len(v)) for k, v in sorted(classes.items())]
    else:
        points = sorted(usable)
    if len(points) < 3:
        raise InsufficientDataError(f"strength fit needs 3 points, got {len(points)}")
    fit = fit_power(points)
    return PowerFit(fit.c, fit.beta, fit.r2, fit.n_points, excluded)


# --- seasonality -----------------------------------------------------------


@dataclass(frozen=True)
class SeasonalDecomposition:
    """Multiplicative decomposition ``obs = trend * index[month] * residual``.

    ``trend`` and ``residuals`` are NaN where the centred average is not
    defined (six months at either end).  ``indices[m]`` is the index of
    calendar month ``m + 1``.
    """

    dates: tuple[TrafficDate, ...]
    observed: np.ndarray
    trend: np.ndarray
    indices: np.ndarray
    residuals: np.ndarray
    outliers: tuple[TrafficDate, ...]

    def to_dict(self) -> dict:
        def clean(arr):
            return [None if math.isnan(v) else float(v) for v in arr]

        return {
            "dates": [str(d) for d in self.dates],
            "trend": clean(self.trend),
            "indices": [float(v) for v in self.indices],
            "residuals": clean(self.residuals),
            "outliers": [str(d) for d in self.outliers],
        }


def centered_moving_average(values: Sequence[float], period: int = 12) -> np.ndarray:
    """Centred moving average; even periods use half weights at the ends."""
    x = np.asarray(values, dtype=float)
    if period % 2 == 0:
        w = np.ones(period + 1)
        w[0] = w[-1] = 0.5
    else:
        w = np.ones(period)
    w /= period
    half = len(w) // 2
    out = np.full(len(x), np.nan)
    if len(x) >= len(w):
        out[half : len(x) - half] = np.convolve(x, w, mode="valid")
    return out


def seasonal_decompose(
    series: TrafficSeries, field: str = "passengers", mad_threshold: float = 3.0
) -> SeasonalDecomposition:
    dates = series.dates
    if any(not d.monthly for d in dates):
        raise DomainError(f"{series.scope}: seasonal decomposition needs monthly dates")
    for a, b in zip(dates, dates[1:]):
        if b.index() != a.index() + 1:
            raise DomainError(f"{series.scope}: gap in monthly series after {a}")
    if len(dates) < 24:
        raise InsufficientDataError(
            f"{series.scope}: seasonal decomposition needs 24 months, got {len(dates)}"
        )
    obs = np.asarray(series.values(field), dtype=float)
    if np.any(~(obs > 0)):
        raise DomainError(f"{series.scope}: {field} must be positive for a multiplicative model")
    trend = centered_moving_average(obs, 12)
    ratio = obs / trend
    months = np.array([d.month - 1 for d in dates])
    raw = np.array([np.nanmean(ratio[months == m]) for m in range(12)])
    indices = raw / raw.mean()
    residuals = obs / (trend * indices[months])
    logs = np.log(residuals)
    defined = ~np.isnan(logs)
    centre = np.median(logs[defined])
    mad = np.median(np.abs(logs[defined] - centre))
    flagged = defined & (np.abs(np.where(defined, logs, centre) - centre) > mad_threshold * mad)
    outliers = tuple(d for d, f in zip(dates, flagged) if f)
    return SeasonalDecomposition(tuple(dates), obs, trend, indices, residuals, outliers)


def trend_growth(decomposition: SeasonalDecomposition) -> GrowthFit:
    """Exponential growth fitted to the defined part of a trend, per month."""
    ok = ~np.isnan(decomposition.trend)
    t = np.arange(len(decomposition.trend), dtype=float)[ok]
    return fit_exponential_growth(t, decomposition.trend[ok])


def series_growth(series: TrafficSeries, field: str = "passengers") -> GrowthFit:
    """Exponential growth per date unit (month or year), epoch at the first date."""
    dates = series.dates
    vals = series.values(field)
    t0 = dates[0].index()
    return fit_exponential_growth([d.index() - t0 for d in dates], vals)


# --- correlations and normalisation -------------------------------------------


def correlate_series(
    a: TrafficSeries | Mapping,
    b: TrafficSeries | Mapping,
    a_field: str = "passengers",
    b_field: str = "cargo",
) -> LinearFit:
    """OLS of ``b`` on ``a`` over their common dates.

    ``a`` and ``b`` are series (with the field to read) or plain
    ``date -> value`` mappings.
    """
    xa = a.mapping(a_field) if isinstance(a, TrafficSeries) else dict(a)
    yb = b.mapping(b_field) if isinstance(b, TrafficSeries) else dict(b)
    common = sorted(set(xa) & set(yb))
    if not common:
        raise AlignmentError("series share no dates")
    return fit_linear([(xa[d], yb[d]) for d in common])


@dataclass(frozen=True)
class NormalizedTraffic:
    date: TrafficDate
    period: PeriodLabel
    value: float
    per_node: float
    per_link: float


def period_of(date: TrafficDate) -> PeriodLabel:
    if not date.monthly:
        raise MappingError(f"annual date {date} needs an explicit snapshot mapping")
    return PeriodLabel(date.year, 1 if date.month <= 6 else 2)


def per_link_per_node_traffic(
    series: TrafficSeries,
    snapshots: Sequence[GraphSnapshot] | Mapping[PeriodLabel, GraphSnapshot],
    field: str = "passengers",
    period_map: Mapping[TrafficDate, PeriodLabel] | None = None,
) -> list[NormalizedTraffic]:
    """Divide traffic by the node count and undirected link count of the
    snapshot covering each date.

    Monthly dates map to their half-year; annual dates must appear in
    ``period_map``.
    """
    if not isinstance(snapshots, Mapping):
        snapshots = {g.period: g for g in snapshots}
    out = []
    for o in series.observations:
        if period_map is not None and o.date in period_map:
            period = period_map[o.date]
        else:
            period = period_of(o.date)
        g = snapshots.get(period)
        if g is None:
            raise MappingError(f"no snapshot for period {period} (date {o.date})")
        value = getattr(o, field)
        links = g.undirected.edge_count
        out.append(
            NormalizedTraffic(
                o.date, period, value, value / g.n, value / links if links else math.nan
            )
        )
    return out
