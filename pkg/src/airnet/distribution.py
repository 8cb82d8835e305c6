"""Empirical distribution tables (pdf / ccdf) and logarithmic binning."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class DistributionTable:
    """Sorted ``(x, p)`` entries.

    ``binning`` is ``"raw"`` or ``"log"``.  Raw pdfs are probability masses
    summing to one.  Log-binned pdfs hold the mean mass per integer value in
    each geometric bin, so ``sum(p * width)`` is one instead; ``widths``
    records the number of integers per bin.
    """

    entries: tuple[tuple[float, float], ...]
    kind: str = "pdf"
    binning: str = "raw"
    base: float | None = None
    widths: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("pdf", "ccdf"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        xs = [x for x, _ in self.entries]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("distribution x values must be strictly increasing")

    @property
    def x(self) -> list[float]:
        return [x for x, _ in self.entries]

    @property
    def p(self) -> list[float]:
        return [p for _, p in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "binning": self.binning,
            "entries": [[x, p] for x, p in self.entries],
        }
        if self.base is not None:
            out["base"] = self.base
        if self.widths is not None:
            out["widths"] = list(self.widths)
        return out


def pdf(values: Iterable[float]) -> DistributionTable:
    counts = Counter(values)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("cannot build a distribution from no values")
    return DistributionTable(tuple((x, counts[x] / total) for x in sorted(counts)))


def ccdf(values: Iterable[float]) -> DistributionTable:
    """``P(X >= x)`` at each distinct observed value."""
    counts = Counter(values)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("cannot build a distribution from no values")
    entries = []
    remaining = total
    for x in sorted(counts):
        entries.append((x, remaining / total))
        remaining -= counts[x]
    return DistributionTable(tuple(entries), kind="ccdf")


def log_bin(table: DistributionTable, base: float = 1.5) -> DistributionTable:
    """Average an integer-valued raw pdf over geometric bins.

    Bins are ``[base**i, base**(i+1))`` starting at 1; bins containing no
    integer are skipped, as are empty bins.  Values below 1 are dropped.
    Each bin is placed at the geometric mean of its smallest and largest
    integer.
    """
    if table.kind != "pdf" or table.binning != "raw":
        raise ValueError("log binning needs a raw pdf")
    if base <= 1:
        raise ValueError(f"log-binning base must exceed 1, got {base}")
    mass = {int(x): p for x, p in table.entries if x >= 1}
    if not mass:
        return DistributionTable((), binning="log", base=base, widths=())
    top = max(mass)
    entries, widths = [], []
    i = 0
    while True:
        lo = math.ceil(base**i - 1e-9)
        hi = math.ceil(base ** (i + 1) - 1e-9) - 1
        i += 1
        if lo > top:
            break
        if hi < lo:
            continue
        total = sum(mass.get(k, 0.0) for k in range(lo, hi + 1))
        if total > 0:
            width = hi - lo + 1
            entries.append((math.sqrt(lo * hi), total / width))
            widths.append(width)
    return DistributionTable(tuple(entries), binning="log", base=base, widths=tuple(widths))
