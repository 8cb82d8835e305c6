"""Least-squares fits for the functional forms used in the analysis.

Log-linear models (power law, exponential growth, two-regime power law) are
fitted by ordinary least squares in log space.  The offset exponential
``y = A * exp(x / t1) + y0`` has no linearisation and is fitted with a
damped Gauss-Newton (Levenberg-Marquardt) iteration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .distribution import DistributionTable
from .errors import DegenerateError, DomainError, FitFailedError, InsufficientDataError


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    pearson_r: float
    n_points: int

    def to_dict(self) -> dict:
        return {"model": "linear", **asdict(self)}


@dataclass(frozen=True)
class PowerFit:
    c: float
    beta: float
    r2: float
    n_points: int
    n_excluded: int = 0

    def to_dict(self) -> dict:
        return {"model": "power", **asdict(self)}


@dataclass(frozen=True)
class TwoRegimeFit:
    lambda1: float
    lambda2: float
    k_break: float
    sse: float
    intercept1: float
    intercept2: float
    n_points: int

    def to_dict(self) -> dict:
        return {"model": "two_regime_power_law", **asdict(self)}


@dataclass(frozen=True)
class ExponentialFit:
    A: float
    t1: float
    y0: float
    rmse: float
    n_points: int
    iterations: int = 0

    def predict(self, x):
        return self.A * np.exp(np.asarray(x, dtype=float) / self.t1) + self.y0

    def to_dict(self) -> dict:
        return {"model": "exponential", **asdict(self)}


@dataclass(frozen=True)
class GrowthFit:
    T0: float
    rate: float
    rmse: float
    n_points: int

    def to_dict(self) -> dict:
        return {"model": "exponential_growth", **asdict(self)}


def _xy(points: Iterable[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(points), dtype=float)
    if arr.size == 0:
        return np.empty(0), np.empty(0)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    return arr[:, 0], arr[:, 1]


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and residual sum of squares of ``y ~ x``."""
    xm, ym = math.fsum(x) / len(x), math.fsum(y) / len(y)
    dx, dy = x - xm, y - ym
    sxx = math.fsum(dx * dx)
    slope = math.fsum(dx * dy) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    return slope, intercept, math.fsum(resid * resid)


def fit_linear(points) -> LinearFit:
    x, y = _xy(points)
    if len(x) < 2:
        raise InsufficientDataError(f"linear fit needs at least 2 points, got {len(x)}")
    xm = math.fsum(x) / len(x)
    if math.fsum((x - xm) ** 2) == 0:
        raise DegenerateError("linear fit: x has zero variance")
    slope, intercept, _ = _ols(x, y)
    return LinearFit(slope, intercept, _pearson(x, y), len(x))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - math.fsum(x) / len(x)
    dy = y - math.fsum(y) / len(y)
    sxx, syy = math.fsum(dx * dx), math.fsum(dy * dy)
    if sxx == 0 or syy == 0:
        return 0.0
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def fit_power(points) -> PowerFit:
    """``y = c * x**beta`` by OLS on ``(log x, log y)``."""
    x, y = _xy(points)
    if len(x) < 3:
        raise InsufficientDataError(f"power fit needs at least 3 points, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power fit needs strictly positive x and y")
    lx, ly = np.log(x), np.log(y)
    if math.fsum((lx - lx.mean()) ** 2) == 0:
        raise DegenerateError("power fit: all x values are equal")
    beta, a, sse = _ols(lx, ly)
    sst = math.fsum((ly - math.fsum(ly) / len(ly)) ** 2)
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return PowerFit(math.exp(a), beta, r2, len(x))


def fit_two_regime_power_law(dist: DistributionTable | Iterable) -> TwoRegimeFit:
    """Broken power law with an exhaustive breakpoint scan.

    Every interior entry is tried as the breakpoint.  The breakpoint belongs
    to both segments, each segment needs at least three points, and each is
    fitted by OLS in log-log space.  The candidate with the smallest total
    squared error wins; ties (up to rounding) go to the smaller breakpoint.
    """
    entries = dist.entries if isinstance(dist, DistributionTable) else list(dist)
    x, y = _xy(sorted(entries))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("two-regime fit needs strictly positive x and p")
    if len(x) < 6:
        raise InsufficientDataError(
            f"two-regime fit needs at least 6 positive entries, got {len(x)}"
        )
    lx, ly = np.log(x), np.log(y)
    best = None
    for b in range(2, len(x) - 2):
        s1, a1, e1 = _ols(lx[: b + 1], ly[: b + 1])
        s2, a2, e2 = _ols(lx[b:], ly[b:])
        sse = e1 + e2
        # SSEs within rounding of each other are ties; the earlier candidate stays
        if best is None or sse < best[0] - 1e-12 * max(1.0, best[0]):
            best = (sse, b, s1, a1, s2, a2)
    sse, b, s1, a1, s2, a2 = best
    return TwoRegimeFit(s1, s2, float(x[b]), max(sse, 0.0), a1, a2, len(x))


def two_regime_sse(dist, k_break: float) -> float:
    """Total log-space SSE with the breakpoint forced to ``k_break``."""
    entries = dist.entries if isinstance(dist, DistributionTable) else list(dist)
    x, y = _xy(sorted(entries))
    b = int(np.flatnonzero(x == k_break)[0])
    lx, ly = np.log(x), np.log(y)
    return _ols(lx[: b + 1], ly[: b + 1])[2] + _ols(lx[b:], ly[b:])[2]


def exponential_initial_guess(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Starting point for the offset exponential.

    The offset sits a little below the data, the scale comes from the spread
    between the first-quartile and the largest value, and the amplitude makes
    the curve pass through the largest value.
    """
    y_min, y_max = float(np.min(y)), float(np.max(y))
    spread = y_max - y_min
    if spread <= 0:
        raise DegenerateError("exponential fit: y is constant")
    y0 = y_min - 0.05 * spread
    y_q1 = float(np.percentile(y, 25))
    ratio = (y_max - y0) / (y_q1 - y0)
    if ratio <= 1:
        raise DegenerateError("exponential fit: cannot seed a growing branch")
    t1 = (float(np.max(x)) - float(np.min(x))) / math.log(ratio)
    A = (y_max - y0) / math.exp(float(np.max(x)) / t1)
    return A, t1, y0


def fit_exponential(
    points,
    initial: tuple[float, float, float] | None = None,
    max_iter: int = 500,
    rtol: float = 1e-10,
) -> ExponentialFit:
    """Fit ``y = A * exp(x / t1) + y0`` by Levenberg-Marquardt.

    Steps are only accepted when they lower the squared error, so the SSE
    sequence of accepted iterates is non-increasing.  Converges when an
    accepted step changes the SSE by less than ``rtol`` relative, or when no
    damped step can lower it any more.  Raises :class:`FitFailedError`
    (carrying the best iterate) after ``max_iter`` iterations.
    """
    x, y = _xy(points)
    if len(x) < 4:
        raise InsufficientDataError(f"exponential fit needs at least 4 points, got {len(x)}")
    if np.ptp(x) <= 0:
        raise DegenerateError("exponential fit: x has zero spread")
    theta = np.array(initial if initial is not None else exponential_initial_guess(x, y))

    def residuals(p):
        with np.errstate(over="ignore", invalid="ignore"):
            return y - (p[0] * np.exp(x / p[1]) + p[2])

    def sse_of(r):
        s = float(r @ r)
        return s if math.isfinite(s) else math.inf

    r = residuals(theta)
    sse = sse_of(r)
    if not math.isfinite(sse):
        raise DegenerateError("exponential fit: initial guess overflows")
    history = [sse]
    lam = 1e-3
    for it in range(1, max_iter + 1):
        A, t1, _ = theta
        e = np.exp(x / t1)
        J = np.column_stack([e, -A * x * e / (t1 * t1), np.ones_like(x)])
        JtJ = J.T @ J
        g = J.T @ r
        accepted = False
        while lam < 1e16:
            H = JtJ + lam * np.diag(np.maximum(np.diag(JtJ), 1e-300))
            try:
                step = np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            cand = theta + step
            if cand[1] == 0:
                lam *= 10
                continue
            r_new = residuals(cand)
            sse_new = sse_of(r_new)
            if sse_new < sse:
                accepted = True
                break
            lam *= 10
        if not accepted:
            return _exp_result(theta, sse, len(x), it)
        assert sse_new <= history[-1]
        change = (sse - sse_new) / max(sse, 1e-300)
        theta, r, sse = cand, r_new, sse_new
        history.append(sse)
        lam = max(lam / 10, 1e-12)
        if change < rtol or sse == 0:
            return _exp_result(theta, sse, len(x), it)
    raise FitFailedError(
        f"exponential fit did not converge in {max_iter} iterations",
        best=_exp_result(theta, sse, len(x), max_iter),
    )


def _exp_result(theta, sse, n, iterations) -> ExponentialFit:
    A, t1, y0 = (float(v) for v in theta)
    return ExponentialFit(A, t1, y0, math.sqrt(sse / n), n, iterations)


def fit_exponential_growth(times, values=None) -> GrowthFit:
    """``T(t) = T0 * exp(rate * t)`` by OLS on ``(t, log T)``.

    Takes either parallel ``times``/``values`` sequences or a single sequence
    of ``(t, value)`` pairs.  ``T0`` is the level at ``t = 0``.
    """
    if values is None:
        t, v = _xy(times)
    else:
        t, v = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    if len(t) < 4:
        raise InsufficientDataError(f"growth fit needs at least 4 observations, got {len(t)}")
    if np.any(v <= 0):
        raise DomainError("growth fit needs strictly positive observations")
    if np.ptp(t) == 0:
        raise DegenerateError("growth fit: all times are equal")
    lv = np.log(v)
    rate, a, _ = _ols(t, lv)
    T0 = math.exp(a)
    resid = v - T0 * np.exp(rate * t)
    return GrowthFit(T0, rate, math.sqrt(float(resid @ resid) / len(t)), len(t))
