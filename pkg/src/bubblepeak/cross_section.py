"""Cross-sectional statistics: price-multiplier regression, yields,
Pearson correlation with a Fisher-z interval, and growth ratios."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from bubblepeak.ingest import SPACING_TOL, DataError, Period, PriceSeries


@dataclass(frozen=True)
class ClassAmplitude:
    class_label: str
    p1: float
    A1: float

    def __post_init__(self):
        if not self.p1 > 0:
            raise ValueError(f"p1 must be positive, got {self.p1}")
        if not self.A1 >= 1:
            raise ValueError(f"amplitude must be >= 1, got {self.A1}")


def load_class_amplitudes(path: Union[str, Path]) -> list[ClassAmplitude]:
    """Read ``class_label,p1,A1`` rows (comma or tab delimited, header required)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    delim = "\t" if "\t" in lines[0] else ","
    out = []
    for lineno, row in enumerate(csv.DictReader(lines, delimiter=delim), start=2):
        try:
            out.append(ClassAmplitude(row["class_label"].strip(), float(row["p1"]), float(row["A1"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad class row: {exc}", line=lineno) from None
    return out


@dataclass(frozen=True)
class Correlation:
    r: float
    ci: tuple
    n: int
    level: float

    def to_dict(self) -> dict:
        return {"r": self.r, "ci": list(self.ci), "n": self.n, "level": self.level}


def fisher_ci(r: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Interval for a Pearson r from the Fisher z-transform, tanh(atanh(r) -+ q / sqrt(n - 3))."""
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if abs(r) >= 1:
        return (float(r), float(r))
    if n <= 3:
        return (-1.0, 1.0)
    q = stats.norm.ppf(0.5 + level / 2)
    z = math.atanh(r)
    half = q / math.sqrt(n - 3)
    return (math.tanh(z - half), math.tanh(z + half))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DataError("zero variance; correlation undefined")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation(xs: Sequence[float], ys: Sequence[float], level: float = 0.95) -> Correlation:
    if len(xs) != len(ys):
        raise DataError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 4:
        raise DataError(f"need at least 4 pairs, got {len(xs)}")
    r = pearson(xs, ys)
    return Correlation(r=r, ci=fisher_ci(r, len(xs), level), n=len(xs), level=level)


@dataclass(frozen=True)
class MultiplierFit:
    """Amplitude regressed on log initial price, A1 = m ln(p1) + b.

    ``stderr_m`` is one classical OLS standard error of the slope.
    """

    m: float
    b: float
    r: float
    r_ci: tuple
    stderr_m: float
    n: int

    def to_dict(self) -> dict:
        return {
            "m": self.m, "b": self.b, "r": self.r, "r_ci": list(self.r_ci),
            "stderr_m": self.stderr_m, "stderr_convention": "one standard error", "n": self.n,
        }


def multiplier_fit(points: Sequence[ClassAmplitude], level: float = 0.95) -> MultiplierFit:
    n = len(points)
    if n < 3:
        raise DataError(f"need at least 3 classes, got {n}")
    x = np.log([pt.p1 for pt in points])
    y = np.array([pt.A1 for pt in points])
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DataError("all classes share the same initial price")
    m = float(dx @ (y - y.mean())) / sxx
    b = float(y.mean() - m * x.mean())
    resid = y - (b + m * x)
    stderr = math.sqrt(float(resid @ resid) / (n - 2) / sxx)
    dy = y - y.mean()
    if float(dy @ dy) == 0:
        r = 0.0
    else:
        r = min(1.0, max(-1.0, float(dx @ dy) / math.sqrt(sxx * float(dy @ dy))))
    return MultiplierFit(m=m, b=b, r=r, r_ci=fisher_ci(r, n, level), stderr_m=stderr, n=n)


def two_point_slope(a: ClassAmplitude, b: ClassAmplitude) -> float:
    """Multiplier slope from two observations, e.g. one size class in two locations."""
    d = math.log(b.p1) - math.log(a.p1)
    if d == 0:
        raise DataError("identical initial prices")
    return (b.A1 - a.A1) / d


def mean_m(values: Sequence[float]) -> float:
    if len(values) == 0:
        raise ValueError("mean of an empty list")
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class YieldPoint:
    t: float
    rent: float
    price: float
    yield_: float
    per: float

    def to_dict(self) -> dict:
        return {"t": self.t, "rent": self.rent, "price": self.price, "yield": self.yield_, "per": self.per}


def yield_point(t: float, rent: float, price: float) -> YieldPoint:
    if rent <= 0:
        raise DataError(f"rent must be positive at t={t}")
    if price <= 0:
        raise DataError(f"price must be positive at t={t}")
    return YieldPoint(t=t, rent=rent, price=price, yield_=rent / price, per=price / rent)


def yield_series(prices: PriceSeries, rents: PriceSeries) -> list[YieldPoint]:
    """Gross yield (annual rent / price) and its inverse, the PER, point by point."""
    if prices.frequency != rents.frequency or len(prices) != len(rents):
        raise DataError("price and rent series are not aligned")
    if prices.basis != rents.basis:
        raise DataError(f"price basis {prices.basis} differs from rent basis {rents.basis}")
    for a, b in zip(prices.times, rents.times):
        if abs(a - b) > SPACING_TOL:
            raise DataError(f"time stamps differ: {a} vs {b}")
    return [yield_point(t, r, p) for t, r, p in zip(prices.times, rents.values, prices.values)]


@dataclass(frozen=True)
class GrowthRatio:
    g1: float
    g2: float
    ratio: Optional[float]  # None when g1 == 0

    def to_dict(self) -> dict:
        return {"g1": self.g1, "g2": self.g2, "ratio": self.ratio}


def annual_growth(v_start: float, v_end: float, years: float) -> float:
    """Compound average annual change, (v_end / v_start) ** (1 / years) - 1."""
    if years <= 0:
        raise DataError("span must have positive length")
    if v_start <= 0 or v_end <= 0:
        raise DataError("growth needs positive values")
    return (v_end / v_start) ** (1.0 / years) - 1.0


def _span_time(series: PriceSeries, x) -> float:
    return Period.parse(x).to_time() if isinstance(x, str) else float(x)


def growth_ratio(series: PriceSeries, span1: tuple, span2: tuple) -> GrowthRatio:
    """Compound annual growth over two spans and their ratio g2 / g1.

    Span endpoints are decimal years or period strings and must match
    observations of ``series``.
    """
    g = []
    for span in (span1, span2):
        a, b = (_span_time(series, x) for x in span)
        try:
            va, vb = series.value_at(a), series.value_at(b)
        except KeyError as exc:
            raise DataError(f"span {span} not covered by {series.label!r}: {exc}") from None
        g.append(annual_growth(va, vb, b - a))
    return GrowthRatio(g1=g[0], g2=g[1], ratio=g[1] / g[0] if g[0] != 0 else None)
