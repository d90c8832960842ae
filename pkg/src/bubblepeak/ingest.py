"""Loading, validating and deflating index series from delimited text."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

FREQUENCIES = ("annual", "quarterly", "monthly")
BASES = ("nominal", "deflated")
PERIODS_PER_YEAR = {"annual": 1, "quarterly": 4, "monthly": 12}
SPACING_TOL = 1e-9

_ANNUAL_RE = re.compile(r"^(\d{4})$")
_QUARTER_RE = re.compile(r"^(\d{4})\s*[Qq](\d+)$")
_MONTH_RE = re.compile(r"^(\d{4})-(\d{1,2})$")


class DataError(ValueError):
    """Invalid input data. ``line`` is the 1-based file line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Period:
    """A calendar year, optionally narrowed to a quarter or a month."""

    year: int
    quarter: Optional[int] = None
    month: Optional[int] = None

    def __post_init__(self):
        if self.quarter is not None and self.month is not None:
            raise ValueError("a period has a quarter or a month, not both")
        if self.quarter is not None and not 1 <= self.quarter <= 4:
            raise ValueError(f"quarter must be in 1..4, got {self.quarter}")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @classmethod
    def parse(cls, text: str) -> "Period":
        """Parse ``YYYY``, ``YYYYQn`` or ``YYYY-MM``."""
        s = text.strip()
        if m := _ANNUAL_RE.match(s):
            return cls(int(m.group(1)))
        if m := _QUARTER_RE.match(s):
            return cls(int(m.group(1)), quarter=int(m.group(2)))
        if m := _MONTH_RE.match(s):
            return cls(int(m.group(1)), month=int(m.group(2)))
        raise ValueError(f"unrecognised period {text!r} (expected YYYY, YYYYQn or YYYY-MM)")

    @property
    def frequency(self) -> str:
        if self.quarter is not None:
            return "quarterly"
        if self.month is not None:
            return "monthly"
        return "annual"

    @property
    def index(self) -> int:
        """Zero-based position of the period inside its year."""
        if self.quarter is not None:
            return self.quarter - 1
        if self.month is not None:
            return self.month - 1
        return 0

    def to_time(self) -> float:
        """Mid-period decimal year (2003Q1 -> 2003.125, 2003 -> 2003.5)."""
        ppy = PERIODS_PER_YEAR[self.frequency]
        return self.year + (self.index + 0.5) / ppy

    @classmethod
    def from_time(cls, t: float, frequency: str) -> "Period":
        ppy = PERIODS_PER_YEAR[frequency]
        k = int(round(t * ppy - 0.5))
        year, idx = divmod(k, ppy)
        if frequency == "quarterly":
            return cls(year, quarter=idx + 1)
        if frequency == "monthly":
            return cls(year, month=idx + 1)
        return cls(year)

    def contains(self, other: "Period") -> bool:
        """True when ``other`` lies inside this period (same or finer granularity)."""
        if other.year != self.year:
            return False
        if self.frequency == "annual":
            return True
        if self.frequency == "quarterly":
            if other.frequency == "quarterly":
                return other.quarter == self.quarter
            if other.frequency == "monthly":
                return (other.month - 1) // 3 + 1 == self.quarter
            return False
        return other == self

    def __str__(self) -> str:
        if self.quarter is not None:
            return f"{self.year}Q{self.quarter}"
        if self.month is not None:
            return f"{self.year}-{self.month:02d}"
        return f"{self.year}"


def as_period(p: Union[Period, str]) -> Period:
    return p if isinstance(p, Period) else Period.parse(p)


@dataclass(frozen=True)
class DeflationRecord:
    cpi_label: str
    base: str

    def to_dict(self) -> dict:
        return {"cpi_label": self.cpi_label, "base": self.base}


@dataclass(frozen=True)
class PriceSeries:
    """An evenly spaced, strictly increasing sequence of non-negative observations.

    Times are mid-period decimal years. A deflated series must carry the
    :class:`DeflationRecord` describing the CPI and base period used.
    """

    label: str
    frequency: str
    basis: str
    times: tuple
    values: tuple
    deflation: Optional[DeflationRecord] = None

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.frequency not in FREQUENCIES:
            raise ValueError(f"frequency must be one of {FREQUENCIES}, got {self.frequency!r}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.basis == "deflated" and self.deflation is None:
            raise ValueError("a deflated series needs a deflation record")
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        for v in self.values:
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"values must be finite and non-negative, got {v}")
        step = self.step
        for a, b in zip(self.times, self.times[1:]):
            if abs((b - a) - step) > SPACING_TOL:
                raise ValueError(
                    f"observations at {a} and {b} are not one {self.frequency} period apart"
                )

    @property
    def step(self) -> float:
        return 1.0 / PERIODS_PER_YEAR[self.frequency]

    @property
    def t(self) -> np.ndarray:
        return np.array(self.times)

    @property
    def v(self) -> np.ndarray:
        return np.array(self.values)

    def __len__(self) -> int:
        return len(self.times)

    def periods(self) -> list[Period]:
        return [Period.from_time(t, self.frequency) for t in self.times]

    def with_values(self, values: Sequence[float], **changes) -> "PriceSeries":
        return replace(self, values=tuple(values), **changes)

    def between(self, start: float, end: float) -> "PriceSeries":
        """Observations with ``start <= t <= end`` (SPACING_TOL slack on both ends)."""
        keep = [
            i for i, t in enumerate(self.times)
            if start - SPACING_TOL <= t <= end + SPACING_TOL
        ]
        return replace(
            self,
            times=tuple(self.times[i] for i in keep),
            values=tuple(self.values[i] for i in keep),
        )

    def value_at(self, t: float) -> float:
        """Observation at time ``t``; raises KeyError when there is none."""
        i = self.index_of(t)
        return self.values[i]

    def index_of(self, t: float) -> int:
        if self.times:
            i = int(round((t - self.times[0]) / self.step))
            if 0 <= i < len(self.times) and abs(self.times[i] - t) <= SPACING_TOL:
                return i
        raise KeyError(f"no observation at t={t}")

    def metadata(self) -> dict:
        return {
            "label": self.label,
            "frequency": self.frequency,
            "basis": self.basis,
            "deflation": self.deflation.to_dict() if self.deflation else None,
        }

    @classmethod
    def from_periods(cls, label, periods, values, basis="nominal", deflation=None) -> "PriceSeries":
        periods = [as_period(p) for p in periods]
        freqs = {p.frequency for p in periods}
        if len(freqs) != 1:
            raise ValueError(f"periods mix frequencies: {sorted(freqs)}")
        return cls(
            label=label,
            frequency=freqs.pop(),
            basis=basis,
            times=tuple(p.to_time() for p in periods),
            values=tuple(values),
            deflation=deflation,
        )


@dataclass(frozen=True)
class Schema:
    """Column mapping for :func:`load_series`."""

    period_col: str
    value_col: str
    label: Optional[str] = None
    basis: str = "nominal"
    deflation: Optional[DeflationRecord] = None
    delimiter: Optional[str] = None


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _detect_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def load_series(path: Union[str, Path], schema: Schema) -> PriceSeries:
    """Read one series from a comma- or tab-delimited file with a header row.

    Rows may come in any order; duplicate periods, gaps, mixed
    frequencies and unparseable rows raise :class:`DataError`. When a JSON
    sidecar written by :func:`write_series` sits next to the file, its label,
    basis and deflation record take precedence over ``schema``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataError(f"{path}: empty file")
    delimiter = schema.delimiter or _detect_delimiter(lines[0])
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    for col in (schema.period_col, schema.value_col):
        if col not in header:
            raise DataError(f"{path}: column {col!r} not in header {header}", line=1)
    pi, vi = header.index(schema.period_col), header.index(schema.value_col)

    rows: dict[Period, float] = {}
    first_line: dict[Period, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) <= max(pi, vi):
            raise DataError(f"expected at least {max(pi, vi) + 1} fields, got {len(row)}", line=lineno)
        try:
            period = Period.parse(row[pi])
        except ValueError as exc:
            raise DataError(str(exc), line=lineno) from None
        try:
            value = float(row[vi])
        except ValueError:
            raise DataError(f"non-numeric value {row[vi]!r}", line=lineno) from None
        if not math.isfinite(value) or value < 0:
            raise DataError(f"value must be finite and non-negative, got {row[vi]!r}", line=lineno)
        if period in rows:
            raise DataError(
                f"duplicate period {period} (first seen on line {first_line[period]})", line=lineno
            )
        if rows and next(iter(rows)).frequency != period.frequency:
            raise DataError(
                f"period {period} is {period.frequency}, earlier rows are "
                f"{next(iter(rows)).frequency}",
                line=lineno,
            )
        rows[period] = value
        first_line[period] = lineno
    if not rows:
        raise DataError(f"{path}: no data rows")

    periods = sorted(rows)
    freq = periods[0].frequency
    ppy = PERIODS_PER_YEAR[freq]
    for a, b in zip(periods, periods[1:]):
        ka, kb = a.year * ppy + a.index, b.year * ppy + b.index
        if kb - ka != 1:
            missing = Period.from_time((ka + 1.5) / ppy, freq)
            raise DataError(f"{path}: missing period {missing} between {a} and {b}")

    label, basis, deflation = schema.label or path.stem, schema.basis, schema.deflation
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
        label = meta.get("label", label)
        basis = meta.get("basis", basis)
        if meta.get("deflation"):
            deflation = DeflationRecord(**meta["deflation"])
    try:
        return PriceSeries.from_periods(
            label, periods, [rows[p] for p in periods], basis=basis, deflation=deflation
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_series(series: PriceSeries, path: Union[str, Path]) -> list[Path]:
    """Write ``period,value`` rows plus a JSON metadata sidecar.

    Values use ``repr`` so that :func:`load_series` reads back identical floats.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "value"])
        for p, v in zip(series.periods(), series.values):
            w.writerow([str(p), repr(v)])
    side = sidecar_path(path)
    side.write_text(json.dumps(series.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [path, side]


def _cpi_level(cpi: PriceSeries, cpi_periods: list[Period], period: Period) -> float:
    """Mean CPI over the CPI observations falling inside ``period``."""
    need = PERIODS_PER_YEAR[cpi.frequency] // PERIODS_PER_YEAR[period.frequency]
    vals = [v for p, v in zip(cpi_periods, cpi.values) if period.contains(p)]
    if len(vals) != need:
        raise DataError(f"cpi {cpi.label!r} does not cover {period} ({len(vals)} of {need} observations)")
    return math.fsum(vals) / need


def deflate(series: PriceSeries, cpi: PriceSeries, base: Union[Period, str]) -> PriceSeries:
    """Express ``series`` in constant prices of ``base``: v * cpi(base) / cpi(t).

    The CPI must be at the same or a finer frequency than both the series
    and the base period; finer CPI observations are averaged over each period.
    """
    base = as_period(base)
    cpi_ppy = PERIODS_PER_YEAR[cpi.frequency]
    for what, freq in (("series", series.frequency), ("base period", base.frequency)):
        ppy = PERIODS_PER_YEAR[freq]
        if cpi_ppy < ppy or cpi_ppy % ppy:
            raise DataError(f"cpi is {cpi.frequency}, too coarse for a {freq} {what}")
    if any(v <= 0 for v in cpi.values):
        raise DataError(f"cpi {cpi.label!r} has non-positive values")

    cpi_periods = cpi.periods()
    base_level = _cpi_level(cpi, cpi_periods, base)
    out = []
    for p, v in zip(series.periods(), series.values):
        out.append(v * base_level / _cpi_level(cpi, cpi_periods, p))
    return series.with_values(
        out,
        basis="deflated",
        deflation=DeflationRecord(cpi_label=cpi.label, base=str(base)),
    )
