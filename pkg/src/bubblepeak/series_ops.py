"""Moving averages, annual aggregation and episode segmentation."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from bubblepeak.ingest import PERIODS_PER_YEAR, SPACING_TOL, DataError, Period, PriceSeries

logger = logging.getLogger(__name__)

ONGOING_FACTOR = 1.1


def moving_average(series: PriceSeries, window: int) -> PriceSeries:
    """Centered moving average; ``(window - 1) // 2`` points are lost at each end."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if window > len(series):
        raise ValueError(f"window {window} is longer than the series ({len(series)} points)")
    half = (window - 1) // 2
    means = sliding_window_view(series.v, window).mean(axis=1)
    times = series.times[half:len(series) - half]
    return replace(series, times=times, values=tuple(means))


def annualize(series: PriceSeries, method: str = "mean") -> PriceSeries:
    """One mean value per fully covered calendar year.

    Incomplete years at either end of the series are dropped; an incomplete
    year in the interior is an error.
    """
    if method != "mean":
        raise ValueError(f"unsupported method {method!r}")
    if series.frequency == "annual":
        return series
    ppy = PERIODS_PER_YEAR[series.frequency]
    by_year: dict[int, list[float]] = {}
    for p, v in zip(series.periods(), series.values):
        by_year.setdefault(p.year, []).append(v)
    years = sorted(by_year)
    out_years, out_vals = [], []
    for y in years:
        vals = by_year[y]
        if len(vals) != ppy:
            if y in (years[0], years[-1]):
                continue
            raise DataError(f"year {y} has {len(vals)} of {ppy} observations")
        out_years.append(y)
        out_vals.append(math.fsum(vals) / ppy)
    if not out_years:
        raise DataError(f"series {series.label!r} covers no complete calendar year")
    return replace(
        series,
        frequency="annual",
        times=tuple(y + 0.5 for y in out_years),
        values=tuple(out_vals),
    )


@dataclass(frozen=True)
class Window:
    """Search window (inclusive, decimal years) for one episode's peak."""

    label: str
    start: float
    end: float

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(d["label"], _to_time(d["window_start"], start=True), _to_time(d["window_end"], start=False))


def _to_time(x, start: bool) -> float:
    """Decimal years from a number or a period string; a period maps to its first or last instant."""
    if isinstance(x, (int, float)):
        return float(x)
    p = Period.parse(str(x))
    width = 1.0 / PERIODS_PER_YEAR[p.frequency]
    lo = p.to_time() - width / 2
    return lo if start else lo + width


def load_windows(path: Union[str, Path]) -> list[Window]:
    """Read a JSON list of ``{label, window_start, window_end}`` objects."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, dict):
        doc = doc["windows"]
    return [Window.from_dict(d) for d in doc]


@dataclass(frozen=True)
class PeakEpisode:
    """One rise-and-fall episode. ``t3``/``p3`` are None while the episode is ongoing."""

    index: int
    t1: float
    p1: float
    t2: float
    p2: float
    t3: Optional[float] = None
    p3: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if (self.t3 is None) != (self.p3 is None):
            raise ValueError("t3 and p3 must both be set or both be absent")
        if not self.t1 < self.t2:
            raise ValueError(f"need t1 < t2, got {self.t1}, {self.t2}")
        if self.p1 <= 0 or self.p2 < self.p1:
            raise ValueError(f"need 0 < p1 <= p2, got p1={self.p1}, p2={self.p2}")
        if self.complete:
            if not self.t2 < self.t3:
                raise ValueError(f"need t2 < t3, got {self.t2}, {self.t3}")
            if self.p3 <= 0 or self.p2 < self.p3:
                raise ValueError(f"need 0 < p3 <= p2, got p3={self.p3}, p2={self.p2}")

    @property
    def complete(self) -> bool:
        return self.t3 is not None

    @property
    def A1(self) -> float:
        return self.p2 / self.p1

    @property
    def A2(self) -> Optional[float]:
        return self.p2 / self.p3 if self.complete else None

    @property
    def rising_duration(self) -> float:
        return self.t2 - self.t1

    @property
    def falling_duration(self) -> Optional[float]:
        return self.t3 - self.t2 if self.complete else None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "label": self.label,
            "start": {"t": self.t1, "p": self.p1},
            "peak": {"t": self.t2, "p": self.p2},
            "end": {"t": self.t3, "p": self.p3} if self.complete else None,
            "A1": self.A1,
            "A2": self.A2,
            "rising_duration": self.rising_duration,
            "falling_duration": self.falling_duration,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PeakEpisode":
        end = d.get("end")
        return cls(
            index=d["index"],
            t1=d["start"]["t"],
            p1=d["start"]["p"],
            t2=d["peak"]["t"],
            p2=d["peak"]["p"],
            t3=end["t"] if end else None,
            p3=end["p"] if end else None,
            label=d.get("label", ""),
        )


def _argmin(values: np.ndarray) -> int:
    # np.argmin/argmax return the first occurrence, i.e. the earliest time on ties.
    return int(np.argmin(values))


def segment_episodes(
    series: PriceSeries,
    windows: Sequence[Window],
    ongoing_factor: float = ONGOING_FACTOR,
) -> list[PeakEpisode]:
    """Split ``series`` into chained episodes, one per peak search window.

    The peak is the window maximum. Each start is the minimum between the
    previous peak (or the series start) and this peak, so consecutive
    episodes share a boundary. The last episode is reported as ongoing
    when the series stops less than one rising-duration after the peak and
    its final value is still above ``ongoing_factor * p1``.
    """
    if series.basis != "deflated":
        logger.warning("segmenting %s series %r; amplitudes are usually read on deflated data",
                       series.basis, series.label)
    t, v = series.t, series.v
    windows = sorted(windows, key=lambda w: w.start)

    peaks = []
    for w in windows:
        idx = np.flatnonzero((t >= w.start - SPACING_TOL) & (t <= w.end + SPACING_TOL))
        if idx.size == 0:
            raise DataError(f"window {w.label!r} ({w.start}..{w.end}) contains no observations")
        j = idx[int(np.argmax(v[idx]))]
        if j == idx[0] or j == idx[-1]:
            raise DataError(
                f"window {w.label!r} has its maximum on the window edge at t={t[j]}; "
                "no interior peak (monotone data?)"
            )
        if peaks and j <= peaks[-1]:
            raise DataError(f"window {w.label!r} peaks at or before the previous episode's peak")
        peaks.append(int(j))

    starts = []
    prev = 0
    for j in peaks:
        starts.append(prev + _argmin(v[prev:j + 1]))
        prev = j

    episodes = []
    for k, (i1, j) in enumerate(zip(starts, peaks)):
        if k + 1 < len(peaks):
            i3: Optional[int] = starts[k + 1]
        else:
            i3 = j + _argmin(v[j:])
            rising = t[j] - t[i1]
            still_high = v[-1] > ongoing_factor * v[i1]
            if i3 == j or (t[-1] - t[j] < rising and still_high):
                i3 = None
        if i1 == j:
            raise DataError(f"episode {windows[k].label!r} has no rising phase")
        episodes.append(PeakEpisode(
            index=k + 1,
            t1=float(t[i1]), p1=float(v[i1]),
            t2=float(t[j]), p2=float(v[j]),
            t3=None if i3 is None else float(t[i3]),
            p3=None if i3 is None else float(v[i3]),
            label=windows[k].label,
        ))
    return episodes
