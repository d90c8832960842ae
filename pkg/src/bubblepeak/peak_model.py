"""The stretched-exponential peak shape and trajectories drawn from it.

A full peak is a pair of :class:`PeakParams` sharing ``(t2, p2)``, one
per phase, since rising and falling sides are fitted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from bubblepeak.ingest import PERIODS_PER_YEAR, SPACING_TOL, DeflationRecord, PriceSeries
from bubblepeak.series_ops import PeakEpisode

PHASES = ("rising", "falling")


@dataclass(frozen=True)
class PeakParams:
    t2: float
    p2: float
    alpha: float
    tau: float
    phase: str

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"phase must be one of {PHASES}, got {self.phase!r}")
        for name in ("t2", "p2", "alpha", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha <= 0 or self.tau <= 0 or self.p2 <= 0:
            raise ValueError(
                f"alpha, tau and p2 must be positive, got alpha={self.alpha}, tau={self.tau}, p2={self.p2}"
            )

    def to_dict(self) -> dict:
        return {"t2": self.t2, "p2": self.p2, "alpha": self.alpha, "tau": self.tau, "phase": self.phase}

    @classmethod
    def from_dict(cls, d: dict) -> "PeakParams":
        return cls(d["t2"], d["p2"], d["alpha"], d["tau"], d["phase"])


def check_side(phase: str, t2: float, t) -> None:
    """Raise unless every time in ``t`` lies on ``phase``'s side of ``t2``."""
    t = np.asarray(t, dtype=float)
    bad = t > t2 if phase == "rising" else t < t2
    if np.any(bad):
        first = float(t[bad].flat[0])
        side = "after" if phase == "rising" else "before"
        raise ValueError(f"t={first} lies {side} the peak at t2={t2}; wrong side for the {phase} phase")


def evaluate(params: PeakParams, t: Union[float, np.ndarray]):
    """p2 * exp(-|(t - t2)/tau|**alpha); scalar in, scalar out."""
    check_side(params.phase, params.t2, t)
    x = np.abs((np.asarray(t, dtype=float) - params.t2) / params.tau)
    out = params.p2 * np.exp(-(x ** params.alpha))
    return float(out) if out.ndim == 0 else out


def _frequency_for_step(step: float) -> str:
    for freq, ppy in PERIODS_PER_YEAR.items():
        if abs(step * ppy - 1) < 1e-12:
            return freq
    raise ValueError(f"step {step} is not an annual, quarterly or monthly spacing")


def sample_trajectory(
    params: PeakParams,
    start: float,
    stop: float,
    step: float,
    label: str = "model",
    deflation: Optional[DeflationRecord] = None,
) -> PriceSeries:
    """Evaluate the model at ``start, start + step, ...`` up to ``stop`` inclusive.

    Times are ``start + i * step`` (not accumulated), so long trajectories
    stay on the grid. With a deflation record the result is tagged deflated.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop precedes start")
    check_side(params.phase, params.t2, [start, stop])
    freq = _frequency_for_step(step)
    n = int(math.floor((stop - start) / step + SPACING_TOL)) + 1
    times = start + step * np.arange(n)
    values = evaluate(params, times)
    return PriceSeries(
        label=label,
        frequency=freq,
        basis="deflated" if deflation else "nominal",
        times=tuple(times),
        values=tuple(np.atleast_1d(values)),
        deflation=deflation,
    )


def rough_projection(
    series: PriceSeries,
    episode: PeakEpisode,
    reference: PeakEpisode,
    label: str = "rough projection",
) -> PriceSeries:
    """Project ``episode``'s decline by replaying ``reference``'s observed fall.

    The reference falling segment (read from ``series``) is stretched in
    time by the ratio of rising durations and mapped affinely in price so it
    starts at the episode's peak and ends at ``p1 * (p3_ref / p1_ref)``. The
    result is resampled by linear interpolation on the series grid starting
    at the episode's peak; the last point is the last grid time not past
    the stretched end.
    """
    if not reference.complete:
        raise ValueError(f"reference episode {reference.label!r} has no end")
    seg = series.between(reference.t2, reference.t3)
    if reference.p2 == reference.p3:
        raise ValueError("reference falling segment is flat")
    time_scale = episode.rising_duration / reference.rising_duration
    p_end = episode.p1 * (reference.p3 / reference.p1)
    price_scale = (episode.p2 - p_end) / (reference.p2 - reference.p3)

    new_t = episode.t2 + (seg.t - reference.t2) * time_scale
    new_p = p_end + (seg.v - reference.p3) * price_scale

    duration = reference.falling_duration * time_scale
    n = int(math.floor(duration / series.step + SPACING_TOL)) + 1
    grid = episode.t2 + series.step * np.arange(n)
    values = np.interp(grid, new_t, new_p)
    return PriceSeries(
        label=label,
        frequency=series.frequency,
        basis=series.basis,
        times=tuple(grid),
        values=tuple(np.maximum(values, 0.0)),
        deflation=series.deflation,
    )
