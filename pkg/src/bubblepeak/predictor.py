"""Projecting a post-peak decline from a completed reference episode.

The procedure has three stages: fit both phases of the reference episode,
fit the rising phase of the current one and compare the two rising fits,
then draw the current decline with the reference's falling parameters
anchored at the current peak.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from bubblepeak.estimator import PeakFit, fit_phase
from bubblepeak.ingest import DeflationRecord, PriceSeries
from bubblepeak.peak_model import PeakParams, sample_trajectory
from bubblepeak.series_ops import ONGOING_FACTOR, PeakEpisode, Window, segment_episodes

logger = logging.getLogger(__name__)

ALPHA_THRESHOLD = 0.40
TAU_THRESHOLD = 0.25
CONVENTIONS = ("reference", "current", "mean")
QUARTER = 0.25


def relative_differences(reference: float, current: float) -> dict[str, float]:
    """|current - reference| divided by the reference, the current value, or their mean."""
    d = abs(current - reference)
    return {
        "reference": d / abs(reference),
        "current": d / abs(current),
        "mean": d / (0.5 * abs(reference + current)),
    }


@dataclass(frozen=True)
class SimilarityReport:
    alpha_diff: dict
    tau_diff: dict
    convention: str
    alpha_threshold: float
    tau_threshold: float

    @property
    def similar(self) -> bool:
        return (self.alpha_diff[self.convention] <= self.alpha_threshold
                and self.tau_diff[self.convention] <= self.tau_threshold)

    def to_dict(self) -> dict:
        return {
            "alpha_diff": dict(self.alpha_diff),
            "tau_diff": dict(self.tau_diff),
            "convention": self.convention,
            "alpha_threshold": self.alpha_threshold,
            "tau_threshold": self.tau_threshold,
            "similar": self.similar,
        }


def similarity(
    reference_rising: PeakParams,
    current_rising: PeakParams,
    alpha_threshold: float = ALPHA_THRESHOLD,
    tau_threshold: float = TAU_THRESHOLD,
    convention: str = "reference",
) -> SimilarityReport:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    return SimilarityReport(
        alpha_diff=relative_differences(reference_rising.alpha, current_rising.alpha),
        tau_diff=relative_differences(reference_rising.tau, current_rising.tau),
        convention=convention,
        alpha_threshold=alpha_threshold,
        tau_threshold=tau_threshold,
    )


@dataclass(frozen=True)
class PredictionTrajectory:
    series: PriceSeries
    source_params: PeakParams
    anchor: tuple
    horizon: float
    similarity: SimilarityReport

    @property
    def flagged(self) -> bool:
        return not self.similarity.similar

    def to_dict(self) -> dict:
        return {
            "anchor": {"t": self.anchor[0], "p": self.anchor[1]},
            "source_params": self.source_params.to_dict(),
            "horizon": self.horizon,
            "similarity": self.similarity.to_dict(),
            "flagged": self.flagged,
            "trajectory": [[t, p] for t, p in zip(self.series.times, self.series.values)],
        }


def predict_decline(
    current: PeakEpisode,
    current_rising: PeakFit,
    reference: PeakEpisode,
    reference_rising: PeakFit,
    reference_falling: Optional[PeakFit],
    horizon: float,
    alpha_threshold: float = ALPHA_THRESHOLD,
    tau_threshold: float = TAU_THRESHOLD,
    convention: str = "reference",
    step: float = QUARTER,
    deflation: Optional[DeflationRecord] = None,
) -> PredictionTrajectory:
    """Draw the current decline with the reference falling-phase (alpha, tau).

    The trajectory starts at the current peak and covers ``horizon`` years
    at ``step`` spacing; the horizon must be a whole number of steps. A
    failed similarity check is logged and flagged but does not stop the
    projection.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if reference_falling is None:
        raise ValueError(f"reference episode {reference.label!r} has no falling-phase fit")
    if reference_falling.params.phase != "falling":
        raise ValueError("reference_falling must be a falling-phase fit")
    n_steps = horizon / step
    if abs(n_steps - round(n_steps)) > 1e-9:
        raise ValueError(f"horizon {horizon} is not a whole number of {step}-year steps")

    report = similarity(reference_rising.params, current_rising.params,
                        alpha_threshold, tau_threshold, convention)
    if not report.similar:
        logger.warning(
            "rising phases differ beyond thresholds (alpha %.1f%%, tau %.1f%%, %s convention); "
            "projection is flagged",
            100 * report.alpha_diff[convention], 100 * report.tau_diff[convention], convention,
        )
    src = reference_falling.params
    params = PeakParams(t2=current.t2, p2=current.p2, alpha=src.alpha, tau=src.tau, phase="falling")
    series = sample_trajectory(
        params, current.t2, current.t2 + round(n_steps) * step, step,
        label=f"projected decline after {current.label or current.index}",
        deflation=deflation,
    )
    return PredictionTrajectory(
        series=series,
        source_params=src,
        anchor=(current.t2, current.p2),
        horizon=float(horizon),
        similarity=report,
    )


@dataclass(frozen=True)
class EpisodeFits:
    episode: PeakEpisode
    rising: PeakFit
    falling: Optional[PeakFit]

    def to_dict(self) -> dict:
        return {
            "episode": self.episode.to_dict(),
            "rising": self.rising.to_dict(),
            "falling": self.falling.to_dict() if self.falling else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeFits":
        return cls(
            episode=PeakEpisode.from_dict(d["episode"]),
            rising=PeakFit.from_dict(d["rising"]),
            falling=PeakFit.from_dict(d["falling"]) if d.get("falling") else None,
        )


def fit_episode(series: PriceSeries, episode: PeakEpisode) -> EpisodeFits:
    """Fit the rising phase on [t1, t2] and, for complete episodes, the falling phase on [t2, t3]."""
    peak = (episode.t2, episode.p2)
    name = episode.label or str(episode.index)
    rising = fit_phase(series.between(episode.t1, episode.t2), peak, "rising", label=f"{name} rising")
    falling = None
    if episode.complete:
        falling = fit_phase(series.between(episode.t2, episode.t3), peak, "falling", label=f"{name} falling")
    return EpisodeFits(episode, rising, falling)


def compare_city(
    series: PriceSeries,
    windows: Sequence[Window],
    ongoing_factor: float = ONGOING_FACTOR,
) -> list[EpisodeFits]:
    """Segment a city's series and fit each phase of each episode."""
    return [fit_episode(series, ep) for ep in segment_episodes(series, windows, ongoing_factor)]
