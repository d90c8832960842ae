"""Stretched-exponential analysis of speculative price peaks.

Fits the two-parameter peak shape ``p(t) = p2 * exp(-|(t - t2)/tau|**alpha)``
to the rising and falling phases of property-price episodes, projects
post-peak declines from a completed reference episode, and bundles the
cross-sectional statistics (price-multiplier regression, yields, Fisher
confidence intervals, growth ratios, stock valuation) used alongside them.
"""

__version__ = "0.1.0"

from bubblepeak.ingest import (
    DataError,
    DeflationRecord,
    Period,
    PriceSeries,
    Schema,
    deflate,
    load_series,
    write_series,
)
from bubblepeak.peak_model import PeakParams, evaluate, rough_projection, sample_trajectory
from bubblepeak.series_ops import PeakEpisode, Window, annualize, moving_average, segment_episodes
from bubblepeak.estimator import PeakFit, fit_phase, fit_phase_oracle, linearize
from bubblepeak.predictor import (
    PredictionTrajectory,
    SimilarityReport,
    compare_city,
    predict_decline,
    similarity,
)

__all__ = [
    "__version__",
    "DataError",
    "DeflationRecord",
    "Period",
    "PriceSeries",
    "Schema",
    "deflate",
    "load_series",
    "write_series",
    "PeakParams",
    "evaluate",
    "rough_projection",
    "sample_trajectory",
    "PeakEpisode",
    "Window",
    "annualize",
    "moving_average",
    "segment_episodes",
    "PeakFit",
    "fit_phase",
    "fit_phase_oracle",
    "linearize",
    "PredictionTrajectory",
    "SimilarityReport",
    "compare_city",
    "predict_decline",
    "similarity",
]
