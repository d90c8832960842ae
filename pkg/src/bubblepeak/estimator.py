"""Estimating (alpha, tau) for one phase of a peak.

The model ``p = p2 * exp(-|dt/tau|**alpha)`` becomes a straight line after
two logarithms::

    ln ln(p2/p) = alpha * ln|dt| - alpha * ln(tau)

so :func:`fit_phase` is ordinary least squares on that scale.
:func:`fit_phase_oracle` is a separate exhaustive grid search on the price
scale, kept independent of the linearization so the two can check each other.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field


import numpy as np

from bubblepeak.ingest import DataError, PriceSeries
from bubblepeak.peak_model import PeakParams, check_side, evaluate

logger = logging.getLogger(__name__)

MIN_POINTS = 3


@dataclass(frozen=True)
class Linearized:
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    excluded: int

    def __len__(self):
        return len(self.x)


@dataclass(frozen=True)
class PeakFit:
    params: PeakParams
    n_points: int
    r_squared: float
    residuals: tuple  # (t, observed, fitted) per point used
    excluded: int
    label: str = ""

    def __post_init__(self):
        if self.n_points < MIN_POINTS:
            raise ValueError(f"a fit needs at least {MIN_POINTS} points")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared out of [0, 1]: {self.r_squared}")
        if len(self.residuals) != self.n_points:
            raise ValueError("one residual per point")

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def tau(self) -> float:
        return self.params.tau

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "phase": self.params.phase,
            "alpha": self.params.alpha,
            "tau": self.params.tau,
            "t2": self.params.t2,
            "p2": self.params.p2,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "excluded": self.excluded,
            "residuals": [list(r) for r in self.residuals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PeakFit":
        params = PeakParams(d["t2"], d["p2"], d["alpha"], d["tau"], d["phase"])
        return cls(
            params=params,
            n_points=d["n_points"],
            r_squared=d["r_squared"],
            residuals=tuple(tuple(r) for r in d["residuals"]),
            excluded=d["excluded"],
            label=d.get("label", ""),
        )


def linearize(series: PriceSeries, peak: tuple[float, float], phase: str) -> Linearized:
    """Map observations to ``(ln|t - t2|, ln ln(p2/p))``.

    Points where the double log is undefined (``t == t2``, ``p >= p2`` or
    ``p == 0``) are dropped and counted in ``excluded``.
    """
    t2, p2 = peak
    if series.basis != "deflated":
        logger.warning("fitting %s series %r", series.basis, series.label)
    t, p = series.t, series.v
    check_side(phase, t2, t)
    keep = (t != t2) & (p > 0) & (p < p2)
    if keep.sum() < MIN_POINTS:
        raise DataError(
            f"only {int(keep.sum())} usable points for the {phase} phase of {series.label!r}; "
            f"need {MIN_POINTS}"
        )
    tk, pk = t[keep], p[keep]
    x = np.log(np.abs(tk - t2))
    y = np.log(np.log(p2 / pk))
    return Linearized(x=x, y=y, t=tk, p=pk, excluded=int((~keep).sum()))


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and R^2 of y on x."""
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return slope, intercept, min(max(r2, 0.0), 1.0)


def fit_phase(series: PriceSeries, peak: tuple[float, float], phase: str, label: str = "") -> PeakFit:
    """Least-squares (alpha, tau) on the doubly-logged scale."""
    lin = linearize(series, peak, phase)
    if np.ptp(lin.x) <= 1e-12:
        raise DataError("all usable observations are equidistant from the peak; slope undefined")
    slope, intercept, r2 = _ols(lin.x, lin.y)
    if not slope > 0:
        raise DataError(
            f"regression slope {slope:.4g} is not positive; the {phase} data of "
            f"{series.label!r} do not look like a peak"
        )
    alpha = slope
    tau = math.exp(-intercept / alpha)
    params = PeakParams(t2=peak[0], p2=peak[1], alpha=alpha, tau=tau, phase=phase)
    fitted = evaluate(params, lin.t)
    residuals = tuple(
        (float(ti), float(oi), float(fi)) for ti, oi, fi in zip(lin.t, lin.p, np.atleast_1d(fitted))
    )
    return PeakFit(
        params=params,
        n_points=len(lin),
        r_squared=r2,
        residuals=residuals,
        excluded=lin.excluded,
        label=label,
    )


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # rounding keeps nominal grid values such as 0.8 exact
    return np.round(lo + step * np.arange(n), 12)


def fit_phase_oracle(
    series: PriceSeries,
    peak: tuple[float, float],
    phase: str,
    alpha_range: tuple[float, float] = (0.05, 3.0),
    tau_range: tuple[float, float] = (0.5, 40.0),
    resolution: tuple[float, float] = (0.01, 0.1),
    chunk: int = 32,
) -> PeakParams:
    """Exhaustive grid search minimizing squared price residuals.

    Every point on the phase side except ``t == t2`` is used, including
    points above ``p2``. Ties resolve to the lexicographically smallest
    ``(alpha, tau)``.
    """
    t2, p2 = peak
    if min(*alpha_range, *tau_range) <= 0 or min(resolution) <= 0:
        raise ValueError("grid ranges and resolution must be positive")
    alphas = _grid(*alpha_range, resolution[0])
    taus = _grid(*tau_range, resolution[1])
    if alphas.size == 0 or taus.size == 0 or alpha_range[1] < alpha_range[0] or tau_range[1] < tau_range[0]:
        raise ValueError("empty grid")
    t, p = series.t, series.v
    check_side(phase, t2, t)
    keep = t != t2
    if not keep.any():
        raise DataError("no observations besides the peak")
    log_dt = np.log(np.abs(t[keep] - t2))
    obs = p[keep]
    log_tau = np.log(taus)

    best_sse, best = math.inf, (0, 0)
    # u[a, k, i] = (dt_i / tau_k) ** alpha_a
    base = log_dt[None, :] - log_tau[:, None]
    for a0 in range(0, alphas.size, chunk):
        a = alphas[a0:a0 + chunk]
        model = p2 * np.exp(-np.exp(a[:, None, None] * base[None, :, :]))
        sse = np.sum((model - obs) ** 2, axis=2)
        flat = int(np.argmin(sse))
        ia, it = divmod(flat, taus.size)
        if sse[ia, it] < best_sse:
            best_sse, best = float(sse[ia, it]), (a0 + ia, it)
    return PeakParams(t2=t2, p2=p2, alpha=float(alphas[best[0]]), tau=float(taus[best[1]]), phase=phase)
