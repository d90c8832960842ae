"""Bundled sample data and the generators that produced it.

None of the bundled files are official statistics. They are synthetic
stand-ins, built so the full pipeline can run without the Rating and
Valuation Department downloads:

``hk_nt_small_nominal.csv``
    Quarterly nominal price per m2 (kHKD) of small New Territories flats,
    1987Q1-2016Q1. Built in constant 2015 HKD from the peak model with the
    parameters in :data:`HK_EPISODES`, scaled so the 2015Q3 peak is 100,
    multiplied by 0.5% lognormal noise (fixed seed), then re-inflated with
    the sample CPI and rounded to 3 decimals.
``hk_cpi.csv``
    Quarterly CPI (2015 average = 100) compounded from the piecewise annual
    inflation rates in :data:`CPI_RATES`.
``hk_nt_small_rent_nominal.csv``
    Quarterly annual rent per m2 (kHKD), equal to the real price times a
    gross yield interpolated through :data:`YIELD_ANCHORS`, with 1% noise,
    re-inflated like the prices.
``hk_class_amplitudes.csv``
    Initial price (kHKD per m2, first quarter of 2003) and amplitude for
    five size classes in two locations. Solved by :func:`construct_class_sample`
    so that these target summary figures are met: per-class location slopes
    3.9, 1.4, 1.5, 1.9, 3.0; size slopes -1.8 (r = -0.89) for Hong Kong island
    and -5.2 (r = -0.97) for the New Territories; anchor prices 25.3 and 65
    (island, smallest and largest class), 21.3 (territories, smallest); class
    means 41.5 and 27.0; territories smallest-class amplitude 3.8.

Regenerate everything with :func:`write_samples`.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from bubblepeak.ingest import Period, PriceSeries, Schema, load_series, write_series
from bubblepeak.peak_model import PeakParams, evaluate

SEED = 1997
PRICE_NOISE = 0.005
RENT_NOISE = 0.01
START, END = Period(1987, quarter=1), Period(2016, quarter=1)
BASE_YEAR = 2015

# (t2, alpha, tau) per phase; peak heights follow from the junction rule below.
HK_EPISODES = {
    "peak1": 1997.375,  # 1997Q2
    "trough": 2002.625,  # 2002Q3, end of episode 1 and start of episode 2
    "peak2": 2015.625,  # 2015Q3
    "rising1": (0.80, 12.0),
    "falling1": (0.41, 16.0),
    "rising2": (1.10, 10.0),
    "falling2": (0.41, 16.0),
    "peak2_level": 100.0,
}

# first year of each constant-rate stretch -> annual CPI inflation
CPI_RATES = {1987: 0.08, 1989: 0.105, 1992: 0.092, 1997: -0.029, 2003: 0.01, 2009: 0.04}

YIELD_ANCHORS = [(1987.125, 0.065), (1997.375, 0.034), (2002.625, 0.062), (2015.625, 0.029), (2016.125, 0.030)]

HK_WINDOWS = [
    {"label": "1997 peak", "window_start": "1995", "window_end": "1999"},
    {"label": "2015 peak", "window_start": "2013", "window_end": "2016Q1"},
]

SIZE_CLASSES = ["(0,40)", "(40,70)", "(70,110)", "(110,160)", "(>160)"]
LOCATION_SLOPES = [3.9, 1.4, 1.5, 1.9, 3.0]


def _quarters() -> list[Period]:
    out, p = [], START
    while p <= END:
        out.append(p)
        y, q = (p.year, p.quarter + 1) if p.quarter < 4 else (p.year + 1, 1)
        p = Period(y, quarter=q)
    return out


def real_price_path(times: np.ndarray) -> np.ndarray:
    """Noise-free constant-2015 price: two chained peaks meeting at the trough."""
    e = HK_EPISODES
    p2b = e["peak2_level"]
    rise2 = PeakParams(e["peak2"], p2b, *e["rising2"], "rising")
    trough = evaluate(rise2, e["trough"])
    a, tau = e["falling1"]
    p2a = trough / np.exp(-(((e["trough"] - e["peak1"]) / tau) ** a))
    rise1 = PeakParams(e["peak1"], p2a, *e["rising1"], "rising")
    fall1 = PeakParams(e["peak1"], p2a, *e["falling1"], "falling")
    fall2 = PeakParams(e["peak2"], p2b, *e["falling2"], "falling")
    out = np.empty_like(times)
    for i, t in enumerate(times):
        if t <= e["peak1"]:
            out[i] = evaluate(rise1, t)
        elif t <= e["trough"]:
            out[i] = evaluate(fall1, t)
        elif t <= e["peak2"]:
            out[i] = evaluate(rise2, t)
        else:
            out[i] = evaluate(fall2, t)
    return out


def cpi_path(periods: list[Period]) -> np.ndarray:
    """Quarterly CPI compounded from :data:`CPI_RATES`, rebased to the 2015 mean."""
    starts = sorted(CPI_RATES)
    level, out = 1.0, []
    for p in periods:
        rate = CPI_RATES[max(y for y in starts if y <= p.year)]
        out.append(level)
        level *= (1 + rate) ** 0.25
    out = np.array(out)
    base = np.mean([v for p, v in zip(periods, out) if p.year == BASE_YEAR])
    return 100.0 * out / base


def generate_hk_sample() -> dict[str, PriceSeries]:
    periods = _quarters()
    t = np.array([p.to_time() for p in periods])
    rng = np.random.default_rng(SEED)
    cpi = cpi_path(periods)
    real = real_price_path(t) * np.exp(rng.normal(0.0, PRICE_NOISE, t.size))
    yt, yv = zip(*YIELD_ANCHORS)
    rent_real = real * np.interp(t, yt, yv) * np.exp(rng.normal(0.0, RENT_NOISE, t.size))
    inflate = cpi / 100.0
    return {
        "hk_cpi": PriceSeries.from_periods("sample HK CPI (2015=100)", periods, np.round(cpi, 4)),
        "hk_nt_small_nominal": PriceSeries.from_periods(
            "sample NT <40 m2 price, kHKD/m2", periods, np.round(real * inflate, 3)),
        "hk_nt_small_rent_nominal": PriceSeries.from_periods(
            "sample NT <40 m2 annual rent, kHKD/m2", periods, np.round(rent_real * inflate, 4)),
    }


def construct_class_sample() -> list[dict]:
    """Solve for class prices and amplitudes meeting the summary figures listed above."""
    from scipy.optimize import least_squares

    slopes = np.array(LOCATION_SLOPES)

    def unpack(z):
        ph = np.array([25.3, z[0], z[1], z[2], 65.0])
        pn = np.array([21.3, z[3], z[4], z[5], z[6]])
        an = np.concatenate([[3.8], z[7:11]])
        ah = an + slopes * (np.log(ph) - np.log(pn))
        return ph, pn, ah, an

    def slope_r(p, a):
        x = np.log(p)
        dx, da = x - x.mean(), a - a.mean()
        return dx @ da / (dx @ dx), dx @ da / np.sqrt((dx @ dx) * (da @ da))

    def residuals(z):
        if np.any(z[:7] <= 0):
            return np.full(19, 1e3)
        ph, pn, ah, an = unpack(z)
        mh, rh = slope_r(ph, ah)
        mn, rn = slope_r(pn, an)
        return np.array([
            mh + 1.8, 5 * (rh + 0.89), mn + 5.2, 5 * (rn + 0.97),
            (ph.mean() - 41.5) / 5, (pn.mean() - 27.0) / 5,
            *np.minimum(0, np.diff(ph)), *np.minimum(0, np.diff(pn)), *np.minimum(0, an - 1.2),
        ])

    z0 = np.array([31, 39, 47, 23.5, 26, 29, 34, 3.3, 2.8, 2.3, 1.6], dtype=float)
    with np.errstate(invalid="ignore"):
        ph, pn, ah, an = unpack(least_squares(residuals, z0).x)
    rows = []
    for loc, ps, amps in (("Hong Kong island", ph, ah), ("New Territories", pn, an)):
        for cls, p, a in zip(SIZE_CLASSES, ps, amps):
            rows.append({"location": loc, "class_label": f"{loc} {cls}", "size_class": cls,
                         "p1": round(float(p), 2), "A1": round(float(a), 3)})
    return rows


def _class_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["class_label", "location", "size_class", "p1", "A1"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_samples(directory: Union[str, Path]) -> list[Path]:
    directory = Path(directory)
    written = []
    for name, series in generate_hk_sample().items():
        written += write_series(series, directory / f"{name}.csv")
    p = directory / "hk_class_amplitudes.csv"
    p.write_text(_class_csv(construct_class_sample()), encoding="utf-8")
    w = directory / "hk_windows.json"
    w.write_text(json.dumps(HK_WINDOWS, indent=2) + "\n", encoding="utf-8")
    return written + [p, w]


def sample_path(name: str) -> Path:
    """Filesystem path of a bundled sample file."""
    return Path(str(resources.files("bubblepeak.data").joinpath(name)))


def load_sample(name: str) -> PriceSeries:
    return load_series(sample_path(f"{name}.csv"), Schema("period", "value"))


def load_class_sample(location: str | None = None) -> list:
    from bubblepeak.cross_section import ClassAmplitude

    rows = list(csv.DictReader(sample_path("hk_class_amplitudes.csv").read_text("utf-8").splitlines()))
    return [ClassAmplitude(r["class_label"], float(r["p1"]), float(r["A1"]))
            for r in rows if location is None or r["location"] == location]
