"""Acceptance suite: one or more tests per criterion, summarized at the end of the run.

Criteria 3 and 6 are data-dependent. By default they run against the bundled
synthetic sample (see ``bubblepeak.datasets``). Point ``BUBBLEPEAK_PRICES`` and
``BUBBLEPEAK_CPI`` at official quarterly files (``period,value`` columns) to
run criterion 3 on real data, and ``BUBBLEPEAK_CLASSES`` at a
``class_label,location,p1,A1`` file for criterion 6.
"""

import math
import os
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from bubblepeak import (
    PeakEpisode,
    PeakParams,
    Period,
    PriceSeries,
    Schema,
    compare_city,
    deflate,
    fit_phase,
    fit_phase_oracle,
    load_series,
    moving_average,
    predict_decline,
)
from bubblepeak.cli import main
from bubblepeak.cross_section import (
    ClassAmplitude,
    fisher_ci,
    mean_m,
    multiplier_fit,
    yield_point,
    yield_series,
)
from bubblepeak.datasets import load_class_sample, load_sample, sample_path
from bubblepeak.estimator import PeakFit
from bubblepeak.valuation import load_scenario, run_scenario

from conftest import model_series

criterion = pytest.mark.criterion


def sig2(x):
    return float(f"{x:.2g}")


def data_source(*names):
    paths = [os.environ.get(n) for n in names]
    return "official" if all(paths) else "bundled sample"


# 1 -------------------------------------------------------------------------

@criterion(1, "estimator round trip: 100 exact series, 1e-6 relative, < 1 s")
def test_c01_round_trip():
    rng = np.random.default_rng(20160101)
    cases = [(rng.uniform(0.3, 2.0), rng.uniform(5, 20), rng.uniform(1, 1000), rng.choice(["rising", "falling"]))
             for _ in range(100)]
    series = [model_series(a, tau, ph, n=40, p2=p2) for a, tau, p2, ph in cases]
    start = time.perf_counter()
    fits = [fit_phase(s, (2000.0, p2), ph) for s, (_, _, p2, ph) in zip(series, cases)]
    elapsed = time.perf_counter() - start
    worst = max(max(abs(f.alpha / a - 1), abs(f.tau / tau - 1)) for f, (a, tau, _, _) in zip(fits, cases))
    assert worst <= 1e-6, worst
    assert elapsed < 1.0, elapsed


# 2 -------------------------------------------------------------------------

@criterion(2, "oracle equivalence: 1% noise, 100 replications, 10% relative, < 30 s")
def test_c02_oracle_equivalence():
    # 50 noisy quarterly observations before an observed peak, alpha = 0.8, tau = 12
    exact = model_series(0.8, 12.0, "rising", n=50)
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        noise = np.exp(np.random.default_rng(seed).normal(0.0, 0.01, len(exact)))
        noise[-1] = 1.0  # the peak observation itself defines (t2, p2)
        s = exact.with_values(np.array(exact.values) * noise)
        ols = fit_phase(s, (2000.0, 100.0), "rising")
        grid = fit_phase_oracle(s, (2000.0, 100.0), "rising")
        worst = max(worst, abs(ols.alpha / grid.alpha - 1), abs(ols.tau / grid.tau - 1))
    elapsed = time.perf_counter() - start
    assert worst <= 0.10, worst
    assert elapsed < 30.0, elapsed


# 3 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def hk_fits(hk_windows):
    if data_source("BUBBLEPEAK_PRICES", "BUBBLEPEAK_CPI") == "official":
        schema = Schema("period", "value")
        prices = load_series(os.environ["BUBBLEPEAK_PRICES"], schema)
        cpi = load_series(os.environ["BUBBLEPEAK_CPI"], schema)
    else:
        prices, cpi = load_sample("hk_nt_small_nominal"), load_sample("hk_cpi")
    return compare_city(deflate(prices, cpi, "2015"), hk_windows)


@criterion(3, "HK parameter bands (data-dependent: "
              + data_source("BUBBLEPEAK_PRICES", "BUBBLEPEAK_CPI") + ")")
def test_c03_hk_parameters(hk_fits):
    ep1, ep2 = hk_fits
    assert 0.68 <= ep1.rising.alpha <= 0.92 and 10.2 <= ep1.rising.tau <= 13.8
    assert 0.35 <= ep1.falling.alpha <= 0.47 and 13.6 <= ep1.falling.tau <= 18.4
    assert 0.94 <= ep2.rising.alpha <= 1.27 and 8.5 <= ep2.rising.tau <= 11.5


@criterion(3, "HK parameter bands (data-dependent: "
              + data_source("BUBBLEPEAK_PRICES", "BUBBLEPEAK_CPI") + ")")
def test_c03_hk_segmentation(hk_fits):
    ep1, ep2 = hk_fits
    assert Period.from_time(ep1.episode.t2, "quarterly").year == 1997
    assert Period.from_time(ep2.episode.t2, "quarterly").year == 2015
    assert ep1.episode.t3 == ep2.episode.t1
    assert ep2.episode.A1 == pytest.approx(3.8, abs=0.1)


# 4 -------------------------------------------------------------------------

@criterion(4, "prediction endpoint: p(t2+10)/p2 = exp(-(10/16)^0.41) within 1e-9")
def test_c04_prediction_endpoint():
    mpmath.mp.dps = 50
    oracle = float(mpmath.exp(-mpmath.power(mpmath.mpf(10) / 16, mpmath.mpf("0.41"))))
    assert round(oracle, 3) == 0.438

    def exact_fit(phase, alpha, tau, t2, p2):
        params = PeakParams(t2, p2, alpha, tau, phase)
        return PeakFit(params, 3, 1.0, ((0.0, 0.0, 0.0),) * 3, 0)

    ref = PeakEpisode(1, 1987.125, 40.0, 1997.375, 100.0, 2002.625, 50.0)
    cur = PeakEpisode(2, 2002.625, 50.0, 2015.625, 190.0)
    out = predict_decline(cur, exact_fit("rising", 1.1, 10.0, 2015.625, 190.0), ref,
                          exact_fit("rising", 0.8, 12.0, 1997.375, 100.0),
                          exact_fit("falling", 0.41, 16.0, 1997.375, 100.0), horizon=10.0)
    assert out.series.times[-1] == 2025.625
    assert out.series.values[-1] / 190.0 == pytest.approx(oracle, abs=1e-9)


# 5 -------------------------------------------------------------------------

@criterion(5, "yield/PER identities")
def test_c05_yield_identities():
    assert yield_point(2015.0, 1.0, 35.0).yield_ == pytest.approx(1 / 35, rel=1e-15)
    assert round(100 * yield_point(2015.0, 1.0, 35.0).yield_, 3) == 2.857
    assert yield_point(2015.0, 1.0, 20.0).yield_ == 0.05
    pts = yield_series(load_sample("hk_nt_small_nominal"), load_sample("hk_nt_small_rent_nominal"))
    assert max(abs(p.yield_ * p.per - 1) for p in pts) <= 1e-12
    rng = np.random.default_rng(5)
    t = tuple(2000.125 + 0.25 * i for i in range(200))
    prices = PriceSeries("p", "quarterly", "nominal", t, tuple(rng.uniform(1, 1e5, 200)))
    rents = PriceSeries("r", "quarterly", "nominal", t, tuple(rng.uniform(1e-3, 1e3, 200)))
    assert max(abs(p.yield_ * p.per - 1) for p in yield_series(prices, rents)) <= 1e-12


# 6 -------------------------------------------------------------------------

def class_data(location):
    path = os.environ.get("BUBBLEPEAK_CLASSES")
    if not path:
        return load_class_sample(location)
    import csv
    rows = csv.DictReader(Path(path).read_text(encoding="utf-8").splitlines())
    return [ClassAmplitude(r["class_label"], float(r["p1"]), float(r["A1"])) for r in rows
            if r["location"] == location]


@criterion(6, "multiplier regression (cross-size part data-dependent: "
              + data_source("BUBBLEPEAK_CLASSES") + ")")
def test_c06_mean_and_exact_line():
    assert mean_m([3.9, 1.4, 1.5, 1.9, 3.0]) == pytest.approx(2.34, abs=1e-12)
    assert round(mean_m([3.9, 1.4, 1.5, 1.9, 3.0]), 1) == 2.3
    ps = [12.5, 21.3, 33.0, 47.9, 65.0]
    fit = multiplier_fit([ClassAmplitude(f"c{i}", p, 2.3 * math.log(p) + 1) for i, p in enumerate(ps)])
    assert abs(fit.m - 2.3) <= 1e-12 and abs(fit.b - 1.0) <= 1e-12


@criterion(6, "multiplier regression (cross-size part data-dependent: "
              + data_source("BUBBLEPEAK_CLASSES") + ")")
def test_c06_cross_size_slopes():
    island = multiplier_fit(class_data("Hong Kong island"))
    nt = multiplier_fit(class_data("New Territories"))
    assert island.m < 0 and nt.m < 0
    assert abs(island.m + 1.8) <= 1.0
    assert abs(nt.m + 5.2) <= 1.4


# 7 -------------------------------------------------------------------------

@criterion(7, "Fisher CI for r = -0.76, n = 28 within 0.01 of (-0.88, -0.54)")
def test_c07_fisher_ci():
    mpmath.mp.dps = 50
    z, half = mpmath.atanh(mpmath.mpf("-0.76")), mpmath.mpf("1.959963984540054") / mpmath.sqrt(25)
    oracle = (float(mpmath.tanh(z - half)), float(mpmath.tanh(z + half)))
    lo, hi = fisher_ci(-0.76, 28, 0.95)
    assert (lo, hi) == pytest.approx(oracle, abs=1e-12)
    assert abs(lo + 0.88) <= 0.01 and abs(hi + 0.54) <= 0.01


# 8 -------------------------------------------------------------------------

@criterion(8, "valuation preset at 2 significant figures")
def test_c08_valuation():
    out = run_scenario(load_scenario())
    per_person, per_flat = (e["total"] for e in out["stock_estimates"])
    assert per_person == pytest.approx(4.81e12, rel=1e-12)
    assert per_flat == pytest.approx(6e12, rel=1e-12)
    assert sig2(per_person) == 4.8e12 and sig2(per_flat) == 6e12
    assert sig2(out["stock_rmb"]) == 4.2e12
    assert sig2(out["stock_usd"]) == 0.64e12
    change_vs_revenue = out["flow_comparisons"][0]["ratio"]
    _, china_revenue, treasuries = (c["ratio"] for c in out["comparisons"])
    assert change_vs_revenue == pytest.approx(1.04, abs=0.005) and sig2(change_vs_revenue) == 1.0
    assert china_revenue == pytest.approx(1.55, abs=0.005) and sig2(china_revenue) == 1.5
    assert sig2(treasuries) == 1.9


# 9 -------------------------------------------------------------------------

@criterion(9, "31-month moving average loses exactly 15 months at each end")
def test_c09_moving_average_lag():
    periods = [Period(2000 + i // 12, month=i % 12 + 1) for i in range(120)]
    s = PriceSeries.from_periods("sales", periods, np.arange(120.0))
    out = moving_average(s, 31)
    assert len(out) == len(s) - 30
    assert out.periods()[0] == periods[15] and out.periods()[-1] == periods[-16]


# 10 ------------------------------------------------------------------------

@criterion(10, "full pipeline runs give byte-identical report bundles")
def test_c10_determinism(tmp_path):
    args = ["report", "--series", sample_path("hk_nt_small_nominal.csv"), "--cpi", sample_path("hk_cpi.csv"),
            "--base", "2015", "--config", sample_path("hk_windows.json"),
            "--rents", sample_path("hk_nt_small_rent_nominal.csv")]
    bundles = []
    for name in ("run1", "run2"):
        assert main([str(a) for a in args] + ["--out", str(tmp_path / name)]) == 0
        bundles.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    assert len(bundles[0]) >= 5
    assert bundles[0] == bundles[1]
