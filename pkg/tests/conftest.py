import numpy as np
import pytest

from bubblepeak import DeflationRecord, PeakParams, PriceSeries, Window, deflate, evaluate
from bubblepeak.datasets import HK_WINDOWS, load_sample

SYNTH = DeflationRecord("synthetic", "2000")


def deflated(times, values, label="synthetic", frequency="quarterly"):
    return PriceSeries(label, frequency, "deflated", tuple(times), tuple(values), SYNTH)


def model_series(alpha, tau, phase, n=40, t2=2000.0, p2=100.0, step=0.25, include_peak=True):
    """Exact model samples on the phase side of t2, ``n`` points plus optionally the peak."""
    k = np.arange(0 if include_peak else 1, n + 1)
    times = t2 - step * k[::-1] if phase == "rising" else t2 + step * k
    values = evaluate(PeakParams(t2, p2, alpha, tau, phase), times)
    freq = {0.25: "quarterly", 1 / 12: "monthly", 1.0: "annual"}[step]
    return deflated(times, values, frequency=freq)


@pytest.fixture(scope="session")
def hk_real():
    return deflate(load_sample("hk_nt_small_nominal"), load_sample("hk_cpi"), "2015")


@pytest.fixture(scope="session")
def hk_windows():
    return [Window.from_dict(d) for d in HK_WINDOWS]


_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by a test")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, text = mark.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    prev = _CRITERIA.get(num, (text, "PASS"))
    if call.when == "call" or failed:
        _CRITERIA[num] = (text, "FAIL" if failed or prev[1] == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        text, status = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {text}")
