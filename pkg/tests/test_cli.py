import json
import shutil

import pytest

from bubblepeak.cli import main
from bubblepeak.datasets import sample_path
from bubblepeak.report import RunManifest, SCHEMA_VERSION, write_report


@pytest.fixture
def data(tmp_path):
    for name in ("hk_nt_small_nominal.csv", "hk_nt_small_nominal.csv.json", "hk_cpi.csv", "hk_cpi.csv.json",
                 "hk_nt_small_rent_nominal.csv", "hk_nt_small_rent_nominal.csv.json", "hk_windows.json",
                 "hk_class_amplitudes.csv"):
        shutil.copy(sample_path(name), tmp_path / name)
    assert main(["deflate", "--series", str(tmp_path / "hk_nt_small_nominal.csv"),
                 "--cpi", str(tmp_path / "hk_cpi.csv"), "--base", "2015",
                 "--out", str(tmp_path / "hk_real.csv")]) == 0
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments_prints_usage(capsys):
    code, out, err = run(capsys)
    assert code == 2 and "usage" in (out + err).lower()


def test_unknown_option_is_usage_error(capsys):
    code, _, err = run(capsys, "fit", "--bogus")
    assert code == 2 and "usage" in err


def test_fit_falling_phase(data, capsys):
    code, out, _ = run(capsys, "fit", "--series", data / "hk_real.csv", "--peak", "1997Q2",
                       "--phase", "falling", "--end", "2002Q3")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA_VERSION and doc["kind"] == "peak_fit"
    assert 0.35 <= doc["data"]["alpha"] <= 0.47 and 13.6 <= doc["data"]["tau"] <= 18.4


def test_fit_with_oracle(data, capsys):
    code, out, _ = run(capsys, "fit", "--series", data / "hk_real.csv", "--peak", "1997Q2",
                       "--phase", "falling", "--end", "2002Q3", "--oracle")
    oracle = json.loads(out)["data"]["oracle"]
    assert code == 0 and oracle["phase"] == "falling"


def test_fit_missing_peak_is_data_error(data, capsys):
    code, _, err = run(capsys, "fit", "--series", data / "hk_real.csv", "--peak", "2030Q1", "--phase", "rising")
    assert code == 1 and "2030Q1" in err


def test_fit_without_peak_is_usage_error(data, capsys):
    code, _, _ = run(capsys, "fit", "--series", data / "hk_real.csv")
    assert code == 2


def test_bad_file_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("period,value\n2003Q1,1\n2003Q5,2\n")
    code, _, err = run(capsys, "ingest", "--series", p)
    assert code == 1 and "line 3" in err


def test_predict_from_episode_fits(data, capsys):
    for k in (1, 2):
        assert main(["fit", "--series", str(data / "hk_real.csv"), "--config", str(data / "hk_windows.json"),
                     "--episode", str(k), "--out", str(data / f"hk{k}.json")]) == 0
    code, out, err = run(capsys, "predict", "--current", data / "hk2.json", "--reference", data / "hk1.json",
                         "--horizon", "10")
    assert code == 0
    doc = json.loads(out)["data"]
    assert len(doc["trajectory"]) == 41
    assert doc["anchor"]["t"] == 2015.625
    assert doc["flagged"] is False and err == ""

    code, out, err = run(capsys, "predict", "--current", data / "hk2.json", "--reference", data / "hk1.json",
                         "--horizon", "10", "--alpha-threshold", "0", "--tau-threshold", "0")
    assert code == 0 and json.loads(out)["data"]["flagged"] is True
    assert "WARNING" in err


def test_segment(data, capsys):
    code, out, _ = run(capsys, "segment", "--series", data / "hk_real.csv", "--config", data / "hk_windows.json")
    eps = json.loads(out)["data"]
    assert code == 0 and [e["peak"]["t"] for e in eps] == [1997.375, 2015.625]
    assert eps[0]["end"]["t"] == eps[1]["start"]["t"]


def test_multiplier_and_correlate_and_valuation(data, capsys):
    code, out, _ = run(capsys, "multiplier", "--classes", data / "hk_class_amplitudes.csv",
                       "--location", "New Territories")
    assert code == 0 and json.loads(out)["data"]["m"] < 0
    code, out, _ = run(capsys, "multiplier", "--m-values", 3.9, 1.4, 1.5, 1.9, 3.0)
    assert json.loads(out)["data"]["mean"] == pytest.approx(2.34)
    code, out, _ = run(capsys, "correlate", "--r", -0.76, "--n", 28)
    lo, hi = json.loads(out)["data"]["ci"]
    assert round(lo, 2) == -0.88 and round(hi, 2) == -0.54
    code, out, _ = run(capsys, "valuation")
    assert code == 0 and json.loads(out)["data"]["stock_rmb"] == pytest.approx(5e12 / 1.19)


def test_correlate_file(tmp_path, capsys):
    p = tmp_path / "xy.csv"
    p.write_text("a,b\n1,2\n2,4.1\n3,5.9\n4,8.2\n")
    code, out, _ = run(capsys, "correlate", "--file", p, "--x-col", "a", "--y-col", "b")
    assert code == 0 and json.loads(out)["data"]["r"] > 0.99


def test_yield_and_growth(data, capsys):
    code, out, _ = run(capsys, "yield", "--prices", data / "hk_nt_small_nominal.csv",
                       "--rents", data / "hk_nt_small_rent_nominal.csv")
    pts = json.loads(out)["data"]
    assert code == 0 and all(abs(p["yield"] * p["per"] - 1) <= 1e-12 for p in pts)
    code, out, _ = run(capsys, "growth", "--series", data / "hk_cpi.csv", "--span1", "1992Q1", "1997Q1",
                       "--span2", "1997Q1", "2002Q1")
    assert code == 0 and json.loads(out)["data"]["g2"] < 0 < json.loads(out)["data"]["g1"]


def test_plot(data):
    out = data / "p.svg"
    assert main(["plot", "--series", str(data / "hk_real.csv"), "--dashed", str(data / "hk_cpi.csv"),
                 "--out", str(out)]) == 0
    assert out.read_text().count('stroke-dasharray="6 4" points') == 1


def report_args(data, out):
    return ["report", "--series", str(data / "hk_nt_small_nominal.csv"), "--cpi", str(data / "hk_cpi.csv"),
            "--base", "2015", "--config", str(data / "hk_windows.json"),
            "--rents", str(data / "hk_nt_small_rent_nominal.csv"), "--out", str(out)]


def test_report_is_byte_identical(data):
    a, b = data / "a", data / "b"
    assert main(report_args(data, a)) == 0
    assert main(report_args(data, b)) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert {"manifest.json", "episodes.json", "prediction.json", "recurrence.svg"} <= set(names)
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_write_report_counts(tmp_path):
    m = write_report(tmp_path / "empty", RunManifest("x"), {})
    assert [p.name for p in (tmp_path / "empty").iterdir()] == ["manifest.json"]
    assert json.loads(m.read_text())["outputs"] == []
    write_report(tmp_path / "two", RunManifest("x"), {"fit": {"a": 1}, "prediction": {"b": 2}}, {"chart": "<svg/>"})
    names = sorted(p.name for p in (tmp_path / "two").iterdir())
    assert names == ["chart.svg", "fit.json", "manifest.json", "prediction.json"]
