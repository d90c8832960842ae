"""Command-line front end.

Exit status: 0 on success, 1 on a data error, 2 on a usage error. Data
goes to stdout or ``--out``; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from bubblepeak import __version__
from bubblepeak import cross_section as xs
from bubblepeak import valuation
from bubblepeak.charts import ChartSpec, Line, render_chart
from bubblepeak.estimator import fit_phase, fit_phase_oracle
from bubblepeak.ingest import DataError, DeflationRecord, Period, Schema, deflate, load_series, write_series
from bubblepeak.peak_model import rough_projection
from bubblepeak.predictor import CONVENTIONS, EpisodeFits, compare_city, fit_episode, predict_decline
from bubblepeak.report import RunManifest, document, dumps, write_report
from bubblepeak.series_ops import annualize, load_windows, segment_episodes

log = logging.getLogger("bubblepeak")


class UsageError(Exception):
    pass


def _add_series_args(p: argparse.ArgumentParser, flag: str = "--series", required: bool = True) -> None:
    p.add_argument(flag, required=required, type=Path, help="delimited file with a header row")
    p.add_argument("--period-col", default="period")
    p.add_argument("--value-col", default="value")


def _schema(args, basis: str = "nominal") -> Schema:
    deflation = None
    if getattr(args, "cpi_label", None):
        deflation = DeflationRecord(args.cpi_label, args.cpi_base or "")
    return Schema(args.period_col, args.value_col, basis=getattr(args, "basis", None) or basis,
                  deflation=deflation, label=getattr(args, "label", None))


def _load(path: Path, args, **kw):
    return load_series(path, _schema(args, **kw))


def _emit(args, kind: str, payload) -> None:
    text = dumps(document(kind, payload))
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _time(x: str) -> float:
    try:
        return float(x)
    except ValueError:
        return Period.parse(x).to_time()


def cmd_ingest(args) -> None:
    series = _load(args.series, args)
    if args.out:
        write_series(series, args.out)
    else:
        sys.stdout.write(dumps(document("series", {**series.metadata(), "observations": [
            [str(p), v] for p, v in zip(series.periods(), series.values)]})))


def cmd_deflate(args) -> None:
    series = _load(args.series, args)
    cpi = load_series(args.cpi, Schema(args.cpi_period_col, args.cpi_value_col))
    out = deflate(series, cpi, args.base)
    if args.out:
        write_series(out, args.out)
    else:
        sys.stdout.write(dumps(document("series", {**out.metadata(), "observations": [
            [str(p), v] for p, v in zip(out.periods(), out.values)]})))


def cmd_segment(args) -> None:
    series = _load(args.series, args)
    episodes = segment_episodes(series, load_windows(args.config), args.ongoing_factor)
    _emit(args, "episodes", [e.to_dict() for e in episodes])


def cmd_fit(args) -> None:
    series = _load(args.series, args)
    if args.config:
        if args.episode is None:
            raise UsageError("--config needs --episode")
        episodes = segment_episodes(series, load_windows(args.config), args.ongoing_factor)
        if not 1 <= args.episode <= len(episodes):
            raise DataError(f"episode {args.episode} not found ({len(episodes)} episodes)")
        _emit(args, "episode_fits", fit_episode(series, episodes[args.episode - 1]).to_dict())
        return
    if not (args.peak and args.phase):
        raise UsageError("give --peak and --phase, or --config and --episode")
    t2 = Period.parse(args.peak).to_time()
    try:
        p2 = series.value_at(t2)
    except KeyError:
        raise DataError(f"no observation at peak {args.peak}") from None
    if args.phase == "rising":
        lo, hi = (_time(args.start) if args.start else series.times[0]), t2
    else:
        lo, hi = t2, (_time(args.end) if args.end else series.times[-1])
    part = series.between(lo, hi)
    fit = fit_phase(part, (t2, p2), args.phase, label=args.label or series.label)
    payload = fit.to_dict()
    if args.oracle:
        payload["oracle"] = fit_phase_oracle(part, (t2, p2), args.phase).to_dict()
    _emit(args, "peak_fit", payload)


def _read_doc(path: Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return doc.get("data", doc)


def cmd_predict(args) -> None:
    cur = EpisodeFits.from_dict(_read_doc(args.current))
    ref = EpisodeFits.from_dict(_read_doc(args.reference))
    traj = predict_decline(
        cur.episode, cur.rising, ref.episode, ref.rising, ref.falling, args.horizon,
        alpha_threshold=args.alpha_threshold, tau_threshold=args.tau_threshold,
        convention=args.convention,
    )
    _emit(args, "prediction", traj.to_dict())


def cmd_multiplier(args) -> None:
    if args.m_values:
        _emit(args, "mean_m", {"values": args.m_values, "mean": xs.mean_m(args.m_values)})
        return
    if not args.classes:
        raise UsageError("give --classes or --m-values")
    rows = list(csv.DictReader(args.classes.read_text(encoding="utf-8").splitlines()))
    if args.location:
        rows = [r for r in rows if r.get("location") == args.location]
    points = [xs.ClassAmplitude(r["class_label"], float(r["p1"]), float(r["A1"])) for r in rows]
    _emit(args, "multiplier_fit", xs.multiplier_fit(points, args.level).to_dict())


def cmd_yield(args) -> None:
    prices = _load(args.prices, args)
    rents = _load(args.rents, args)
    _emit(args, "yields", [p.to_dict() for p in xs.yield_series(prices, rents)])


def cmd_correlate(args) -> None:
    if args.r is not None:
        if args.n is None:
            raise UsageError("--r needs --n")
        lo, hi = xs.fisher_ci(args.r, args.n, args.level)
        _emit(args, "correlation", {"r": args.r, "n": args.n, "level": args.level, "ci": [lo, hi]})
        return
    if not (args.file and args.x_col and args.y_col):
        raise UsageError("give --file with --x-col and --y-col, or --r and --n")
    rows = list(csv.DictReader(args.file.read_text(encoding="utf-8").splitlines()))
    try:
        x = [float(r[args.x_col]) for r in rows]
        y = [float(r[args.y_col]) for r in rows]
    except (KeyError, ValueError) as exc:
        raise DataError(f"{args.file}: {exc}") from None
    _emit(args, "correlation", xs.correlation(x, y, args.level).to_dict())


def cmd_growth(args) -> None:
    series = _load(args.series, args)
    _emit(args, "growth_ratio", xs.growth_ratio(series, tuple(args.span1), tuple(args.span2)).to_dict())


def cmd_valuation(args) -> None:
    _emit(args, "valuation", valuation.run_scenario(valuation.load_scenario(args.scenario)))


def cmd_plot(args) -> None:
    lines = []
    for flag, paths in (("solid", args.series or []), ("dashed", args.dashed or []), ("right", args.right or [])):
        for path in paths:
            s = load_series(path, Schema(args.period_col, args.value_col))
            lines.append(Line(s.label, s.times, s.values, dashed=flag == "dashed",
                              axis="right" if flag == "right" else "left"))
    if not lines:
        raise UsageError("nothing to plot")
    svg = render_chart(ChartSpec(title=args.title or "", x_label="year", y_label=args.y_label or "",
                                 y2_label=args.y2_label or ""), lines)
    Path(args.out).write_text(svg, encoding="utf-8")


def build_report(series, cpi, base, windows, rents=None, horizon=10.0):
    """Results and charts for the full pipeline on one market.

    Every number comes from a library operation; this only wires them together.
    """
    real = deflate(series, cpi, base)
    fits = compare_city(real, windows)
    results = {"episodes": {"schema_version": "1.0", "episodes": [f.to_dict() for f in fits]}}
    lines = [Line(f"{real.label} (constant {base})", real.times, real.values)]

    complete = [f for f in fits if f.falling is not None]
    current = fits[-1]
    if complete and current is not complete[-1]:
        ref = complete[-1]
        traj = predict_decline(current.episode, current.rising, ref.episode, ref.rising, ref.falling,
                               horizon, deflation=real.deflation)
        results["prediction"] = {"schema_version": "1.0", **traj.to_dict()}
        proj = rough_projection(real, current.episode, ref.episode)
        results["rough_projection"] = {
            "schema_version": "1.0",
            "trajectory": [[t, v] for t, v in zip(proj.times, proj.values)],
        }
        lines.append(Line("rough projection (reference decline replayed)", proj.times, proj.values, dashed=True))
        recent = real.between(current.episode.t1, current.episode.t2)
        pred_chart = render_chart(
            ChartSpec(title="Projected decline", x_label="year", y_label=f"price (constant {base})"),
            [Line("observed", recent.times, recent.values),
             Line("projection", traj.series.times, traj.series.values, dashed=True)],
        )
    else:
        pred_chart = None

    if rents is not None:
        ann_p, ann_r = annualize(series), annualize(rents)
        yields = xs.yield_series(ann_p, ann_r)
        ann_real = annualize(real)
        corr = xs.correlation(ann_real.values, [y.yield_ for y in yields])
        results["yields"] = {"schema_version": "1.0", "points": [y.to_dict() for y in yields],
                             "price_yield_correlation": corr.to_dict()}
        lines.append(Line("gross yield, %", [y.t for y in yields], [100 * y.yield_ for y in yields],
                          axis="right"))

    charts = {"recurrence": render_chart(
        ChartSpec(title="Price episodes and projection", x_label="year",
                  y_label=f"price (constant {base})", y2_label="yield (%)" if rents is not None else ""),
        lines,
    )}
    if pred_chart:
        charts["prediction"] = pred_chart
    return results, charts


def cmd_report(args) -> None:
    manifest = RunManifest(command="report")
    series = _load(args.series, args)
    manifest.add_input(args.series)
    cpi = load_series(args.cpi, Schema(args.cpi_period_col, args.cpi_value_col))
    manifest.add_input(args.cpi)
    manifest.add_input(args.config)
    rents = None
    if args.rents:
        rents = load_series(args.rents, Schema(args.period_col, args.value_col))
        manifest.add_input(args.rents)
    manifest.parameters = {"base": args.base, "horizon": args.horizon}
    results, charts = build_report(series, cpi, args.base, load_windows(args.config), rents, args.horizon)
    write_report(args.out, manifest, results, charts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bubblepeak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="validate and normalize a series file")
    _add_series_args(p)
    p.add_argument("--label")
    p.add_argument("--basis", choices=("nominal", "deflated"))
    p.add_argument("--cpi-label", help="deflation record for an already deflated file")
    p.add_argument("--cpi-base")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("deflate", help="convert a nominal series to constant prices")
    _add_series_args(p)
    p.add_argument("--cpi", required=True, type=Path)
    p.add_argument("--cpi-period-col", default="period")
    p.add_argument("--cpi-value-col", default="value")
    p.add_argument("--base", required=True, help="base period, e.g. 2015 or 2015Q3")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_deflate)

    for name, helptext in (("segment", "locate episodes"), ("fit", "estimate (alpha, tau)")):
        p = sub.add_parser(name, help=helptext)
        _add_series_args(p)
        p.add_argument("--config", type=Path, help="JSON list of {label, window_start, window_end}")
        p.add_argument("--ongoing-factor", type=float, default=1.1)
        p.add_argument("--out", type=Path)
        if name == "segment":
            p.set_defaults(func=cmd_segment)
        else:
            p.add_argument("--episode", type=int, help="1-based episode number (with --config)")
            p.add_argument("--peak", help="peak period, e.g. 1997Q2")
            p.add_argument("--phase", choices=("rising", "falling"))
            p.add_argument("--start", help="first period of a rising phase")
            p.add_argument("--end", help="last period of a falling phase")
            p.add_argument("--label")
            p.add_argument("--oracle", action="store_true", help="also run the grid-search oracle")
            p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="project a decline from a reference episode")
    p.add_argument("--current", required=True, type=Path, help="episode fits JSON (fit --config --episode)")
    p.add_argument("--reference", required=True, type=Path)
    p.add_argument("--horizon", required=True, type=float, help="years")
    p.add_argument("--alpha-threshold", type=float, default=0.40)
    p.add_argument("--tau-threshold", type=float, default=0.25)
    p.add_argument("--convention", choices=CONVENTIONS, default="reference")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("multiplier", help="amplitude vs log initial price regression")
    p.add_argument("--classes", type=Path, help="CSV with class_label,p1,A1[,location]")
    p.add_argument("--location", help="keep rows with this location")
    p.add_argument("--m-values", type=float, nargs="+", help="average these slopes instead")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_multiplier)

    p = sub.add_parser("yield", help="gross yield and PER")
    p.add_argument("--prices", required=True, type=Path)
    p.add_argument("--rents", required=True, type=Path)
    p.add_argument("--period-col", default="period")
    p.add_argument("--value-col", default="value")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_yield)

    p = sub.add_parser("correlate", help="Pearson r with a Fisher-z interval")
    p.add_argument("--file", type=Path)
    p.add_argument("--x-col")
    p.add_argument("--y-col")
    p.add_argument("--r", type=float, help="interval for a given r (needs --n)")
    p.add_argument("--n", type=int)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("growth", help="compound annual growth over two spans")
    _add_series_args(p)
    p.add_argument("--span1", nargs=2, required=True, metavar=("START", "END"))
    p.add_argument("--span2", nargs=2, required=True, metavar=("START", "END"))
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("valuation", help="housing stock valuation scenario")
    p.add_argument("--scenario", type=Path, help="scenario JSON (default: bundled 2015 preset)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_valuation)

    p = sub.add_parser("plot", help="SVG line chart of series files")
    p.add_argument("--series", type=Path, nargs="+")
    p.add_argument("--dashed", type=Path, nargs="+")
    p.add_argument("--right", type=Path, nargs="+", help="series on the secondary axis")
    p.add_argument("--period-col", default="period")
    p.add_argument("--value-col", default="value")
    p.add_argument("--title")
    p.add_argument("--y-label")
    p.add_argument("--y2-label")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("report", help="full pipeline into a report directory")
    _add_series_args(p)
    p.add_argument("--cpi", required=True, type=Path)
    p.add_argument("--cpi-period-col", default="period")
    p.add_argument("--cpi-value-col", default="value")
    p.add_argument("--base", required=True)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--rents", type=Path)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.propagate = False
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bubblepeak {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, KeyError, OSError) as exc:
        print(f"bubblepeak {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
