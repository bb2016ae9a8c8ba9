"""Command-line front end.

Subcommands: simulate, theory, stats, histogram, reproduce. All outputs are
plot-ready CSV (decimal text, fixed column order, newline-terminated rows)
with JSON metadata sidecars. Exit codes: 0 success, 2 usage or config error,
3 degenerate-physics error. All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    StudyConfig,
    default_bin_sets,
    histogram,
    sd_vs_n_study,
    visibility,
    visibility_across_seeds,
)
from .imaging import (
    DegenerateObjectError,
    GeometryError,
    SimulationConfig,
    TemporalObject,
    default_double_slit,
    normalize,
    object_from_segments,
    simulate,
)
from .source import SourceConfig, sample_block
from .theory import (
    BandwidthSet,
    bandwidths_for_bin_width,
    predicted_visibility,
    theoretical_image,
    white_noise_image,
)

EXIT_USAGE = 2
EXIT_DEGENERATE = 3

OUTPUT_DIR_ENV = "TGISIM_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_object(args) -> TemporalObject:
    if args.object is None:
        return default_double_slit(args.bins if args.bins is not None else 100)
    try:
        with open(args.object) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read object file {args.object}: {exc}") from exc
    try:
        period_bins = int(doc["period_bins"])
        segments = [
            (seg["start"], seg["width"], seg["height"]) for seg in doc["segments"]
        ]
    except (KeyError, TypeError) as exc:
        raise UsageError(
            f"object file {args.object} must contain period_bins and "
            f"segments [{{start, width, height}}]"
        ) from exc
    try:
        obj = object_from_segments(period_bins, segments)
    except (GeometryError, ValueError) as exc:
        raise UsageError(f"invalid object geometry: {exc}") from exc
    if args.bins is not None and args.bins != obj.period_bins:
        raise UsageError(
            f"--bins {args.bins} conflicts with object file period_bins "
            f"{obj.period_bins}"
        )
    return obj


def _out_path(args, default_name: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / default_name


def _source_meta(source: SourceConfig) -> dict:
    return {"rg_count": source.rg_count, "mean_intensity": source.mean_intensity}


def _versions() -> dict:
    return {"tgisim": __version__, "numpy": np.__version__}


def cmd_simulate(args) -> int:
    obj = _load_object(args)
    source = SourceConfig(args.rg_count, args.mu)
    image = normalize(
        simulate(
            SimulationConfig(source, obj, args.periods, seed=args.seed, workers=args.workers)
        )
    )
    out = _out_path(args, "image.csv")
    rows = [
        (t, image.g2[t], image.stderr[t], obj.amplitude[t])
        for t in range(obj.period_bins)
    ]
    _write_csv(out, ["bin", "g2", "stderr", "object_amplitude"], rows)
    _write_json(
        out.with_suffix(".json"),
        {
            "source": _source_meta(source),
            "periods": args.periods,
            "seed": args.seed,
            "workers": args.workers,
            "versions": _versions(),
        },
    )
    return 0


def cmd_theory(args) -> int:
    obj = _load_object(args)
    if args.white_noise:
        if args.bands:
            raise UsageError("--white-noise and --bands are mutually exclusive")
        curve = white_noise_image(obj, args.rg_count)
    else:
        if not args.bands:
            raise UsageError("either --white-noise or --bands is required")
        if len(args.bands) != args.rg_count:
            raise UsageError(
                f"--bands expects {args.rg_count} values (one per stage), "
                f"got {len(args.bands)}"
            )
        curve = theoretical_image(
            obj, BandwidthSet(np.asarray(args.bands)), quadrature_step=args.step
        )
    out = _out_path(args, "theory.csv")
    _write_csv(out, ["bin", "g2"], list(enumerate(curve.g2)))
    _write_json(
        out.with_suffix(".json"),
        {"provenance": curve.provenance, "rg_count": args.rg_count, "versions": _versions()},
    )
    return 0


def cmd_stats(args) -> int:
    config = StudyConfig(
        rg_counts=args.rg_counts,
        samples_per_run=args.samples,
        runs=args.runs,
        seed=args.seed,
        mean_intensity=args.mu,
    )
    result = sd_vs_n_study(config)
    out = _out_path(args, "study.csv")
    _write_csv(
        out,
        ["rg_count", "samples_per_run", "mean_g2", "sd_g2", "runs", "theory_g2"],
        result.rows,
    )
    _write_json(
        out.with_suffix(".json"),
        {
            "rg_counts": list(config.rg_counts),
            "samples_per_run": list(config.samples_per_run),
            "runs": config.runs,
            "seed": config.seed,
            "mean_intensity": config.mean_intensity,
            "versions": _versions(),
        },
    )
    return 0


def cmd_histogram(args) -> int:
    source = SourceConfig(args.rg_count, args.mu)
    block = sample_block(source, args.samples, args.seed)
    result = histogram(block, bin_count=args.bins, range_max=args.range_max)
    out = _out_path(args, "histogram.csv")
    rows = [
        (result.bin_edges[i], result.bin_edges[i + 1], result.probabilities[i])
        for i in range(len(result.probabilities))
    ]
    rows.append((result.bin_edges[-1], float("inf"), result.overflow))
    _write_csv(out, ["bin_low", "bin_high", "probability"], rows)
    _write_json(
        out.with_suffix(".json"),
        {
            "source": _source_meta(source),
            "samples": args.samples,
            "seed": args.seed,
            "bin_count": args.bins,
            "range_max": result.bin_edges[-1],
            "versions": _versions(),
        },
    )
    return 0


def _reproduce_images(out_dir: Path, args, obj, summary_rows) -> None:
    peak, back = default_bin_sets(obj)
    vis_rows = []
    for rg_count in range(1, 7):
        source = SourceConfig(rg_count)
        seeds = [args.seed + 1000 * rg_count + k for k in range(args.image_seeds)]
        image = normalize(
            simulate(
                SimulationConfig(source, obj, args.periods, seed=seeds[0], workers=args.workers)
            )
        )
        _write_csv(
            out_dir / f"image_n{rg_count}.csv",
            ["bin", "g2", "stderr", "object_amplitude"],
            [
                (t, image.g2[t], image.stderr[t], obj.amplitude[t])
                for t in range(obj.period_bins)
            ],
        )
        wn = white_noise_image(obj, rg_count)
        _write_csv(
            out_dir / f"theory_n{rg_count}.csv",
            ["bin", "g2"],
            list(enumerate(wn.g2)),
        )
        res = visibility_across_seeds(
            source, obj, args.periods, seeds, peak, back, workers=args.workers
        )
        predicted = predicted_visibility(obj, rg_count, peak)
        vis_rows.append(
            (
                rg_count,
                res.visibility,
                res.spread,
                res.seeds_used,
                predicted,
            )
        )
    _write_csv(
        out_dir / "visibility.csv",
        ["rg_count", "visibility", "seed_sd", "seeds", "predicted"],
        vis_rows,
    )
    by_n = {row[0]: row for row in vis_rows}
    summary_rows.append(
        ("visibility_n1", by_n[1][1], 0.042, 0.052, by_n[1][4])
    )
    summary_rows.append(
        ("visibility_n6", by_n[6][1], 0.67, 0.83, by_n[6][4])
    )
    increasing = all(
        by_n[n][1] < by_n[n + 1][1] for n in range(1, 6)
    )
    summary_rows.append(("visibility_monotone", float(increasing), 1.0, 1.0, 1.0))


def _reproduce_study(out_dir: Path, args, summary_rows) -> None:
    result = sd_vs_n_study(
        StudyConfig(
            rg_counts=range(1, 7),
            samples_per_run=[20000],
            runs=args.study_runs,
            seed=args.seed + 71,
        )
    )
    _write_csv(
        out_dir / "coherence_vs_stages.csv",
        ["rg_count", "samples_per_run", "mean_g2", "sd_g2", "runs", "theory_g2"],
        result.rows,
    )
    sds = [row[3] for row in result.rows]
    summary_rows.append(
        ("coherence_sd_monotone", float(all(a < b for a, b in zip(sds, sds[1:]))), 1.0, 1.0, 1.0)
    )
    for row in result.rows:
        rg_count, _, mean_g2, sd_g2, runs, theory_g2 = row
        half = 3 * sd_g2 / np.sqrt(runs) if rg_count <= 3 else 3 * sd_g2
        summary_rows.append(
            (
                f"g2_zero_n{rg_count}",
                mean_g2,
                theory_g2 - half,
                theory_g2 + half,
                theory_g2,
            )
        )


def _reproduce_histograms(out_dir: Path, args, summary_rows) -> None:
    first_bins = []
    for rg_count in range(1, 7):
        source = SourceConfig(rg_count, 5000.0)
        block = sample_block(source, 50000, args.seed + 300 + rg_count)
        result = histogram(block)
        rows = [
            (result.bin_edges[i], result.bin_edges[i + 1], result.probabilities[i])
            for i in range(len(result.probabilities))
        ]
        rows.append((result.bin_edges[-1], float("inf"), result.overflow))
        _write_csv(
            out_dir / f"histogram_n{rg_count}.csv",
            ["bin_low", "bin_high", "probability"],
            rows,
        )
        first_bins.append(float(result.probabilities[0]))
    summary_rows.append(("histogram_first_bin_n6", first_bins[-1], 0.9, 1.0, 0.98))
    increasing = all(a < b for a, b in zip(first_bins, first_bins[1:]))
    summary_rows.append(("histogram_concentration_monotone", float(increasing), 1.0, 1.0, 1.0))


def _reproduce_sd_curves(out_dir: Path, args, summary_rows) -> None:
    counts = [100, 200, 500, 1000, 2000, 5000, 10000, 20000]
    result = sd_vs_n_study(
        StudyConfig(
            rg_counts=range(1, 7),
            samples_per_run=counts,
            runs=args.sd_runs,
            seed=args.seed + 9000,
        )
    )
    _write_csv(
        out_dir / "sd_vs_samples.csv",
        ["rg_count", "samples_per_run", "mean_g2", "sd_g2", "runs", "theory_g2"],
        result.rows,
    )
    for rg_count in (1, 2):
        sds = [result.cell(rg_count, c)[3] for c in counts]
        summary_rows.append(
            (
                f"sd_decreasing_n{rg_count}",
                float(all(a > b for a, b in zip(sds, sds[1:]))),
                1.0,
                1.0,
                1.0,
            )
        )
    for rg_count in (5, 6):
        summary_rows.append(
            (
                f"sd_growth_n{rg_count}",
                float(result.cell(rg_count, 5000)[3] > result.cell(rg_count, 100)[3]),
                1.0,
                1.0,
                1.0,
            )
        )


def cmd_reproduce(args) -> int:
    out_dir = Path(
        args.out_dir
        if args.out_dir is not None
        else Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"reproduce_seed{args.seed}"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    obj = default_double_slit()
    _write_json(
        out_dir / "config.json",
        {
            "seed": args.seed,
            "workers": args.workers,
            "periods": args.periods,
            "image_seeds": args.image_seeds,
            "study_runs": args.study_runs,
            "sd_runs": args.sd_runs,
            "versions": _versions(),
        },
    )
    summary_rows = []
    failed = False
    steps = [
        lambda: _reproduce_images(out_dir, args, obj, summary_rows),
        lambda: _reproduce_study(out_dir, args, summary_rows),
        lambda: _reproduce_histograms(out_dir, args, summary_rows),
        lambda: _reproduce_sd_curves(out_dir, args, summary_rows),
    ]
    for step in steps:
        try:
            step()
        except Exception as exc:  # keep completed artifacts on partial failure
            print(f"reproduce step failed: {exc}", file=sys.stderr)
            failed = True
    summary = [
        (name, value, lo, hi, reference, int(lo <= value <= hi))
        for name, value, lo, hi, reference in summary_rows
    ]
    _write_csv(
        out_dir / "summary.csv",
        ["quantity", "value", "target_low", "target_high", "reference", "pass"],
        summary,
    )
    for name, value, lo, hi, _, ok in summary:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: {_fmt(value)} in [{_fmt(lo)}, {_fmt(hi)}]")
    if failed or any(not ok for *_, ok in summary):
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgisim",
        description="Temporal ghost imaging with cascaded-exponential light: "
        "simulation, theory curves, and estimator studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_object_args(p):
        p.add_argument("--object", help="JSON object file (period_bins + segments)")
        p.add_argument(
            "--bins",
            type=int,
            default=None,
            help="period length in bins for the built-in double slit (default 100)",
        )

    p = sub.add_parser("simulate", help="run the imaging protocol, write g2(t) CSV")
    p.add_argument("--rg-count", type=int, required=True)
    p.add_argument("--mu", type=float, default=1.0, help="mean intensity")
    p.add_argument("--periods", type=int, required=True)
    add_object_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="write a theoretical g2(t) curve CSV")
    p.add_argument("--rg-count", type=int, required=True)
    p.add_argument("--white-noise", action="store_true")
    p.add_argument("--bands", type=float, nargs="+", help="bandwidth per stage")
    p.add_argument("--step", type=float, default=1.0, help="quadrature step (bins)")
    add_object_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("stats", help="mean/SD study of the g2(0) estimator")
    p.add_argument("--rg-counts", type=int, nargs="+", required=True)
    p.add_argument("--samples", type=int, nargs="+", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("histogram", help="intensity histogram table")
    p.add_argument("--rg-count", type=int, required=True)
    p.add_argument("--mu", type=float, default=5000.0)
    p.add_argument("--samples", type=int, default=50000)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--range-max", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser(
        "reproduce", help="run the full battery of images, studies, and histograms"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir")
    p.add_argument("--periods", type=int, default=100000)
    p.add_argument("--image-seeds", type=int, default=10)
    p.add_argument("--study-runs", type=int, default=50)
    p.add_argument("--sd-runs", type=int, default=1000)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateObjectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
