"""Command-line front end.

Verbs: synth (generate a dataset), run (evaluate one configuration), grid
(spectral parameter search), report (re-render a stored report), inspect
(dataset summary). Exit codes: 0 success, 2 usage or configuration error,
3 runtime failure (failed folds / empty grid) with partial output written.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import DatasetParams, SynthSpec, synthesize
from .errors import ConfigError, FormatError, SsvepError
from .evaluation import (
    GridResult,
    grid_search_welch,
    render_grid_table,
    render_report,
    report_from_record,
    run_experiment,
    write_structured_log,
)
from .io import load_dataset, save_dataset
from .pipeline import PRESETS, PipelineConfig, load_config

USAGE_ERROR = 2
RUNTIME_ERROR = 3


def _parse_synth_spec(path: Path) -> tuple[SynthSpec, DatasetParams]:
    items: dict[str, str] = {}
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()

    known = {
        "subjects",
        "trials_per_freq",
        "snr_db",
        "harmonics",
        "blink_rate",
        "seed",
        "frequencies",
        "rate",
        "duration",
        "channels",
    }
    unknown = set(items) - known
    if unknown:
        raise ConfigError(f"unknown synth keys: {sorted(unknown)}", key=sorted(unknown)[0])

    try:
        snr_raw = items.get("snr_db", "20")
        snr: float | tuple[float, ...]
        if "," in snr_raw:
            snr = tuple(float(v) for v in snr_raw.split(","))
        else:
            snr = float(snr_raw)
        spec = SynthSpec(
            n_subjects=int(items.get("subjects", "1")),
            n_trials_per_freq=int(items.get("trials_per_freq", "2")),
            snr_db=snr,
            n_harmonics=int(items.get("harmonics", "3")),
            blink_rate=float(items.get("blink_rate", "0")),
            seed=int(items.get("seed", "0")),
        )
        freqs = tuple(float(v) for v in items.get("frequencies", "6.66,7.50,8.57,10.00,12.00").split(","))
        params = DatasetParams(
            stimulus_frequencies=freqs,
            sample_rate=float(items.get("rate", "250")),
            duration_s=float(items.get("duration", "5")),
            n_channels=int(items.get("channels", "8")),
        )
    except ValueError as exc:
        raise ConfigError(f"bad synth spec value: {exc}") from None
    return spec, params


def _load_run_config(args) -> PipelineConfig:
    base = PRESETS[args.preset]() if args.preset else PipelineConfig()
    if args.config:
        base = load_config(args.config, base=base)
    if args.seed is not None:
        base = replace(base, clf_seed=args.seed)
    return base


def _write_report_files(report, out_dir: Path, verbose: bool) -> None:
    from . import plots

    out_dir.mkdir(parents=True, exist_ok=True)
    table, record = render_report(report)
    (out_dir / "report.txt").write_text(table + "\n")
    (out_dir / "report.json").write_text(json.dumps(record, indent=2) + "\n")
    write_structured_log(report, out_dir / "report.jsonl")
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "accuracy_pct"])
        for label, acc in report.subject_accuracy.items():
            writer.writerow([label, f"{acc:.4f}"])
        writer.writerow(["mean", f"{report.mean_accuracy:.4f}"])
        writer.writerow(["time_msec", f"{report.latency_ms_median:.4f}"])
    plots.save_accuracy_figure(report, out_dir / "accuracy.png")
    plots.save_latency_figure(report, out_dir / "latency.png")
    if verbose:
        print(f"wrote report files under {out_dir}", file=sys.stderr)


def _write_grid_files(result: GridResult, out_dir: Path) -> None:
    from . import plots

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "grid.txt").write_text(render_grid_table(result) + "\n")
    with open(out_dir / "grid.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nfft", "segment_len", "overlap", "mean_accuracy_pct", "time_msec"])
        for row in result.rows:
            writer.writerow([row.nfft, row.segment_len, row.overlap, f"{row.mean_accuracy:.4f}", f"{row.latency_ms_median:.4f}"])
    record = {
        "rows": [row.__dict__ for row in result.rows],
        "skipped": [{"nfft": c[0], "segment_len": c[1], "overlap": c[2], "reason": reason} for c, reason in result.skipped],
    }
    (out_dir / "grid.json").write_text(json.dumps(record, indent=2) + "\n")
    if result.rows:
        plots.save_grid_figure(result, out_dir / "grid.png")


def cmd_synth(args) -> int:
    spec, params = _parse_synth_spec(Path(args.spec))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    dataset = synthesize(spec, params)
    save_dataset(dataset, args.out, format="binary")
    print(
        f"wrote {args.out}: {len(dataset)} trials, {len(dataset.subject_ids)} subjects, "
        f"{dataset.channel_count} channels @ {dataset.sample_rate:g} Hz, "
        f"stimuli {', '.join(f'{f:g}' for f in dataset.stimulus_frequencies)} Hz"
    )
    return 0


def _canonical_protocol(name: str) -> str:
    return "loo_sample" if name == "loo" else name


def cmd_run(args) -> int:
    config = _load_run_config(args)
    dataset = load_dataset(args.dataset)
    report = run_experiment(config, dataset, protocol=_canonical_protocol(args.protocol), jobs=args.jobs)
    table, _ = render_report(report)
    print(table)
    if args.out:
        _write_report_files(report, Path(args.out), args.verbose)
    return RUNTIME_ERROR if report.failed_folds else 0


def _parse_grid(raw: str | None, cast, default):
    if raw is None:
        return default
    try:
        return tuple(cast(v) for v in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid list {raw!r}: {exc}") from None


def cmd_grid(args) -> int:
    from .evaluation import DEFAULT_NFFT_GRID, DEFAULT_OVERLAP_GRID, DEFAULT_SEGMENT_GRID

    config = _load_run_config(args)
    dataset = load_dataset(args.dataset)
    result = grid_search_welch(
        dataset,
        config,
        nfft_grid=_parse_grid(args.nfft_grid, int, DEFAULT_NFFT_GRID),
        segment_grid=_parse_grid(args.segment_grid, int, DEFAULT_SEGMENT_GRID),
        overlap_grid=_parse_grid(args.overlap_grid, float, DEFAULT_OVERLAP_GRID),
        protocol=_canonical_protocol(args.protocol),
        jobs=args.jobs,
    )
    print(render_grid_table(result))
    if args.out:
        _write_grid_files(result, Path(args.out))
    return 0 if result.rows else RUNTIME_ERROR


def cmd_report(args) -> int:
    record = json.loads(Path(args.input).read_text())
    report = report_from_record(record)
    table, _ = render_report(report)
    print(table)
    if args.out:
        _write_report_files(report, Path(args.out), args.verbose)
    return 0


def cmd_inspect(args) -> int:
    dataset = load_dataset(args.dataset)
    labels = [t.label for t in dataset.trials]
    print(f"trials:     {len(dataset)}")
    print(f"subjects:   {', '.join(str(s) for s in dataset.subject_ids) or '-'}")
    print(f"channels:   {dataset.channel_count}")
    print(f"rate:       {dataset.sample_rate:g} Hz")
    if dataset.trials:
        print(f"samples:    {dataset.trials[0].n_samples} per trial ({dataset.trials[0].duration_s:g} s)")
    print(f"stimuli:    {', '.join(f'{f:g}' for f in dataset.stimulus_frequencies)} Hz")
    for freq in dataset.stimulus_frequencies:
        print(f"  {freq:6.2f} Hz: {sum(1 for v in labels if v == freq)} trials")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssvepkit", description="SSVEP pipeline experiments")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--spec", required=True, help="synth spec file (key = value)")
    p_synth.add_argument("--out", required=True, help="output dataset path")
    p_synth.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p_synth.set_defaults(func=cmd_synth)

    for name, func, help_text in (
        ("run", cmd_run, "evaluate one configuration"),
        ("grid", cmd_grid, "spectral parameter grid search"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dataset", required=True, help="dataset file (binary)")
        p.add_argument("--config", default=None, help="experiment config file")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None, help="named base configuration")
        p.add_argument("--out", default=None, help="output directory for report files and figures")
        p.add_argument("--protocol", choices=("loso", "loo", "loo_sample"), default="loso",
                       help="loso = leave one subject out; loo = leave one sample out")
        p.add_argument("--jobs", type=int, default=1, help="parallel folds (default 1 for timing fidelity)")
        p.add_argument("--seed", type=int, default=None, help="seed overriding clf.seed")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "grid":
            p.add_argument("--nfft-grid", default=None, help="comma list, e.g. 256,512")
            p.add_argument("--segment-grid", default=None, help="comma list, e.g. 156,350")
            p.add_argument("--overlap-grid", default=None, help="comma list, e.g. 0.5,0.75")
        p.set_defaults(func=func)

    p_report = sub.add_parser("report", help="re-render a stored report")
    p_report.add_argument("--input", required=True, help="report.json produced by run")
    p_report.add_argument("--out", default=None, help="output directory for table and figures")
    p_report.add_argument("-v", "--verbose", action="store_true")
    p_report.set_defaults(func=cmd_report)

    p_inspect = sub.add_parser("inspect", help="summarize a dataset file")
    p_inspect.add_argument("--dataset", required=True)
    p_inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"config error: {exc}{key}", file=sys.stderr)
        return USAGE_ERROR
    except (FormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, SsvepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
