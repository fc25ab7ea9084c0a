"""Command-line interface: fit, scan and synth subcommands.

Configuration comes from an optional YAML file plus flags; a flag always
wins over the file.  Exit codes: 0 success, 1 usage or configuration
error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, fields, replace
from datetime import date as Date
from pathlib import Path

import numpy as np
import yaml

from .calibrate import GaConfig, SearchBounds, calibrate_window
from .dates import business_day_ladder
from .errors import ConfigError, DataError, UsageError
from .io import (
    fit_to_dict,
    ingest_csv,
    report_to_dict,
    write_curve_csv,
    write_fit_json,
    write_histogram_csv,
    write_report_json,
    write_series_csv,
)
from .model import LpplParams, Window
from .scan import FilterConfig, VerdictConfig, WindowConfig, accept_signal, derive_window_seed, scan
from .synth import SynthSpec, generate_lppl_series, generate_null_series

__all__ = ["RunConfig", "load_config", "main", "cmd_fit", "cmd_scan", "cmd_synth"]


@dataclass
class RunConfig:
    """Everything one run needs; nested configs carry their own defaults."""

    input: Path | None = None
    log_transform: bool = True
    window: WindowConfig = field(default_factory=WindowConfig)
    bounds: SearchBounds = field(default_factory=SearchBounds)
    ga: GaConfig = field(default_factory=GaConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    verdict: VerdictConfig = field(default_factory=VerdictConfig)
    seed: int = 0
    threads: int = 1
    out_dir: Path = Path(".")
    figures: bool = True
    polish: bool = True
    linear_solve: bool = False

    def validate(self) -> None:
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        self.window.validate()
        self.bounds.validate()
        self.ga.validate()
        self.filter.validate()
        self.verdict.validate()


def _build_section(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}' config: {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        coerced[key] = tuple(value) if isinstance(value, list) else value
    return cls(**coerced)


def load_config(path) -> RunConfig:
    """Parse a YAML config file into a RunConfig."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a key-value mapping")

    sections = {"window": WindowConfig, "bounds": SearchBounds, "ga": GaConfig,
                "filter": FilterConfig, "verdict": VerdictConfig}
    simple = {"input", "log_transform", "seed", "threads", "out_dir", "figures",
              "polish", "linear_solve"}
    unknown = set(raw) - simple - set(sections)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")

    kwargs = {}
    for key in simple & set(raw):
        kwargs[key] = raw[key]
    if "input" in kwargs and kwargs["input"] is not None:
        kwargs["input"] = Path(kwargs["input"])
    if "out_dir" in kwargs and kwargs["out_dir"] is not None:
        kwargs["out_dir"] = Path(kwargs["out_dir"])
    for name, cls in sections.items():
        if name in raw and raw[name] is not None:
            if not isinstance(raw[name], dict):
                raise ConfigError(f"config section '{name}' must be a mapping")
            kwargs[name] = _build_section(cls, raw[name], name)
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    # report usage problems through the exit-code contract instead of exiting
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpplscan",
                     description="LPPL bubble detection: GA calibration over sliding windows")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--input", type=Path, help="input CSV (header: date,value)")
        p.add_argument("--config", type=Path, help="YAML config file")
        p.add_argument("--out-dir", type=Path, help="output directory (default: .)")
        p.add_argument("--seed", type=int, help="master seed (default: 0)")
        p.add_argument("--threads", type=int, help="parallel window fits (default: 1)")
        p.add_argument("--no-log-transform", action="store_true",
                       help="fit raw values instead of ln(value)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        p.add_argument("--no-polish", action="store_true",
                       help="skip the Nelder-Mead refinement after the GA")
        p.add_argument("--linear-solve", action="store_true",
                       help="solve A, B, C by least squares per candidate")

    p_fit = sub.add_parser("fit", help="calibrate one window")
    add_run_flags(p_fit)
    p_fit.add_argument("--window-start", type=int, default=None,
                       help="window start index (default: 0)")
    p_fit.add_argument("--window-end", type=int, default=None,
                       help="window end index, inclusive (default: last)")
    p_fit.set_defaults(func=cmd_fit)

    p_scan = sub.add_parser("scan", help="calibrate many windows and aggregate signals")
    add_run_flags(p_scan)
    p_scan.set_defaults(func=cmd_scan)

    p_synth = sub.add_parser("synth", help="generate a synthetic series CSV")
    p_synth.add_argument("--kind", choices=["lppl", "null"], default="lppl")
    p_synth.add_argument("--out", type=Path, required=True, help="output CSV path")
    p_synth.add_argument("--n", type=int, default=250, help="number of observations")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--start-date", type=Date.fromisoformat, default=Date(2015, 1, 5),
                         help="first business day (ISO date)")
    p_synth.add_argument("--target", choices=["price", "log"], default="price",
                         help="write prices (exp of log values) or the log values")
    p_synth.add_argument("--A", type=float, default=2.0)
    p_synth.add_argument("--B", type=float, default=-0.6)
    p_synth.add_argument("--C", type=float, default=0.3)
    p_synth.add_argument("--m", type=float, default=0.5)
    p_synth.add_argument("--omega", type=float, default=8.0)
    p_synth.add_argument("--phi", type=float, default=1.0)
    p_synth.add_argument("--tc", type=float, default=260.0, help="critical time (index units)")
    p_synth.add_argument("--noise-sigma", type=float, default=0.0)
    p_synth.add_argument("--drift", type=float, default=2e-4, help="null-series drift")
    p_synth.add_argument("--vol", type=float, default=0.01, help="null-series volatility")
    p_synth.set_defaults(func=cmd_synth)

    return parser


def _resolve_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.input is not None:
        cfg.input = args.input
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.no_log_transform:
        cfg.log_transform = False
    if args.no_figures:
        cfg.figures = False
    if args.no_polish:
        cfg.polish = False
    if args.linear_solve:
        cfg.linear_solve = True
    if cfg.input is None:
        raise UsageError("an input CSV is required (--input or config key 'input')")
    cfg.validate()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def cmd_fit(args) -> int:
    cfg = _resolve_run_config(args)
    series = ingest_csv(cfg.input, log_transform=cfg.log_transform)
    start = args.window_start if args.window_start is not None else 0
    end = args.window_end if args.window_end is not None else len(series) - 1
    window = Window(start, end)

    window_seed = derive_window_seed(cfg.seed, window)
    ga = replace(cfg.ga, seed=window_seed)
    fit = calibrate_window(series, window, cfg.bounds, ga,
                           polish=cfg.polish, linear_solve=cfg.linear_solve)
    ok, reasons = accept_signal(fit, cfg.filter)
    fit = replace(fit, accepted=ok, rejection_reasons=tuple(reasons))

    payload = fit_to_dict(fit, series)
    payload["seed"] = cfg.seed
    payload["window_seed"] = window_seed
    write_fit_json(cfg.out_dir / "fit.json", payload)
    write_curve_csv(cfg.out_dir / "curve.csv", fit, series)
    if cfg.figures:
        from .plots import save_fit_figure

        save_fit_figure(series, fit, cfg.out_dir / "fit.png")

    status = "accepted" if fit.accepted else f"rejected ({', '.join(fit.rejection_reasons)})"
    print(f"fit window [{window.start}, {window.end}]: rmse={fit.rmse:.6g} "
          f"t_c={fit.params.t_c:.2f} ({payload['t_c_date'] or 'n/a'}) -> {status}")
    return 0


def _best_fit_for_curve(report):
    accepted = [f for f in report.fits if f.accepted]
    pool = accepted or list(report.fits)
    return min(pool, key=lambda f: f.rmse) if pool else None


def cmd_scan(args) -> int:
    cfg = _resolve_run_config(args)
    series = ingest_csv(cfg.input, log_transform=cfg.log_transform)
    report = scan(
        series,
        cfg.window,
        cfg.bounds,
        cfg.ga,
        cfg.filter,
        cfg.verdict,
        master_seed=cfg.seed,
        threads=cfg.threads,
        polish=cfg.polish,
        linear_solve=cfg.linear_solve,
    )
    if not report.fits:
        raise DataError("every window calibration failed; see report for details")

    payload = report_to_dict(
        report,
        series,
        seed=cfg.seed,
        window_config=cfg.window,
        bounds=cfg.bounds,
        ga_config=cfg.ga,
        filter_config=cfg.filter,
        log_transform=cfg.log_transform,
        polish=cfg.polish,
        linear_solve=cfg.linear_solve,
    )
    write_report_json(cfg.out_dir / "report.json", payload)
    write_histogram_csv(cfg.out_dir / "histogram.csv", report, series)
    best = _best_fit_for_curve(report)
    if best is not None:
        write_curve_csv(cfg.out_dir / "best_fit_curve.csv", best, series)
    if cfg.figures:
        from .plots import save_scan_figure

        save_scan_figure(series, report, best, cfg.out_dir / "scan.png")

    mode = f"mode t_c={report.mode_bin} ({report.mode_date})" if report.mode_bin is not None \
        else "no accepted signals"
    print(f"scan: {report.n_accepted}/{report.n_windows} windows accepted; "
          f"{mode}; verdict {report.verdict_label}")
    return 0


def cmd_synth(args) -> int:
    if args.n < 2:
        raise ConfigError(f"--n must be >= 2, got {args.n}")
    if args.kind == "lppl":
        truth = LpplParams(A=args.A, B=args.B, C=args.C, m=args.m,
                           omega=args.omega, phi=args.phi, t_c=args.tc)
        spec = SynthSpec(truth=truth, n_points=args.n,
                         noise_sigma=args.noise_sigma, seed=args.seed)
        series = generate_lppl_series(spec)
    else:
        series = generate_null_series(args.n, drift=args.drift, vol=args.vol, seed=args.seed)

    dates = business_day_ladder(args.start_date, args.n)
    values = np.exp(series.values) if args.target == "price" else series.values
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_series_csv(args.out, dates, values)
    print(f"wrote {args.n} rows ({args.kind}, target={args.target}) to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
