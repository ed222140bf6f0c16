"""Command-line surface.

Subcommands: detect, simulate, critval, table, diagnose. Exit codes:
0 success, 2 validation error, 3 parse error, 4 domain error, 5 I/O.
All files are UTF-8, comma-delimited, decimal point, no thousands
separators; floats are written with shortest round-trip precision.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .changepoint import (
    DEFAULT_CRITVAL_SEED,
    DEFAULT_N_GRID,
    DEFAULT_N_PATHS,
    decide,
    gamma_path,
    mc_critical_value,
)
from .core import TimeSeries, log_returns, qq_pairs, sample_acf
from .errors import (
    DomainError,
    ParseError,
    TooShort,
    ValidationError,
)
from .experiments import load_grid, run_table
from .lmsv import LmsvSpec, floor_index, simulate_lmsv

SEED_ENV_VAR = "TAILBREAK_SEED"


def _env_seed(flag_value, fallback):
    """Flag beats environment beats fallback."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{SEED_ENV_VAR} must be an integer") from None
    return fallback


def _parse_t0(raw: str):
    if raw in ("auto", "auto-min"):
        return raw
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(
            "t0 must be a fraction in (0,1), 'auto' or 'auto-min'"
        ) from None


def _maybe_date(token: str):
    try:
        return datetime.date.fromisoformat(token.strip())
    except ValueError:
        return None


def _maybe_float(token: str):
    try:
        return float(token.strip())
    except ValueError:
        return None


def read_series(path, column=None) -> TimeSeries:
    """Read a series file: one float per line, or date,value columns.

    A non-numeric first row is treated as a header (its names become
    valid column selectors); any later unparseable field raises
    ParseError with its line number.
    """
    header: list[str] | None = None
    values: list[float] = []
    dates: list[datetime.date] = []
    ncols = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = [t.strip() for t in line.split(",")]
            if ncols is None:
                ncols = len(tokens)
                probe = [
                    _maybe_float(t) is None and _maybe_date(t) is None
                    for t in tokens
                ]
                if any(probe):
                    header = tokens
                    ncols = None  # header does not fix the width
                    continue
            if header is not None and ncols is not None and len(tokens) != ncols:
                raise ParseError(
                    f"expected {ncols} fields, found {len(tokens)}", lineno
                )
            col = _resolve_column(column, header, len(tokens), lineno)
            if len(tokens) > 1:
                date = _maybe_date(tokens[0])
                if date is None:
                    raise ParseError(
                        f"first field {tokens[0]!r} is not an ISO date", lineno
                    )
                dates.append(date)
            value = _maybe_float(tokens[col])
            if value is None:
                raise ParseError(f"field {tokens[col]!r} is not a number", lineno)
            values.append(value)
    if not values:
        raise ParseError(f"no data rows in {path}", None)
    stamps = np.array(dates, dtype="datetime64[D]") if dates else None
    return TimeSeries(np.asarray(values), stamps)


def _resolve_column(column, header, width, lineno):
    if column is None:
        return width - 1
    try:
        idx = int(column)
    except (TypeError, ValueError):
        if header is None or column not in header:
            raise ValidationError(
                f"column {column!r} not found (no matching header)"
            ) from None
        idx = header.index(column)
    if not 0 <= idx < width:
        raise ParseError(f"column index {idx} out of range", lineno)
    return idx


def _apply_transform(series: TimeSeries, transform: str) -> TimeSeries:
    if transform == "log_returns":
        return log_returns(series)
    return series


def _write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- detect


def cmd_detect(args) -> int:
    series = read_series(args.input, args.column)
    series = _apply_transform(series, args.transform)
    n = len(series)
    if not 0.0 < args.p < 1.0:
        raise ValidationError("p must lie in (0, 1)")
    k_n = floor_index(n * args.p)
    if k_n < 1:
        raise ValidationError(f"floor(n p) = 0 at n = {n}; increase p")
    seed = _env_seed(args.seed, DEFAULT_CRITVAL_SEED)
    report = decide(
        series,
        k_n,
        t0=_parse_t0(args.t0),
        level=args.level,
        variant=args.variant,
        critval_source=args.critval_source,
        critical_value=args.critval,
        seed=seed,
        n_paths=args.n_paths,
        n_grid=args.n_grid,
    )
    payload = asdict(report)
    payload["version"] = __version__
    out = Path(args.output)
    out.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    path = gamma_path(series, k_n, report.t0, report.variant)
    path_out = args.path_output or out.with_suffix(".path.csv")
    lines = ["k,t,gamma"]
    lines += [
        f"{int(k)},{k / n!r},{v!r}" for k, v in zip(path.ks, path.values)
    ]
    _write_lines(path_out, lines)
    verdict = "reject" if report.reject else "no rejection"
    print(
        f"statistic {report.statistic_scaled:.6f} vs critical value "
        f"{report.critical_value:.6f} ({report.critval_source}, "
        f"level {report.level:g}): {verdict}"
    )
    loc = f"index {report.change_index} (fraction {report.change_fraction:.4f}"
    if report.change_date is not None:
        loc += f", date {report.change_date}"
    print(f"change-point estimate: {loc})")
    print(f"report: {out}; gamma path: {path_out}")
    return 0


# -------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    seed = _env_seed(args.seed, 0)
    spec = LmsvSpec(
        n=args.n,
        hurst=args.hurst,
        alpha=args.alpha,
        change_height=args.h,
        change_fraction=args.tau,
        family=args.family,
        seed=seed,
        center_innovations=args.center,
    )
    series, y, eps = simulate_lmsv(spec, return_components=True)
    lines = [
        "# lmsv simulation",
        (
            f"# n={spec.n} hurst={spec.hurst!r} alpha={spec.alpha!r} "
            f"change_height={spec.change_height!r} "
            f"change_fraction={spec.change_fraction!r} family={spec.family} "
            f"seed={spec.seed} center_innovations={spec.center_innovations}"
        ),
    ]
    if spec.break_active:
        lines.append(f"# change_index={spec.change_index}")
    if args.include_components:
        lines.append("x,y,eps")
        lines += [
            f"{xv!r},{yv!r},{ev!r}"
            for xv, yv, ev in zip(series.values, y, eps)
        ]
    else:
        lines.append("x")
        lines += [f"{v!r}" for v in series.values]
    _write_lines(args.output, lines)
    print(f"wrote {spec.n} observations to {args.output}")
    return 0


# --------------------------------------------------------------- critval


def cmd_critval(args) -> int:
    seed = _env_seed(args.seed, DEFAULT_CRITVAL_SEED)
    key = f"{args.level!r}|{args.t0!r}|{args.n_paths}|{args.n_grid}|{seed}"
    cache_path = Path(args.cache)
    cache = {}
    if cache_path.exists():
        cache = json.loads(cache_path.read_text(encoding="utf-8"))
    if key in cache:
        value = cache[key]
    else:
        value = mc_critical_value(
            args.level, args.t0, args.n_paths, args.n_grid, seed
        )
        cache[key] = value
        cache_path.write_text(
            json.dumps(cache, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(f"{value!r}")
    return 0


# -------------------------------------------------------------- diagnose


def cmd_diagnose(args) -> int:
    series = read_series(args.input, args.column)
    series = _apply_transform(series, args.transform)
    n = len(series)
    if n < 2:
        raise TooShort("diagnostics need at least two observations")
    max_lag = min(args.max_lag, n - 1)
    band = 1.96 / n**0.5
    prefix = args.out_prefix

    def acf_lines(result):
        lines = ["lag,acf,band_lo,band_hi"]
        lines += [
            f"{int(lag)},{val!r},{-band!r},{band!r}"
            for lag, val in zip(result.lags, result.correlations)
        ]
        return lines

    _write_lines(f"{prefix}_acf.csv", acf_lines(sample_acf(series, max_lag)))
    _write_lines(
        f"{prefix}_acf_abs.csv",
        acf_lines(sample_acf(np.abs(series.values), max_lag)),
    )
    qq = qq_pairs(series)
    qq_out = ["theoretical,sample"]
    qq_out += [
        f"{th!r},{sa!r}"
        for th, sa in zip(qq.theoretical_quantiles, qq.sample_quantiles)
    ]
    _write_lines(f"{prefix}_qq.csv", qq_out)
    print(
        f"wrote {prefix}_acf.csv, {prefix}_acf_abs.csv, {prefix}_qq.csv "
        f"(n={n}, max_lag={max_lag}, band=±{band:.6f})"
    )
    return 0


# ----------------------------------------------------------------- table


def cmd_table(args) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return 5
    grid = load_grid(config_path)
    results = run_table(
        grid, args.output, journal_path=args.journal, workers=args.workers
    )
    print(f"wrote {len(results)} cells to {args.output}")
    return 0


# ------------------------------------------------------------ the parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailbreak",
        description="Tail-index change-point detection for heavy-tailed series",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="run the change-point test on a file")
    detect.add_argument("--input", required=True)
    detect.add_argument("--column", default=None, help="column name or index")
    detect.add_argument(
        "--transform", choices=("none", "log_returns"), default="none"
    )
    detect.add_argument("--p", type=float, default=0.1,
                        help="proportion of top order statistics, k_n = floor(n p)")
    detect.add_argument("--t0", default="auto")
    detect.add_argument("--level", type=float, default=0.05)
    detect.add_argument("--variant", choices=("hill", "threshold"), default="hill")
    detect.add_argument(
        "--critval-source",
        choices=("monte_carlo", "kolmogorov", "user"),
        default="monte_carlo",
    )
    detect.add_argument("--critval", type=float, default=None)
    detect.add_argument("--seed", type=int, default=None)
    detect.add_argument("--n-paths", type=int, default=DEFAULT_N_PATHS)
    detect.add_argument("--n-grid", type=int, default=DEFAULT_N_GRID)
    detect.add_argument("--output", default="report.json")
    detect.add_argument("--path-output", default=None)
    detect.set_defaults(func=cmd_detect)

    simulate = sub.add_parser("simulate", help="simulate an LMSV path")
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--hurst", type=float, required=True)
    simulate.add_argument("--alpha", type=float, required=True)
    simulate.add_argument("--h", type=float, default=0.0,
                          help="tail-index change height")
    simulate.add_argument("--tau", type=float, default=1.0,
                          help="break fraction; 1 means no break")
    simulate.add_argument(
        "--family",
        choices=("standard_pareto", "generalized_pareto"),
        default="standard_pareto",
    )
    simulate.add_argument("--center", action="store_true",
                          help="center innovations to mean zero")
    simulate.add_argument("--include-components", action="store_true",
                          help="also write the volatility driver and innovations")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--output", required=True)
    simulate.set_defaults(func=cmd_simulate)

    critval = sub.add_parser("critval", help="Monte Carlo critical value")
    critval.add_argument("--level", type=float, default=0.95,
                         help="quantile level of the null law")
    critval.add_argument("--t0", type=float, default=0.0)
    critval.add_argument("--n-paths", type=int, default=DEFAULT_N_PATHS)
    critval.add_argument("--n-grid", type=int, default=DEFAULT_N_GRID)
    critval.add_argument("--seed", type=int, default=None)
    critval.add_argument("--cache", default=".tailbreak_critval_cache.json")
    critval.set_defaults(func=cmd_critval)

    diagnose = sub.add_parser("diagnose", help="ACF, |x| ACF and normal Q-Q data")
    diagnose.add_argument("--input", required=True)
    diagnose.add_argument("--column", default=None)
    diagnose.add_argument(
        "--transform", choices=("none", "log_returns"), default="none"
    )
    diagnose.add_argument("--max-lag", type=int, default=50)
    diagnose.add_argument("--out-prefix", required=True)
    diagnose.set_defaults(func=cmd_diagnose)

    table = sub.add_parser("table", help="run a rejection-rate grid")
    table.add_argument("--config", required=True)
    table.add_argument("--output", required=True)
    table.add_argument("--journal", default=None)
    table.add_argument("--workers", type=int, default=1)
    table.set_defaults(func=cmd_table)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


def entrypoint():  # console script target
    sys.exit(main())
