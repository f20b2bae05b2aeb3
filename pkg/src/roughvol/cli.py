"""Command-line entry point.

Subcommands: simulate, rv, estimate, scaling, spectrum, mc, illusion,
zscore, ingest-check. Exit codes: 0 success, 1 validation error (bad
flags, missing inputs, invariant violations), 2 runtime failure. Output
files are written atomically (temp file, then rename). Experiment
subcommands refuse to run without an explicit --seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile

import numpy as np

from .fracsim import CSV_FLOAT_FORMAT, FouSpec, GridPath, simulate_fou_price
from .harness import (
    McConfig,
    print_mc_summary,
    run_illusion_experiment,
    run_mc_table,
    run_zscore_experiment,
)
from .ingest import DEFAULT_DELTA, IngestError, read_rv_csv, write_rv_csv
from .proxy import log_rv_increments, realized_variance
from .scaling import DEFAULT_LAGS, DEFAULT_QS, fit_scaling, structure_function
from .spectral import SpectralConfig, ell, f_h, g_spectrum, ModelSpectrum
from .whittle import ParamBox, estimate

SUMMARY_DIGITS = 6


class CliError(Exception):
    """Validation problem; printed as one line and mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep codes stable
        raise CliError(message)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _fmt(value: float) -> str:
    return CSV_FLOAT_FORMAT % value


def _require_file(path: str) -> str:
    if not os.path.exists(path):
        raise CliError(f"input file does not exist: {path}")
    return path


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse comma-separated numbers from {text!r}") from None


def _parse_lags(text: str) -> list[int]:
    # accepts "1:50" ranges or comma lists
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise CliError(f"cannot parse lag range {text!r}") from None
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse lag list {text!r}") from None


def _spectral_config(args) -> SpectralConfig:
    try:
        return SpectralConfig(
            paxson_k=args.paxson_k,
            taylor_j=args.taylor_j,
            psi=args.psi,
            quad_rel_tol=args.quad_rel_tol,
            quad_abs_tol=args.quad_abs_tol,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _param_box(args) -> ParamBox:
    try:
        return ParamBox(
            h_min=args.h_min, h_max=args.h_max,
            eta_min=args.eta_min, eta_max=args.eta_max,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _add_spectral_flags(parser) -> None:
    parser.add_argument("--psi", type=float, default=1e-5,
                        help="cut frequency for the analytic corrections (default 1e-5)")
    parser.add_argument("--paxson-k", type=int, default=500,
                        help="alias-sum truncation (default 500)")
    parser.add_argument("--taylor-j", type=int, default=20,
                        help="cosine-series terms in the corrections (default 20)")
    parser.add_argument("--quad-rel-tol", type=float, default=1e-8,
                        help="relative quadrature tolerance (default 1e-8)")
    parser.add_argument("--quad-abs-tol", type=float, default=1e-10,
                        help="absolute quadrature tolerance (default 1e-10)")


def _add_box_flags(parser) -> None:
    parser.add_argument("--h-min", type=float, default=0.001,
                        help="lower hurst bound (default 0.001)")
    parser.add_argument("--h-max", type=float, default=0.99,
                        help="upper hurst bound (default 0.99)")
    parser.add_argument("--eta-min", type=float, default=0.1,
                        help="lower eta bound (default 0.1)")
    parser.add_argument("--eta-max", type=float, default=10.0,
                        help="upper eta bound (default 10.0)")


def build_parser() -> _Parser:
    parser = _Parser(prog="roughvol",
                     description="Roughness estimation for stochastic volatility "
                                 "from daily realized variance")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate",
                       help="simulate the fractional volatility price model")
    p.add_argument("--h", type=float, required=True, help="hurst parameter of the volatility noise")
    p.add_argument("--eta", type=float, required=True, help="volatility-of-volatility")
    p.add_argument("--alpha", type=float, default=0.001, help="mean-reversion speed (default 0.001)")
    p.add_argument("--c", type=float, default=-3.2, help="long-run mean of log variance (default -3.2)")
    p.add_argument("--logvar0", type=float, default=None, help="initial log variance (default: c)")
    p.add_argument("--s0", type=float, default=100.0, help="initial price (default 100)")
    p.add_argument("--days", type=int, required=True, help="number of days to simulate")
    p.add_argument("--m", type=int, required=True, help="grid steps per day")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="day length in years (default 1/250)")
    p.add_argument("--substeps", type=int, default=1, help="simulation substeps per grid step (default 1)")
    p.add_argument("--seed", type=int, required=True, help="random seed (required)")
    p.add_argument("--out", required=True, help="log-price CSV output path")
    p.add_argument("--out-logvar", default=None, help="optional log-variance CSV output path")

    p = sub.add_parser("rv",
                       help="compute daily realized variance from a log-price grid")
    p.add_argument("--price", required=True, help="log-price CSV (t,value)")
    p.add_argument("--m", type=int, required=True, help="intraday returns per day")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="day length in years (default 1/250)")
    p.add_argument("--out", required=True, help="realized-variance CSV output path")

    p = sub.add_parser("estimate",
                       help="fit (hurst, eta) to a realized-variance series")
    p.add_argument("--rv", required=True, help="realized-variance CSV")
    p.add_argument("--column", default="rv", help="value column name (default rv)")
    p.add_argument("--date-column", default="date", help="date column name (default date)")
    p.add_argument("--m", type=int, required=True, help="intraday returns behind each value")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="day length in years (default 1/250)")
    p.add_argument("--starts", default=None,
                   help="CSV of optimizer starts with columns h,nu (default: built-in grid)")
    p.add_argument("--out", default=None, help="result CSV path (default: stdout)")
    p.add_argument("--diagnostics", default=None, help="key=value sidecar path")
    _add_box_flags(p)
    _add_spectral_flags(p)

    p = sub.add_parser("scaling",
                       help="structure-function regressions on realized volatility")
    p.add_argument("--rv", required=True, help="realized-variance CSV")
    p.add_argument("--column", default="rv", help="value column name (default rv)")
    p.add_argument("--date-column", default="date", help="date column name (default date)")
    p.add_argument("--m", type=int, default=1, help="intraday count metadata (default 1)")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="day length in years (default 1/250)")
    p.add_argument("--qs", default=",".join(str(q) for q in DEFAULT_QS),
                   help="comma-separated moments (default 0.5,1,1.5,2,3)")
    p.add_argument("--lags", default="1:50", help="lag range lo:hi or comma list (default 1:50)")
    p.add_argument("--out", required=True, help="long-form (q,lag,log_lag,log_m) CSV output")
    p.add_argument("--summary-out", default=None, help="optional summary CSV path")

    p = sub.add_parser("spectrum",
                       help="dump (lambda, f_h, ell, g) on a frequency grid")
    p.add_argument("--h", type=float, required=True, help="hurst parameter")
    p.add_argument("--nu", type=float, required=True, help="day-scale diffusion nu")
    p.add_argument("--m", type=int, required=True, help="intraday count for the noise weight")
    p.add_argument("--points", type=int, default=200, help="grid size (default 200)")
    p.add_argument("--lambda-min", type=float, default=1e-4,
                   help="smallest frequency, log-spaced up to pi (default 1e-4)")
    p.add_argument("--paxson-k", type=int, default=500, help="alias-sum truncation (default 500)")
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("mc",
                       help="Monte Carlo table of estimator mean/variance per cell")
    p.add_argument("--config", default=None,
                   help="key=value file with grids (h0_list, eta0_list, m_list, "
                        "n_paths, n_days, delta, alpha, c)")
    p.add_argument("--h0", default=None, help="comma list overriding h0_list")
    p.add_argument("--eta0", default=None, help="comma list overriding eta0_list")
    p.add_argument("--m", default=None, help="comma list overriding m_list")
    p.add_argument("--paths", type=int, default=None, help="paths per cell (default 30)")
    p.add_argument("--days", type=int, default=None, help="days per path (default 2500)")
    p.add_argument("--delta", type=float, default=None, help="day length (default 1/250)")
    p.add_argument("--alpha", type=float, default=None, help="mean reversion (default 0.001)")
    p.add_argument("--c", type=float, default=None, help="long-run mean (default -3.2)")
    p.add_argument("--seed", type=int, required=True, help="base seed (required)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    p.add_argument("--out", required=True, help="per-cell CSV output path")
    p.add_argument("--summary-out", default=None, help="optional text summary path")

    p = sub.add_parser("illusion",
                       help="regression vs spectral estimates across RV frequencies "
                            "on one smooth-volatility path")
    p.add_argument("--seed", type=int, required=True, help="random seed (required)")
    p.add_argument("--frequencies", default="80,400,2000",
                   help="comma list of intraday counts (default 80,400,2000)")
    p.add_argument("--days", type=int, default=2500, help="days to simulate (default 2500)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("zscore",
                       help="variance / independence check of the scaled log proxy error")
    p.add_argument("--m", type=int, required=True, help="intraday returns per day")
    p.add_argument("--days", type=int, required=True, help="days to simulate")
    p.add_argument("--seed", type=int, required=True, help="random seed (required)")
    p.add_argument("--out", default=None, help="optional CSV output path")

    p = sub.add_parser("ingest-check",
                       help="validate and canonicalize a realized-variance CSV")
    p.add_argument("--rv", required=True, help="input CSV")
    p.add_argument("--column", default="rv", help="value column name (default rv)")
    p.add_argument("--date-column", default="date", help="date column name (default date)")
    p.add_argument("--m", type=int, required=True, help="intraday count metadata")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="day length (default 1/250)")
    p.add_argument("--strict", action="store_true", help="fail if any row must be dropped")
    p.add_argument("--out", default=None, help="canonical date,rv CSV output path")

    return parser


def _cmd_simulate(args) -> int:
    try:
        spec = FouSpec(
            hurst=args.h, eta=args.eta, alpha=args.alpha, c=args.c,
            delta=args.delta, m=args.m, n_days=args.days, seed=args.seed,
            logvar0=args.logvar0, s0=args.s0, substeps=args.substeps,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    log_var, log_price = simulate_fou_price(spec)
    _write_grid_csv(args.out, log_price)
    if args.out_logvar:
        _write_grid_csv(args.out_logvar, log_var)
    return 0


def _write_grid_csv(path: str, grid: GridPath) -> None:
    rows = ((_fmt(t), _fmt(v)) for t, v in zip(grid.times(), grid.values))
    _atomic_write(path, _csv_text(["t", "value"], rows))


def _cmd_rv(args) -> int:
    _require_file(args.price)
    try:
        grid = GridPath.from_csv(args.price, kind="log_price")
        rv = realized_variance(grid, args.m, args.delta)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    rows = ((str(i + 1), _fmt(v)) for i, v in enumerate(rv.values))
    _atomic_write(args.out, _csv_text(["date", "rv"], rows))
    return 0


def _read_starts(path: str) -> list[tuple[float, float]]:
    starts = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["h", "nu"]:
            raise CliError(f"{path}: starts file needs header 'h,nu'")
        for lineno, row in enumerate(reader, start=2):
            try:
                starts.append((float(row[0]), float(row[1])))
            except (IndexError, ValueError):
                raise CliError(f"{path}: bad start at line {lineno}") from None
    if not starts:
        raise CliError(f"{path}: no starts found")
    return starts


def _cmd_estimate(args) -> int:
    _require_file(args.rv)
    box = _param_box(args)
    config = _spectral_config(args)
    try:
        rv, _report = read_rv_csv(
            args.rv, m=args.m, delta=args.delta,
            column=args.column, date_column=args.date_column,
        )
        y = log_rv_increments(rv)
    except (IngestError, ValueError) as exc:
        raise CliError(str(exc)) from None
    starts = _read_starts(args.starts) if args.starts else None
    fit = estimate(y, box=box, starts=starts, config=config)
    header = ["h_hat", "nu_hat", "eta_hat", "objective", "converged"]
    row = [_fmt(fit.h_hat), _fmt(fit.nu_hat), _fmt(fit.eta_hat),
           _fmt(fit.objective), "true" if fit.converged else "false"]
    text = _csv_text(header, [row])
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.diagnostics:
        diag = [
            f"n={len(y)}",
            f"delta={_fmt(fit.delta)}",
            f"m={fit.m}",
            f"n_starts={fit.n_starts}",
            f"start_used_h={_fmt(fit.start_used[0])}",
            f"start_used_nu={_fmt(fit.start_used[1])}",
            f"converged={str(fit.converged).lower()}",
            f"objective={_fmt(fit.objective)}",
            f"psi={_fmt(config.psi)}",
            f"paxson_k={config.paxson_k}",
            f"taylor_j={config.taylor_j}",
        ]
        _atomic_write(args.diagnostics, "\n".join(diag) + "\n")
    return 0


def _cmd_scaling(args) -> int:
    _require_file(args.rv)
    qs = _parse_floats(args.qs)
    lags = _parse_lags(args.lags)
    try:
        rv, _report = read_rv_csv(
            args.rv, m=args.m, delta=args.delta,
            column=args.column, date_column=args.date_column,
        )
    except (IngestError, ValueError) as exc:
        raise CliError(str(exc)) from None
    log_vol = 0.5 * np.log(rv.values)  # variance series in, volatility out
    fit = fit_scaling(log_vol, qs=qs, lags=lags)
    rows = []
    for q in fit.qs:
        for lag in fit.lags:
            sf = structure_function(log_vol, float(q), int(lag))
            rows.append((_fmt(q), str(int(lag)), _fmt(math.log(lag)), _fmt(math.log(sf))))
    _atomic_write(args.out, _csv_text(["q", "lag", "log_lag", "log_m"], rows))

    summary_header = ["h_estimate", "h_with_intercept", "r2_stage2"]
    summary_row = [_fmt(fit.h_estimate), _fmt(fit.h_with_intercept), _fmt(fit.r2_stage2)]
    if args.summary_out:
        _atomic_write(args.summary_out, _csv_text(summary_header, [summary_row]))
    print(
        f"h_estimate={fit.h_estimate:.{SUMMARY_DIGITS}g} "
        f"h_with_intercept={fit.h_with_intercept:.{SUMMARY_DIGITS}g} "
        f"r2_stage2={fit.r2_stage2:.{SUMMARY_DIGITS}g}"
    )
    return 0


def _cmd_spectrum(args) -> int:
    if args.points < 2:
        raise CliError("--points must be >= 2")
    if not 0.0 < args.lambda_min < math.pi:
        raise CliError("--lambda-min must be in (0, pi)")
    try:
        spectrum = ModelSpectrum(
            hurst=args.h, nu=args.nu, m=args.m,
            config=SpectralConfig(paxson_k=args.paxson_k),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    grid = np.exp(np.linspace(math.log(args.lambda_min), math.log(math.pi), args.points))
    f_vals = f_h(grid, args.h, args.paxson_k)
    ell_vals = ell(grid)
    g_vals = g_spectrum(spectrum, grid)
    rows = (
        (_fmt(lam), _fmt(fv), _fmt(ev), _fmt(gv))
        for lam, fv, ev, gv in zip(grid, f_vals, ell_vals, g_vals)
    )
    _atomic_write(args.out, _csv_text(["lambda", "f_h", "ell", "g"], rows))
    return 0


def _parse_kv_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}: line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def _mc_config_from_args(args) -> McConfig:
    fields = {}
    if args.config:
        _require_file(args.config)
        kv = _parse_kv_file(args.config)
        parsers = {
            "h0_list": lambda s: tuple(_parse_floats(s)),
            "eta0_list": lambda s: tuple(_parse_floats(s)),
            "m_list": lambda s: tuple(int(x) for x in _parse_floats(s)),
            "n_paths": int,
            "n_days": int,
            "delta": float,
            "alpha": float,
            "c": float,
            "substeps": int,
        }
        for key, val in kv.items():
            if key not in parsers:
                raise CliError(f"{args.config}: unknown key {key!r}")
            try:
                fields[key] = parsers[key](val)
            except ValueError:
                raise CliError(f"{args.config}: cannot parse {key} = {val!r}") from None
    if args.h0 is not None:
        fields["h0_list"] = tuple(_parse_floats(args.h0))
    if args.eta0 is not None:
        fields["eta0_list"] = tuple(_parse_floats(args.eta0))
    if args.m is not None:
        fields["m_list"] = tuple(int(x) for x in _parse_floats(args.m))
    if args.paths is not None:
        fields["n_paths"] = args.paths
    if args.days is not None:
        fields["n_days"] = args.days
    if args.delta is not None:
        fields["delta"] = args.delta
    if args.alpha is not None:
        fields["alpha"] = args.alpha
    if args.c is not None:
        fields["c"] = args.c
    fields["base_seed"] = args.seed
    try:
        return McConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from None


def _cmd_mc(args) -> int:
    if args.workers < 1:
        raise CliError("--workers must be >= 1")
    config = _mc_config_from_args(args)
    report = run_mc_table(config, workers=args.workers, log=sys.stderr)
    header = ["h0", "eta0", "m", "n_paths", "n_converged", "n_failed",
              "h_mean", "h_var", "eta_mean", "eta_var", "cell_failed"]
    rows = [
        (_fmt(c.h0), _fmt(c.eta0), str(c.m), str(c.n_paths), str(c.n_converged),
         str(c.n_failed), _fmt(c.h_mean), _fmt(c.h_var), _fmt(c.eta_mean),
         _fmt(c.eta_var), "true" if c.failed else "false")
        for c in report.cells
    ]
    _atomic_write(args.out, _csv_text(header, rows))
    if args.summary_out:
        buf = io.StringIO()
        print_mc_summary(report, file=buf)
        _atomic_write(args.summary_out, buf.getvalue())
    else:
        print_mc_summary(report)
    if report.cells:
        print(f"total wall time {report.cells[0].wall_time:.1f}s", file=sys.stderr)
    return 0


def _cmd_illusion(args) -> int:
    if args.workers < 1:
        raise CliError("--workers must be >= 1")
    frequencies = [int(x) for x in _parse_floats(args.frequencies)]
    rows = run_illusion_experiment(
        seed=args.seed, frequencies=frequencies, n_days=args.days,
        workers=args.workers,
    )
    out_rows = (
        (str(r.m), _fmt(r.scaling_h), _fmt(r.whittle_h), _fmt(r.whittle_eta))
        for r in rows
    )
    _atomic_write(args.out, _csv_text(["m", "scaling_h", "whittle_h", "whittle_eta"], out_rows))
    for r in rows:
        print(
            f"m={r.m}: scaling_h={r.scaling_h:.{SUMMARY_DIGITS}g} "
            f"whittle_h={r.whittle_h:.{SUMMARY_DIGITS}g}"
        )
    return 0


def _cmd_zscore(args) -> int:
    result = run_zscore_experiment(m=args.m, n_days=args.days, seed=args.seed)
    header = ["m", "n_days", "sample_variance", "lag1_autocorr", "skewness"]
    row = [str(result.m), str(result.n_days), _fmt(result.sample_variance),
           _fmt(result.lag1_autocorr), _fmt(result.skewness)]
    if args.out:
        _atomic_write(args.out, _csv_text(header, [row]))
    print(
        f"sample_variance={result.sample_variance:.{SUMMARY_DIGITS}g} "
        f"lag1_autocorr={result.lag1_autocorr:.{SUMMARY_DIGITS}g} "
        f"skewness={result.skewness:.{SUMMARY_DIGITS}g}"
    )
    return 0


def _cmd_ingest_check(args) -> int:
    _require_file(args.rv)
    try:
        rv, report = read_rv_csv(
            args.rv, m=args.m, delta=args.delta,
            column=args.column, date_column=args.date_column,
            strict=args.strict,
        )
    except IngestError as exc:
        raise CliError(str(exc)) from None
    if args.out:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["date", "rv"])
        for date, value in zip(report.kept_dates, rv.values):
            writer.writerow([date, _fmt(value)])
        _atomic_write(args.out, buf.getvalue())
    reasons = ", ".join(f"{k}={v}" for k, v in sorted(report.reasons.items())) or "none"
    print(
        f"rows_read={report.rows_read} kept={report.rows_kept} "
        f"dropped={report.rows_dropped} ({reasons}) "
        f"span={report.date_span[0]}..{report.date_span[1]}"
    )
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "rv": _cmd_rv,
    "estimate": _cmd_estimate,
    "scaling": _cmd_scaling,
    "spectrum": _cmd_spectrum,
    "mc": _cmd_mc,
    "illusion": _cmd_illusion,
    "zscore": _cmd_zscore,
    "ingest-check": _cmd_ingest_check,
}


def dispatch(argv) -> int:
    """Parse arguments and run one subcommand, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.subcommand](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
