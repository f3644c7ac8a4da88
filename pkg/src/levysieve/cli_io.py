"""Command-line entry point and file formats.

Inputs are CSV: either one ``increment`` column (``--delta`` required) or
``time,value`` columns that get differenced.  Lines starting with ``#`` are
comments.  Outputs are JSON objects or, for gridded results, CSV with header
``x,s_true,s_hat,lower,upper`` (``s_true`` only when a model is supplied).

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from ._accel import set_threads
from .errors import DomainError, ParseError
from .estimation import increments_from_prices, l2_norm_sq, penalty, project, select_model
from .experiments import (
    DEFAULT_CANDIDATES,
    DEFAULT_WINDOW,
    coverage_experiment,
    figure_data,
    gumbel_limit_check,
    pointwise_clt_check,
    smalltime_check,
)
from .inference import FORMULAS, band, kappa_constants, pointwise_ci
from .levy_models import (
    SP500_VG,
    YEAR_SECONDS,
    IncrementSeries,
    VarianceGammaParams,
    simulate_vg_increments,
    vg_levy_density,
    vg_to_density_params,
)
from .sieve_basis import SieveSpec

# clock-time suffixes, converted on the 252-day, 6.5-hour trading calendar
TIME_UNITS = {
    "s": 1.0 / YEAR_SECONDS,
    "min": 60.0 / YEAR_SECONDS,
    "h": 3600.0 / YEAR_SECONDS,
    "d": 1.0 / 252.0,
    "y": 1.0,
}


def parse_time(text: str) -> float:
    """Years from ``"0.5"``, ``"5s"``, ``"1min"``, ``"6.5h"``, ``"10d"`` or ``"3y"``."""
    s = str(text).strip()
    for suffix in sorted(TIME_UNITS, key=len, reverse=True):
        if s.endswith(suffix):
            number = s[: -len(suffix)]
            break
    else:
        suffix, number = "y", s
    try:
        value = float(number) * TIME_UNITS[suffix]
    except ValueError:
        raise DomainError(f"cannot parse time value {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"time value must be positive, got {text!r}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# reading


def read_increments(path, delta: float | None = None) -> IncrementSeries:
    text = Path(path).read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((lineno, next(csv.reader([stripped]))))
    if not rows:
        raise DomainError(f"{path}: no data (length error)")
    header_line, header = rows[0]
    header = [h.strip().lower() for h in header]
    body = rows[1:]
    if not body:
        raise DomainError(f"{path}: header but no observations (length error)")

    def column(i):
        out = np.empty(len(body))
        for r, (lineno, fields) in enumerate(body):
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", lineno)
            try:
                out[r] = float(fields[i])
            except ValueError:
                raise ParseError(f"not a number: {fields[i]!r}", lineno) from None
            if not math.isfinite(out[r]):
                raise ParseError(f"non-finite value {fields[i]!r}", lineno)
        return out

    if header == ["increment"]:
        if delta is None:
            raise DomainError("single-column increment files need --delta")
        return IncrementSeries(delta, column(0))
    if header == ["time", "value"]:
        return increments_from_prices(column(0), column(1))
    raise ParseError(f"header must be 'increment' or 'time,value', got {','.join(header)!r}", header_line)


# --------------------------------------------------------------------------
# writing


def _plain(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(report) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_plain(report), indent=2) + "\n"


def to_csv(table: dict) -> str:
    cols = ["x", "s_true", "s_hat", "lower", "upper"]
    cols = [c for c in cols if table.get(c) is not None]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    arrays = [np.asarray(table[c], dtype=float) for c in cols]
    for row in zip(*arrays):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def write_outputs(report, path, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "json"
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        if not isinstance(report, dict) or "x" not in report:
            raise DomainError("CSV output is available for gridded results only")
        text = to_csv(report)
    else:
        raise DomainError(f"unknown output format {fmt!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def write_increments(series: IncrementSeries, path) -> None:
    buf = io.StringIO()
    buf.write(f"# delta={series.delta!r} years, n={series.n}\n")
    buf.write("increment\n")
    for v in series.values.tolist():
        buf.write(repr(v) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_common(p, out_required=False):
    p.add_argument("--out", required=out_required, help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="default: from the --out extension")
    p.add_argument("--threads", type=int, default=None, help="worker threads (0 = auto)")


def _add_model(p):
    p.add_argument("--theta", type=float, default=SP500_VG.theta)
    p.add_argument("--sigma", type=float, default=SP500_VG.sigma)
    p.add_argument("--nu", type=float, default=SP500_VG.nu)


def _add_window(p, m=True):
    p.add_argument("--a", type=float, default=DEFAULT_WINDOW[0])
    p.add_argument("--b", type=float, default=DEFAULT_WINDOW[1])
    if m:
        p.add_argument("--m", type=int, default=40)
    p.add_argument("--k", type=int, default=0)


def _add_input(p):
    p.add_argument("--in", dest="inp", required=True, help="CSV of increments or time,value pairs")
    p.add_argument("--delta", type=parse_time, default=None, help="sampling step (years or 5s, 1min, ...)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="levysieve", description="Sieve estimators and confidence bands for Lévy densities.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate variance-gamma increments to CSV")
    _add_model(p)
    p.add_argument("--delta", type=parse_time, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--T", type=parse_time)
    grp.add_argument("--n", type=int)
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p, out_required=True)

    p = sub.add_parser("estimate", help="projection estimate on a sieve")
    _add_input(p)
    _add_window(p)
    _add_common(p)

    p = sub.add_parser("pointwise-ci", help="pointwise confidence intervals")
    _add_input(p)
    _add_window(p)
    p.add_argument("--x", type=_float_list, required=True, help="comma-separated evaluation points")
    p.add_argument("--level", type=float, default=0.95)
    _add_common(p)

    p = sub.add_parser("band", help="uniform confidence band")
    _add_input(p)
    _add_window(p)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--formula", choices=FORMULAS, default="exact")
    p.add_argument("--grid-size", type=int, default=512)
    p.add_argument("--truth", choices=("vg",), default=None, help="add the VG density as s_true")
    _add_model(p)
    _add_common(p)

    p = sub.add_parser("select-model", help="penalised choice of the number of bins")
    _add_input(p)
    _add_window(p, m=False)
    p.add_argument("--candidates", type=_int_list, default=list(DEFAULT_CANDIDATES))
    _add_common(p)

    p = sub.add_parser("coverage", help="Monte-Carlo coverage of confidence bands")
    _add_model(p)
    p.add_argument("--T", type=parse_time, default=1.0)
    p.add_argument("--delta", type=parse_time, default=parse_time("1min"))
    _add_window(p, m=False)
    p.add_argument("--m", default="40", help="number of bins or 'auto'")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--formula", choices=FORMULAS, default="exact")
    p.add_argument("--target", choices=("density", "projection"), default="density")
    p.add_argument("--grid-size", type=int, default=512)
    p.add_argument("--candidates", type=_int_list, default=list(DEFAULT_CANDIDATES))
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p)

    p = sub.add_parser("check-smalltime", help="small-time tail approximation check")
    _add_model(p)
    p.add_argument("--t", type=_float_list, default=[2e-4, 1e-4, 5e-5], help="times in years")
    p.add_argument("--y", type=_float_list, default=[0.01, 0.02, 0.05])
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p)

    p = sub.add_parser("check-gumbel", help="extreme-value limit of bin maxima")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--y", type=_float_list, default=[0.0, 1.0, 2.0])
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p)

    p = sub.add_parser("check-clt", help="pointwise normal limit check")
    _add_model(p)
    p.add_argument("--T", type=parse_time, default=3.0)
    p.add_argument("--delta", type=parse_time, default=parse_time("1min"))
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--x", type=_float_list, default=[0.02])
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--smoothness", type=float, default=1.0)
    _add_window(p, m=False)
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p)

    p = sub.add_parser("figure-data", help="mean estimate and band envelopes over replications")
    _add_model(p)
    p.add_argument("--T", type=parse_time, default=3.0)
    p.add_argument("--delta", type=parse_time, default=parse_time("5s"))
    _add_window(p, m=False)
    p.add_argument("--m", default="40", help="number of bins or 'auto'")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--formula", choices=FORMULAS, default="exact")
    p.add_argument("--grid-size", type=int, default=512)
    p.add_argument("--candidates", type=_int_list, default=list(DEFAULT_CANDIDATES))
    p.add_argument("--seed", type=_seed, default=0)
    _add_common(p)
    return parser


# --------------------------------------------------------------------------
# validation and dispatch


def _model(args) -> VarianceGammaParams:
    return VarianceGammaParams(args.theta, args.sigma, args.nu)


def _level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise DomainError(f"--level must lie in (0, 1), got {level}")
    return level


def _positive(name, value):
    if value is None or value < 1:
        raise DomainError(f"--{name} must be >= 1, got {value}")
    return value


def _m_arg(text):
    if str(text) == "auto":
        return "auto"
    try:
        return _positive("m", int(text))
    except ValueError:
        raise DomainError(f"--m must be a positive integer or 'auto', got {text!r}") from None


def _load(args) -> IncrementSeries:
    return read_increments(args.inp, args.delta)


def _cmd_simulate(args):
    p = _model(args)
    n = args.n if args.n is not None else int(round(args.T / args.delta))
    _positive("n", n)
    series = simulate_vg_increments(p, args.delta, n, args.seed)
    write_increments(series, args.out)


def _cmd_estimate(args):
    spec = SieveSpec(args.a, args.b, args.m, args.k)
    series = _load(args)
    est = project(series, spec)
    report = {
        "window": [spec.a, spec.b],
        "m": spec.m,
        "k": spec.k,
        "T": est.T,
        "n": est.n,
        "delta": series.delta,
        "coeffs": est.coeffs,
        "l2_norm_sq": l2_norm_sq(est),
        "penalty": penalty(series, spec),
    }
    write_outputs(report, args.out, args.format or "json")


def _cmd_pointwise(args):
    spec = SieveSpec(args.a, args.b, args.m, args.k)
    level = _level(args.level)
    x = np.asarray(args.x, dtype=float)
    if np.any((x <= spec.a) | (x >= spec.b)):
        raise DomainError(f"--x values must lie strictly inside ({spec.a}, {spec.b})")
    est = project(_load(args), spec)
    lo, hi = pointwise_ci(est, x, 1.0 - level)
    rows = [{"x": xi, "s_hat": si, "lower": li, "upper": ui} for xi, si, li, ui in zip(x, est(x), lo, hi)]
    write_outputs({"level": level, "m": spec.m, "k": spec.k, "T": est.T, "rows": rows}, args.out, args.format or "json")


def _cmd_band(args):
    spec = SieveSpec(args.a, args.b, args.m, args.k)
    kappa_constants(spec.k, spec.a, spec.b)
    level = _level(args.level)
    if args.grid_size < 2:
        raise DomainError("--grid-size must be >= 2")
    truth = vg_to_density_params(_model(args)) if args.truth == "vg" else None
    est = project(_load(args), spec)
    res = band(est, 1.0 - level, args.formula, args.grid_size)
    table = {
        "x": res.grid,
        "s_true": vg_levy_density(truth, res.grid) if truth is not None else None,
        "s_hat": res.s_hat,
        "lower": res.lower,
        "upper": res.upper,
    }
    fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "json")
    if fmt == "csv":
        write_outputs(table, args.out, "csv")
    else:
        report = {"level": res.level, "formula": res.formula, "m": spec.m, "k": spec.k, "T": est.T, "d_n": res.d_n}
        report["constants"] = res.constants
        report.update({k: v for k, v in table.items() if v is not None})
        write_outputs(report, args.out, "json")


def _cmd_select(args):
    if not args.candidates or min(args.candidates) < 1:
        raise DomainError("--candidates must be positive integers")
    SieveSpec(args.a, args.b, 1, args.k)
    sel = select_model(_load(args), args.a, args.b, args.k, args.candidates)
    report = {"m": sel.m, "k": args.k, "scores": [{"m": m, "score": s} for m, s in sel.table]}
    write_outputs(report, args.out, args.format or "json")


def _cmd_coverage(args):
    m = _m_arg(args.m)
    SieveSpec(args.a, args.b, 40 if m == "auto" else m, args.k)
    kappa_constants(args.k, args.a, args.b)
    _positive("reps", args.reps)
    rep = coverage_experiment(
        _model(args), args.T, args.delta, m, args.reps, _level(args.level), args.k, args.seed,
        (args.a, args.b), args.formula, args.target, args.grid_size, args.candidates,
    )
    write_outputs(rep.to_dict(), args.out, args.format or "json")


def _cmd_smalltime(args):
    rep = smalltime_check(_model(args), args.t, args.y, args.samples, args.seed)
    write_outputs(rep, args.out, args.format or "json")


def _cmd_gumbel(args):
    rep = gumbel_limit_check(args.k, args.m, args.reps, args.y, args.seed)
    write_outputs(rep, args.out, args.format or "json")


def _cmd_clt(args):
    SieveSpec(args.a, args.b, 1, args.k)
    _positive("reps", args.reps)
    rep = pointwise_clt_check(
        _model(args), args.T, args.delta, args.beta, args.x, args.reps, args.seed, args.k,
        (args.a, args.b), args.smoothness,
    )
    write_outputs(rep, args.out, args.format or "json")


def _cmd_figure(args):
    m = _m_arg(args.m)
    SieveSpec(args.a, args.b, 40 if m == "auto" else m, args.k)
    kappa_constants(args.k, args.a, args.b)
    _positive("reps", args.reps)
    data = figure_data(
        _model(args), args.T, args.delta, m, args.k, args.reps, _level(args.level), args.seed,
        (args.a, args.b), args.formula, args.grid_size, args.candidates,
    )
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    write_outputs(data, args.out, fmt)


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "pointwise-ci": _cmd_pointwise,
    "band": _cmd_band,
    "select-model": _cmd_select,
    "coverage": _cmd_coverage,
    "check-smalltime": _cmd_smalltime,
    "check-gumbel": _cmd_gumbel,
    "check-clt": _cmd_clt,
    "figure-data": _cmd_figure,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        set_threads(args.threads)
        COMMANDS[args.command](args)
    except OSError as exc:
        print(f"levysieve: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"levysieve: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
