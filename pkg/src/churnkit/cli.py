"""Command-line interface: ``churnkit <command> [options]``.

Exit status is 0 on success, 2 on a usage error and 1 on a data, I/O or
convergence error (reported as one line on stderr).
"""

import argparse
import csv
import math
import sys
from datetime import timedelta
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from . import compare, hazard, ingest, metrics, nonparam, parametric, sim
from .core import Cohort, build_event_table
from .errors import ChurnkitError, InvalidInputError

CURVE_COLUMNS = ("t", "value", "ci_lower", "ci_upper")


class UsageError(Exception):
    """Missing or conflicting command-line options (exit status 2)."""


# ---------------------------------------------------------------------------
# curve files


def _curve_rows(curve):
    if isinstance(curve, hazard.HazardCurve):
        return [(t, v, math.nan, math.nan) for t, v in zip(curve.grid, curve.values)]
    rows = []
    if len(curve):
        rows.append((0.0, curve.baseline, math.nan, math.nan))
    rows.extend(zip(curve.time, curve.value, curve.lower, curve.upper))
    return rows


def _cell(x):
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def emit_curve(curve, path):
    """Write a StepCurve or HazardCurve as ``t,value,ci_lower,ci_upper``.

    Step curves get a leading baseline row at t = 0. Absent CI bounds are
    empty fields; values are written at full precision.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for row in _curve_rows(curve):
            writer.writerow([_cell(x) for x in row])


def read_curve(path):
    """Parse a curve file back into four float arrays (NaN for empty fields)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CURVE_COLUMNS:
            raise InvalidInputError(f"{path}: not a curve file")
        cols = [[], [], [], []]
        for row in reader:
            for col, cell in zip(cols, row):
                col.append(float(cell) if cell.strip() else math.nan)
    return tuple(np.array(c, dtype=float) for c in cols)


# ---------------------------------------------------------------------------
# formatting


class Formatter:
    def __init__(self, precision="2", fmt="table"):
        self.full = str(precision) == "full"
        self.digits = None if self.full else int(precision)
        self.fmt = fmt

    def num(self, x):
        if x is None or (isinstance(x, float) and math.isnan(x)):
            return "" if self.fmt == "csv" else "NA"
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if self.full:
            return repr(float(x))
        # round the shortest decimal form half-up, so 28.205 shows as 28.21
        step = Decimal(1).scaleb(-self.digits)
        text = str(Decimal(repr(float(x))).quantize(step, rounding=ROUND_HALF_UP))
        return text[1:] if text.startswith("-") and not Decimal(text) else text

    def p(self, x):
        if self.full:
            return repr(float(x))
        return f"{x:.3f}" if x >= 1e-3 else f"{x:.2e}"

    def table(self, header, rows, out):
        cells = [[self.num(v) if not isinstance(v, str) else v for v in row] for row in rows]
        if self.fmt == "csv":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(cells)
            return
        widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
        out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for r in cells:
            out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n")


# ---------------------------------------------------------------------------
# input


def _load(path, args, label=None):
    if args.sessions:
        if args.cutoff is None:
            raise UsageError("--sessions needs --cutoff")
        config = ingest.IngestConfig(
            collection_cutoff=ingest.parse_timestamp(args.cutoff),
            inactivity_window=timedelta(days=args.window),
            min_total_playtime=timedelta(seconds=args.min_playtime),
        )
        return ingest.aggregate_sessions(ingest.read_sessions(path), config, label or path)
    return ingest.read_durations(path, label)


def _input(args):
    if not args.input:
        raise UsageError("this command needs --input")
    return _load(args.input, args)


def _emit(args, curve):
    if args.out:
        emit_curve(curve, args.out)


# ---------------------------------------------------------------------------
# commands


def cmd_km(args, fmt, out):
    table = build_event_table(_input(args))
    km = nonparam.kaplan_meier(table, args.conf)
    na = nonparam.nelson_aalen(table)
    rows = [
        (t, int(n), int(d), d / n, h, s, lo, hi)
        for t, n, d, h, s, lo, hi in zip(
            table.time, table.at_risk, table.events, na.cumulative_hazard,
            km.survival, km.curve.lower, km.curve.upper,
        )
    ]
    header = ["time", "at_risk", "events", "hazard", "cum_hazard", "survival", "ci_lower", "ci_upper"]
    fmt.table(header, rows, out)
    if km.improper and fmt.fmt != "csv":
        out.write("note: largest observation is censored; the curve does not reach 0\n")
    _emit(args, km.curve)


def cmd_na(args, fmt, out):
    table = build_event_table(_input(args))
    na = nonparam.nelson_aalen(table)
    surv = nonparam.na_to_survival(na)
    rows = [
        (t, int(n), int(d), h, s)
        for t, n, d, h, s in zip(table.time, table.at_risk, table.events, na.cumulative_hazard, surv.value)
    ]
    fmt.table(["time", "at_risk", "events", "cum_hazard", "survival_na"], rows, out)
    _emit(args, na.curve)


def cmd_fit(args, fmt, out):
    cohort = _input(args)
    names = parametric.FAMILIES if args.family.lower() == "all" else [args.family]
    rows = []
    for name in names:
        tag = parametric.family_tag(name)
        if tag == parametric.EXPONENTIAL:
            res = parametric.fit_exponential(cohort, args.conf)
        else:
            res = parametric.fit_mle(tag, cohort, args.conf)
        for pname, value, se, (lo, hi) in zip(res.family.names, res.params, res.se, res.ci):
            rows.append((tag, pname, value, se, lo, hi, res.log_likelihood))
    d = int(np.count_nonzero(cohort.events))
    total = float(cohort.durations.sum())
    if fmt.fmt != "csv":
        out.write(f"n {cohort.size}  churns d {d}  time at risk R {fmt.num(total)} h\n")
    fmt.table(["family", "param", "estimate", "se", "ci_lower", "ci_upper", "loglik"], rows, out)


def cmd_hazard(args, fmt, out):
    cohort = _input(args)
    if args.bins is not None:
        pw = hazard.piecewise_exponential(cohort, args.bins)
        rows = [
            (lo, lo + pw.bin_width, int(d), t, r)
            for lo, d, t, r in zip(pw.edges[:-1], pw.events, pw.exposure, pw.rate)
        ]
        fmt.table(["bin_start", "bin_end", "events", "exposure", "rate"], rows, out)
        return
    table = build_event_table(cohort)
    spec = hazard.KernelSpec(args.kernel, args.bandwidth)
    grid = None
    if args.grid_points is not None:
        grid = hazard.default_grid(table, args.grid_points)
    curve = hazard.kernel_hazard(table, spec, grid, boundary=args.boundary)
    if fmt.fmt != "csv":
        out.write(f"kernel {curve.kind}  bandwidth {fmt.num(curve.bandwidth)} h\n")
    fmt.table(["t", "hazard"], list(zip(curve.grid, curve.values)), out)
    _emit(args, curve)


def _ci_text(fmt, ci):
    return f"[{fmt.num(ci[0])}, {fmt.num(ci[1])}]"


def cmd_metrics(args, fmt, out):
    table = build_event_table(_input(args))
    km = nonparam.kaplan_meier(table, args.conf)
    mean = metrics.mean_auc(table, km, args.conf)
    med = metrics.quantile(km, 0.5)
    levels = [float(x) for x in args.quantiles.split(",")] if args.quantiles else []
    if fmt.fmt == "csv":
        rows = [("mean", math.nan, mean.mean, mean.ci[0], mean.ci[1])]
        rows += [("quantile", q.p, q.estimate, q.lower, q.upper)
                 for q in [med] + metrics.quantile_profile(km, levels)]
        fmt.table(["metric", "p", "estimate", "ci_lower", "ci_upper"], rows, out)
        return
    restricted = f" (restricted to {fmt.num(mean.horizon)} h)" if mean.restricted else ""
    out.write(
        f"mean {fmt.num(mean.mean)} CI {_ci_text(fmt, mean.ci)}{restricted}; "
        f"median {fmt.num(med.estimate)} CI {_ci_text(fmt, med.ci)}\n"
    )
    for q in metrics.quantile_profile(km, levels):
        out.write(f"q{q.p:g} {fmt.num(q.estimate)} CI {_ci_text(fmt, q.ci)}\n")


def cmd_abtest(args, fmt, out):
    if not (args.control and args.test):
        raise UsageError("abtest needs --control and --test")
    weights = None if args.rho is None else compare.WeightSpec(args.rho)
    if args.strata:
        if args.sessions:
            raise UsageError("--strata works with durations files only")
        ctrl = ingest.read_strata(args.control, args.strata)
        test = ingest.read_strata(args.test, args.strata)
        empty = Cohort(np.empty(0), np.empty(0, dtype=bool))
        keys = sorted(set(ctrl) | set(test))
        res = compare.stratified_logrank([(ctrl.get(k, empty), test.get(k, empty)) for k in keys], weights)
        n_ctrl = sum(c.size for c in ctrl.values())
        n_test = sum(c.size for c in test.values())
    else:
        a, b = _load(args.control, args), _load(args.test, args)
        res = compare.logrank(a, b, weights)
        n_ctrl, n_test = a.size, b.size
    if fmt.fmt == "csv":
        fmt.table(["n_control", "n_test", "U", "var_U", "chi2", "p_value"],
                  [(n_ctrl, n_test, res.U, res.var_u, res.chi2, fmt.p(res.p_value))], out)
        return
    out.write(
        f"n_control {n_ctrl}  n_test {n_test}  U {fmt.num(res.U)}  "
        f"Var[U] {fmt.num(res.var_u)}\nchi2 {fmt.num(res.chi2)}  p {fmt.p(res.p_value)}"
        + ("  (p underflow)" if res.underflow else "")
        + "\n"
    )


def cmd_simulate(args, fmt, out):
    tag = parametric.family_tag(args.family)
    if not args.params:
        raise UsageError("simulate needs --params")
    params = tuple(float(x) for x in args.params.split(","))
    spec = sim.SimSpec(parametric.Family(tag, params), args.n, args.censor_time, args.seed)
    cohort = sim.simulate_cohort(spec)
    cohort = Cohort(cohort.durations, cohort.censored, cohort.label,
                    tuple(f"s{i}" for i in range(cohort.size)))
    if args.out:
        ingest.write_durations(cohort, args.out)
    else:
        ingest.write_durations_to(cohort, out)


COMMANDS = {
    "km": (cmd_km, "Kaplan-Meier survival table with log-log CIs"),
    "na": (cmd_na, "Nelson-Aalen cumulative hazard table"),
    "fit": (cmd_fit, "maximum-likelihood parametric fit"),
    "hazard": (cmd_hazard, "kernel-smoothed or piecewise-constant hazard"),
    "metrics": (cmd_metrics, "mean and median playtime with CIs"),
    "abtest": (cmd_abtest, "log-rank comparison of two cohorts"),
    "simulate": (cmd_simulate, "draw a synthetic censored cohort"),
}


def _conf(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("confidence level must lie in (0, 1)")
    return value


def _precision(text):
    if text == "full":
        return text
    if not text.isdigit():
        raise argparse.ArgumentTypeError("precision is a digit count or 'full'")
    return text


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="durations CSV (or sessions CSV with --sessions)")
    common.add_argument("--control", help="control cohort file (abtest)")
    common.add_argument("--test", help="test cohort file (abtest)")
    common.add_argument("--sessions", action="store_true", help="inputs are session logs")
    common.add_argument("--cutoff", help="collection cutoff timestamp, ISO-8601 with offset")
    common.add_argument("--window", type=float, default=14.0, help="inactivity window in days")
    common.add_argument("--min-playtime", type=float, default=0.0,
                        help="drop players with total playtime <= this many seconds")
    common.add_argument("--family", default="exponential", help="distribution family or 'all'")
    common.add_argument("--params", help="comma-separated family parameters (simulate)")
    common.add_argument("--kernel", default="epanechnikov", choices=sorted(hazard.KERNELS))
    common.add_argument("--bandwidth", type=float, help="kernel bandwidth in hours")
    common.add_argument("--boundary", default="reflect", choices=("reflect", "none"))
    common.add_argument("--grid-points", type=int, help="kernel evaluation grid size")
    common.add_argument("--bins", type=float, help="piecewise-exponential bin width in hours")
    common.add_argument("--rho", type=float, help="weight exponent; omit for the plain log-rank")
    common.add_argument("--strata", help="column naming each row's stratum (abtest)")
    common.add_argument("--conf", type=_conf, default=0.95, help="confidence level")
    common.add_argument("--quantiles", help="comma-separated quantile levels (metrics)")
    common.add_argument("--out", help="write the curve (or simulated cohort) to this CSV")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=1000, help="simulated cohort size")
    common.add_argument("--censor-time", type=float, help="administrative censoring time (simulate)")
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--precision", type=_precision, default="2",
                        help="decimal places shown, or 'full'")

    parser = argparse.ArgumentParser(prog="churnkit", description="Survival analysis for playtime data.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def run(argv=None, out=None, err=None):
    """Run the CLI and return its exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = Formatter(args.precision, args.format)
    handler = COMMANDS[args.command][0]
    try:
        handler(args, fmt, out)
    except UsageError as exc:
        err.write(f"churnkit {args.command}: error: {exc}\n")
        return 2
    except (ChurnkitError, OSError, ValueError) as exc:
        err.write(f"churnkit {args.command}: error: {exc}\n")
        return 1
    return 0


def main():
    sys.exit(run())
