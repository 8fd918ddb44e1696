"""Command-line interface.

Commands::

    retroprospect analyze  INPUT.csv --column close [--out PREFIX]
    retroprospect matrix   INPUT.csv --columns a,b,c [--date D | --all-dates]
    retroprospect simulate RUN.cfg [--out trajectory.csv]
    retroprospect kernel   RUN.cfg [--out kernel.csv]
    retroprospect epihypo  --function abs --point 0

Exit status is 0 on success, 1 on a validation error and 2 on an I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import epihypo as eh
from .config import REQUIRED, load_config
from .dynamics import simulate
from .errors import EmptySampleError, ValidationError
from .kernel import compute_kernel
from .registry import build_dynamics, build_tube
from .tables import DIALECTS, MISSING_POLICIES, format_number, load_csv, open_csv_writer
from .tensor import classify_array, pairwise_velocities
from .trendometer import Kind, analyze, jerkiness_ranking

__all__ = [
    "main",
    "write_analysis",
    "write_matrix",
    "run_simulation",
    "write_trajectory",
    "run_kernel",
    "write_kernel",
]

log = logging.getLogger("retroprospect")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

EVENT_HEADER = ["index", "date", "value", "backward_velocity", "forward_velocity",
                "product", "jerkiness", "kind"]


def _event_row(ev, dates):
    return [ev.index, dates[ev.index], format_number(ev.value), format_number(ev.backward_v),
            format_number(ev.forward_v), format_number(ev.product),
            format_number(ev.jerkiness), str(ev.kind)]


def write_analysis(table, column, prefix, eps=0.0, calendar_time=False):
    """Write reversals, ranking, statistics and plot data for one column.

    Returns:
        tuple: ``(report, paths)`` where paths maps output kind to file.
    """
    evolution = table.evolution(column, calendar_time)
    report = analyze(evolution, eps)
    dates = table.dates
    values = evolution.scalar()
    prefix = str(prefix)
    paths = {
        "reversals": Path(prefix + "_reversals.csv"),
        "ranking": Path(prefix + "_ranking.csv"),
        "stats": Path(prefix + "_stats.txt"),
        "plotdata": Path(prefix + "_plotdata.csv"),
    }
    if not report.events:
        log.warning("no trend reversal detected in column %r", column)

    handle, writer = open_csv_writer(paths["reversals"])
    with handle:
        writer.writerow(EVENT_HEADER)
        for ev in report.events:
            writer.writerow(_event_row(ev, dates))

    handle, writer = open_csv_writer(paths["ranking"])
    with handle:
        writer.writerow(["rank", *EVENT_HEADER])
        for rank, ev in enumerate(jerkiness_ranking(report.events), start=1):
            writer.writerow([rank, *_event_row(ev, dates)])

    # map event times back to date labels for the period listings
    label_at = {ev.time: dates[ev.index] for ev in report.events}
    bears = sum(1 for ev in report.events if ev.kind is Kind.BEAR)
    lines = [
        f"series: {column}",
        f"samples: {len(values)}",
        f"time: {'calendar' if calendar_time else 'index'}",
        f"epsilon: {format_number(eps)}",
        f"events: {len(report.events)}",
        f"bear_events: {bears}",
        f"bull_events: {len(report.events) - bears}",
        f"total_jerkiness: {format_number(report.total_jerkiness)}",
        f"bear_share: {format_number(report.bear_share)}",
        f"bull_share: {format_number(report.bull_share)}",
        "",
        "jerkiness_velocity: start,end,velocity",
    ]
    lines += [f"{label_at[a]},{label_at[b]},{format_number(v)}" for (a, b), v in report.velocities]
    lines += ["", "trend_speed: start,end,speed"]
    lines += [f"{label_at[a]},{label_at[b]},{format_number(v)}" for (a, b), v in report.speeds]
    with open(paths["stats"], "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")

    jerk = {ev.index: ev.jerkiness for ev in report.events}
    handle, writer = open_csv_writer(paths["plotdata"])
    with handle:
        writer.writerow(["date", "value", "reversal_marker", "jerkiness_bar"])
        for i, label in enumerate(dates):
            writer.writerow([label, format_number(values[i]), 1 if i in jerk else 0,
                             format_number(jerk.get(i, 0.0))])
    return report, paths


def write_matrix(table, columns, path, dates=None, mode="quantitative", normalized=False,
                 eps=0.0):
    """Long-format pairwise connection matrices.

    Args:
        dates: date labels to emit; ``None`` means every interior date.
        mode: ``"quantitative"`` writes the (optionally normalized) entry,
            ``"qualitative"`` writes its class.
        normalized: divide each entry by the product of the velocity
            magnitudes; zero-velocity entries get an empty value and class 0.

    Returns:
        int: number of rows written.
    """
    if len(columns) < 2:
        raise ValidationError("matrix needs at least two columns")
    if mode not in ("qualitative", "quantitative"):
        raise ValidationError(f"unknown matrix mode {mode!r}")
    series = [table.evolution(c) for c in columns]
    backward, forward = pairwise_velocities(series)
    interior = {label: i for i, label in enumerate(table.dates) if 1 <= i <= len(table) - 2}
    if dates is None:
        indices = sorted(interior.values())
    else:
        indices = []
        for label in dates:
            if label not in interior:
                raise ValidationError(f"date {label!r} is not an interior date of the table")
            indices.append(interior[label])

    rows = 0
    handle, writer = open_csv_writer(path)
    with handle:
        writer.writerow(["date", "row_series", "col_series", "value", "class"])
        for i in indices:
            b, f = backward[i - 1], forward[i - 1]
            m = np.multiply.outer(b, f)
            classes = classify_array(m, eps)
            if normalized:
                scale = np.multiply.outer(np.abs(b), np.abs(f))
                degenerate = scale == 0
                classes = np.where(degenerate, 0, classes)
            for a, ra in enumerate(columns):
                for c, rc in enumerate(columns):
                    if mode == "qualitative":
                        value = str(int(classes[a, c]))
                    elif normalized and degenerate[a, c]:
                        value = ""
                    elif normalized:
                        value = format_number(m[a, c] / scale[a, c])
                    else:
                        value = format_number(m[a, c])
                    writer.writerow([table.dates[i], ra, rc, value, int(classes[a, c])])
                    rows += 1
    return rows


def _axis_names(prefix, dim):
    return [prefix] if dim == 1 else [f"{prefix}{k + 1}" for k in range(dim)]


def run_simulation(cfg):
    x0 = cfg.get_vector("x0", REQUIRED)
    dim = x0.size
    G = build_dynamics(cfg.get_str("dynamics", REQUIRED), dim, cfg.prefixed("dynamics"))
    tube = build_tube(cfg.get_str("tube", None), dim, cfg.prefixed("tube"))
    h = cfg.get_float("h", REQUIRED)
    steps = cfg.get_int("steps", REQUIRED)
    if not h > 0 or steps < 0:
        raise ValidationError(f"{cfg.source}: need h > 0 and steps >= 0")
    return simulate(
        G,
        t0=cfg.get_float("t0", 0.0),
        x0=x0,
        v0=cfg.get_vector("v0", "0", dim),
        h=h,
        steps=steps,
        tube=tube,
        policy=cfg.get_str("policy", "min_norm"),
        stop_on_violation=cfg.get_bool("stop_on_violation", True),
        epsilon=cfg.get_float("epsilon", 0.0),
    )


def write_trajectory(traj, path):
    """Columns ``step,t,x...,v...,viable``.

    Each row is an augmented state: ``v`` is the backward velocity at
    ``x`` (``v0`` on the first row, then the velocity that led to ``x``).
    """
    dim = traj.states.shape[1]
    backward = np.vstack([traj.v0[None, :], traj.selected])
    handle, writer = open_csv_writer(path)
    with handle:
        writer.writerow(["step", "t", *_axis_names("x", dim), *_axis_names("v", dim), "viable"])
        times = traj.times
        for j, x in enumerate(traj.states):
            writer.writerow([j, format_number(times[j]), *map(format_number, x),
                             *map(format_number, backward[j]), int(traj.viable[j])])


def run_kernel(cfg):
    x_lower = cfg.get_vector("x_lower", REQUIRED)
    dim = x_lower.size
    G = build_dynamics(cfg.get_str("dynamics", REQUIRED), dim, cfg.prefixed("dynamics"))
    tube = build_tube(cfg.get_str("tube", REQUIRED), dim, cfg.prefixed("tube"))
    if tube is None:
        raise ValidationError(f"{cfg.source}: the kernel command needs a tube")
    return compute_kernel(
        G, tube,
        x_lower=x_lower,
        x_upper=cfg.get_vector("x_upper", REQUIRED, dim),
        dx=cfg.get_float("dx", REQUIRED),
        v_lower=cfg.get_vector("v_lower", REQUIRED, dim),
        v_upper=cfg.get_vector("v_upper", REQUIRED, dim),
        dv=cfg.get_float("dv", REQUIRED),
        h=cfg.get_float("h", REQUIRED),
        horizon=cfg.get_int("horizon", REQUIRED),
        t0=cfg.get_float("t0", 0.0),
        c=cfg.get_float("c", 1.0),
        lipschitz=cfg.get_float("lipschitz", 0.0),
    )


def write_kernel(grid, path):
    """Columns ``t,x...,v...,viable``; returns the summary line."""
    dim = grid.dimension
    handle, writer = open_csv_writer(path)
    with handle:
        writer.writerow(["t", *_axis_names("x", dim), *_axis_names("v", dim), "viable"])
        for row in grid.rows():
            writer.writerow([*map(format_number, row[:-1]), row[-1]])
    return f"viable_nodes={grid.viable_count} total_nodes={grid.total_nodes}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float, default=0.0,
                        help="zero tolerance for velocity products (default 0)")
    common.add_argument("--out", help="output file or prefix")
    common.add_argument("--input-dialect", choices=sorted(DIALECTS), default="standard")
    common.add_argument("--calendar-time", action="store_true",
                        help="use date gaps instead of row steps as the time grid")
    common.add_argument("--normalized", action="store_true",
                        help="normalize connection tensors by the velocity magnitudes")
    common.add_argument("--date-column", help="date column name (default: first column)")
    common.add_argument("--missing", choices=MISSING_POLICIES, default="error",
                        help="missing-data policy")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="retroprospect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="detect and rank trend reversals")
    p.add_argument("input")
    p.add_argument("--column", required=True)

    p = sub.add_parser("matrix", parents=[common], help="pairwise connection matrices")
    p.add_argument("input")
    p.add_argument("--columns", required=True, help="comma-separated column names")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--date", action="append", help="date label (repeatable)")
    group.add_argument("--all-dates", action="store_true")
    p.add_argument("--mode", choices=["qualitative", "quantitative"], default="quantitative")

    p = sub.add_parser("simulate", parents=[common], help="Euler scheme from a run config")
    p.add_argument("config")

    p = sub.add_parser("kernel", parents=[common], help="grid viability kernel from a run config")
    p.add_argument("config")

    p = sub.add_parser("epihypo", parents=[common], help="directional epi/hypo derivatives")
    p.add_argument("--function", required=True, choices=sorted(eh.FUNCTIONS))
    p.add_argument("--point", default="0", help="comma-separated coordinates")
    p.add_argument("--backward-dir", default=None, help="default: +1 in every coordinate")
    p.add_argument("--forward-dir", default=None, help="default: +1 in every coordinate")
    p.add_argument("--h0", type=float, default=1e-3)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--count", type=int, default=12)
    return parser


def _floats(text, what):
    try:
        return np.array([float(s) for s in text.split(",")], dtype=np.float64)
    except ValueError:
        raise ValidationError(f"{what} {text!r} is not a comma-separated list of numbers") from None


def _stem(path):
    p = Path(path)
    return str(p.with_suffix(""))


def _dispatch(args):
    if args.epsilon < 0:
        raise ValidationError("--epsilon must be nonnegative")

    if args.command == "analyze":
        table = load_csv(args.input, args.date_column, [args.column], args.missing,
                         args.input_dialect)
        report, paths = write_analysis(table, args.column, args.out or _stem(args.input),
                                       args.epsilon, args.calendar_time)
        print(f"{len(report.events)} reversals; bear_share={format_number(report.bear_share)} "
              f"bull_share={format_number(report.bull_share)}")
        for path in paths.values():
            print(path)

    elif args.command == "matrix":
        columns = [c.strip() for c in args.columns.split(",") if c.strip()]
        table = load_csv(args.input, args.date_column, columns, args.missing, args.input_dialect)
        out = args.out or _stem(args.input) + "_matrix.csv"
        rows = write_matrix(table, columns, out, None if args.all_dates else args.date,
                            args.mode, args.normalized, args.epsilon)
        print(f"{rows} rows -> {out}")

    elif args.command == "simulate":
        cfg = load_config(args.config)
        out = args.out or cfg.get_str("out", None) or _stem(args.config) + "_trajectory.csv"
        traj = run_simulation(cfg)
        write_trajectory(traj, out)
        status = "viable" if traj.viable.all() else f"left the tube at step {int(np.argmin(traj.viable))}"
        print(f"{len(traj.states) - 1} steps, {status} -> {out}")

    elif args.command == "kernel":
        cfg = load_config(args.config)
        out = args.out or cfg.get_str("out", None) or _stem(args.config) + "_kernel.csv"
        grid = run_kernel(cfg)
        summary = write_kernel(grid, out)
        print(summary)
        print(out)

    elif args.command == "epihypo":
        V = eh.FUNCTIONS[args.function]
        x = _floats(args.point, "--point")
        ub = _floats(args.backward_dir, "--backward-dir") if args.backward_dir else np.ones_like(x)
        uf = _floats(args.forward_dir, "--forward-dir") if args.forward_dir else np.ones_like(x)
        if x.size == 1:
            x, ub, uf = x[0], ub[0], uf[0]
        schedule = eh.Schedule(args.h0, args.ratio, args.count)
        d = eh.estimate_directional(V, x, ub, uf, schedule)
        lines = [
            f"epi_forward: {format_number(d.epi_forward)}",
            f"hypo_forward: {format_number(d.hypo_forward)}",
            f"epi_backward: {format_number(d.epi_backward)}",
            f"hypo_backward: {format_number(d.hypo_backward)}",
            f"reversal_direction_pair: {str(eh.is_reversal_direction_pair(d)).lower()}",
            f"fermat: {eh.fermat_check(V, x, schedule=schedule)}",
        ]
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _dispatch(args)
    except EmptySampleError as exc:
        where = f" at step {exc.step}" if exc.step is not None else ""
        print(f"error: infeasible regulation map{where}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
