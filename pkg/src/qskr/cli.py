"""Command-line entry point.

Results go to stdout, diagnostics to stderr. Exit codes:

    0  success
    1  usage error
    2  parse or validation error
    3  infeasible plan, inconclusive horizon or event cap exceeded
    4  key-pool underflow (``simulate`` only)
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from numbers import Integral, Rational
from typing import IO, Sequence

from qskr import __version__
from qskr.config import (
    ConfigError,
    ValidationError,
    default_table,
    load_config,
    load_table,
)
from qskr.core import (
    KeyPolicy,
    channel_breakdown,
    generate_curve,
    rskr_per_channel,
    rskr_per_link,
)
from qskr.errors import EventExplosion, InconclusiveHorizon, Infeasible
from qskr.keypool import SimConfig, simulate, threshold_check, write_trace_csv
from qskr.planner import Demand, plan_min_rskr
from qskr.spectrum import Band, named_band

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_UNDERFLOW = 4

CURVE_HEADER = ("capacity_gbps", "occupancy_mhz", "n_channels", "rskr_bps")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def plain_number(value):
    """int for integral values, float otherwise; keeps CSV/JSON free of spurious '.0'."""
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Rational):
        if value.denominator == 1:
            return int(value.numerator)
        return float(value)
    value = float(value)
    return int(value) if value.is_integer() else value


def format_number(value) -> str:
    value = plain_number(value)
    return str(value) if isinstance(value, int) else repr(value)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _rate(text: str):
    """Non-negative rate; integers and 'p/q' fractions stay exact."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    if value.denominator == 1:
        return int(value)
    return value if "/" in text else float(text)


def _positive(text: str) -> float:
    value = _rate(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _segments(text: str) -> tuple[tuple[int, int], ...]:
    try:
        return tuple(
            (int(lo), int(hi)) for lo, hi in (part.split(":") for part in text.split(","))
        )
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected LO:HI[,LO:HI...] in MHz, got {text!r}"
        ) from None


def _band(args) -> Band:
    if args.band == "custom":
        if not args.segments:
            raise UsageError("--band custom requires --segments")
        try:
            return Band(args.segments)
        except (TypeError, ValueError) as exc:
            raise ValidationError(str(exc), "--segments") from None
    if args.segments:
        raise UsageError("--segments is only valid with --band custom")
    return named_band(args.band)


def _table(args):
    return load_table(args.table) if args.table else default_table()


def _policy(args) -> KeyPolicy:
    return KeyPolicy(args.key_bits, args.refresh_hz)


def _emit_json(obj, out: IO[str]) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def write_curve_csv(points, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for p in points:
        writer.writerow(
            [format_number(p.capacity_gbps), p.occupancy_mhz, p.n_channels, format_number(p.rskr_bps)]
        )


# -- subcommands -----------------------------------------------------------


def cmd_rskr_channel(args, out: IO[str]) -> int:
    out.write(format_number(rskr_per_channel(_policy(args))) + "\n")
    return EXIT_OK


def cmd_rskr_link(args, out: IO[str]) -> int:
    link = load_config(args.config).resolve()
    _emit_json(
        {
            "rskr_bps": plain_number(rskr_per_link(link)),
            "n_channels": len(link.channels),
            "channels": [
                {"id": cid, "rskr_bps": plain_number(rate)} for cid, rate in channel_breakdown(link)
            ],
        },
        out,
    )
    return EXIT_OK


def cmd_curve(args, out: IO[str]) -> int:
    points = generate_curve(_policy(args), _band(args), _table(args))
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_curve_csv(points, fh)
    else:
        write_curve_csv(points, out)
    return EXIT_OK


def cmd_simulate(args, out: IO[str]) -> int:
    link = load_config(args.config).resolve()
    config = SimConfig(link, args.skr, args.horizon, args.initial_pool, args.max_events)
    result = simulate(config)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            write_trace_csv(config, fh)
    _emit_json(
        {
            "rskr_bps": plain_number(rskr_per_link(link)),
            "skr_bps": plain_number(args.skr),
            "min_pool_bits": plain_number(result.min_pool_bits),
            "underflow_time_s": None
            if result.underflow_time_s is None
            else plain_number(result.underflow_time_s),
            "final_pool_bits": plain_number(result.final_pool_bits),
            "events_processed": result.events_processed,
        },
        out,
    )
    return EXIT_UNDERFLOW if result.underflow else EXIT_OK


def cmd_threshold(args, out: IO[str]) -> int:
    link = load_config(args.config).resolve()
    try:
        rskr, verified = threshold_check(
            link, args.horizon, args.initial_pool, args.delta, args.max_events
        )
    except ValueError as exc:
        raise ValidationError(str(exc), "channels") from None
    _emit_json({"rskr_bps": plain_number(rskr), "verified": verified}, out)
    return EXIT_OK if verified else EXIT_INFEASIBLE


def cmd_plan(args, out: IO[str]) -> int:
    plan = plan_min_rskr(Demand(args.demand, _band(args), _policy(args), _table(args)))
    _emit_json(
        {
            "counts": {format_number(cap): n for cap, n in plan.counts.items()},
            "n_channels": plan.n_channels,
            "total_capacity_gbps": plain_number(plan.total_capacity_gbps),
            "total_occupancy_mhz": plan.total_occupancy_mhz,
            "rskr_bps": plain_number(plan.rskr_bps),
        },
        out,
    )
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _add_policy_args(p):
    p.add_argument("--key-bits", type=_positive_int, default=256, help="key length in bits (default 256)")
    p.add_argument("--refresh-hz", type=_rate, default=1, help="key refreshes per second (default 1)")


def _add_band_args(p):
    p.add_argument("--band", required=True, choices=["C", "C+L", "custom"])
    p.add_argument("--segments", type=_segments, help="custom band segments, LO:HI[,LO:HI...] in MHz")
    p.add_argument("--table", help="capacity/occupancy table JSON (default: $QSKR_TABLE or built-in)")


def _add_sim_args(p):
    p.add_argument("--config", required=True, help="link configuration JSON")
    p.add_argument("--horizon", type=_positive, required=True, help="simulated time in seconds")
    p.add_argument("--initial-pool", type=_rate, default=0, help="initial key pool in bits")
    p.add_argument("--max-events", type=_positive_int, default=10_000_000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qskr", description="Required secure key rate planning for QKD-secured DWDM links.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rskr = sub.add_parser("rskr", help="required secure key rate")
    rskr_sub = rskr.add_subparsers(dest="target", required=True, parser_class=_Parser)
    channel = rskr_sub.add_parser("channel", help="RSKR of one data channel")
    _add_policy_args(channel)
    channel.set_defaults(func=cmd_rskr_channel)
    link = rskr_sub.add_parser("link", help="RSKR of a configured link with per-channel breakdown")
    link.add_argument("--config", required=True)
    link.set_defaults(func=cmd_rskr_link)

    curve = sub.add_parser("curve", help="RSKR per link versus channel capacity, as CSV")
    _add_band_args(curve)
    _add_policy_args(curve)
    curve.add_argument("--out", help="output CSV path (default stdout)")
    curve.set_defaults(func=cmd_curve)

    sim = sub.add_parser("simulate", help="key-pool simulation at a given SKR")
    _add_sim_args(sim)
    sim.add_argument("--skr", type=_rate, required=True, help="secure key rate in bits/s")
    sim.add_argument("--trace", help="write the per-event trace as CSV")
    sim.set_defaults(func=cmd_simulate)

    thr = sub.add_parser("threshold", help="check that the link RSKR is the no-underflow threshold")
    _add_sim_args(thr)
    thr.add_argument("--delta", type=float, default=0.01, help="relative SKR shortfall to test (default 0.01)")
    thr.set_defaults(func=cmd_threshold)

    plan = sub.add_parser("plan", help="channel mix minimising link RSKR for a throughput demand")
    plan.add_argument("--demand", type=_positive, required=True, help="throughput in Gbps")
    _add_band_args(plan)
    _add_policy_args(plan)
    plan.set_defaults(func=cmd_plan)
    return parser


def main(argv: Sequence[str] | None = None, out: IO[str] | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"qskr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, OSError) as exc:
        print(f"qskr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (Infeasible, InconclusiveHorizon, EventExplosion) as exc:
        print(f"qskr: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (TypeError, ValueError) as exc:
        print(f"qskr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
