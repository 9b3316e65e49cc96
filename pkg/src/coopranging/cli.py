"""Command-line entry point: simulate, solve, eval, sweep and codec."""

import argparse
import json
import sys

import numpy as np

from . import codec, harness
from .errors import CoopRangingError, DomainError, MalformedMessageError, ParseError
from .estimators import ALL_METHODS, Method, estimate_baseline, fix_baseline
from .exchange import DEFAULT_CNR_MIN, DEFAULT_CNR_REF, DropReason
from .measurement import NoiseModel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NO_ELIGIBLE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _baseline(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return np.array([parts[0], 0.0, 0.0])
    if len(parts) == 3:
        return np.array(parts)
    raise argparse.ArgumentTypeError("baseline is a distance or east,north,up in meters")


def _range(text):
    lo, _, hi = text.partition("-")
    return int(lo), int(hi or lo)


def _thresholds(text):
    return [float(t) for t in text.split(",") if t]


def _add_gates(p):
    p.add_argument("--cnr-min", type=float, default=DEFAULT_CNR_MIN, help="candidate CNR threshold, dBHz")
    p.add_argument("--cnr-ref", type=float, default=DEFAULT_CNR_REF, help="reference CNR threshold, dBHz")


def build_parser():
    parser = _Parser(prog="coopranging", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a synthetic two-receiver epoch file")
    p.add_argument("path")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--baseline", type=_baseline, default=_baseline("3"),
                   help="distance (east) or east,north,up in meters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sats", type=_range, default=(8, 8), help="satellite count or lo-hi range")
    p.add_argument("--cnr-low", type=float, default=30.0)
    p.add_argument("--cnr-high", type=float, default=50.0)
    p.add_argument("--cnr-jitter", type=float, default=None,
                   help="correlate receiver b's CNR to a's within this many dBHz")
    p.add_argument("--kappa", type=float, default=300.0)
    p.add_argument("--common-sigma", type=float, default=5.0)
    p.add_argument("--clock-range", type=float, default=1e5)

    p = sub.add_parser("solve", help="estimate the baseline for one epoch pair")
    p.add_argument("path")
    p.add_argument("--time", type=int, default=None, help="time tag to solve (default: first pair)")
    p.add_argument("--method", type=Method, choices=list(Method), default=Method.WLS_DD,
                   metavar="{" + ",".join(m.value for m in Method) + "}")
    _add_gates(p)

    p = sub.add_parser("eval", help="compare all methods against a known baseline")
    p.add_argument("path")
    p.add_argument("--baseline", type=float, required=True, help="true distance, meters")
    p.add_argument("--output", choices=("table", "csv"), default="table")
    _add_gates(p)

    p = sub.add_parser("sweep", help="LS-DD error against the candidate CNR threshold")
    p.add_argument("path")
    p.add_argument("--baseline", type=float, required=True, help="true distance, meters")
    p.add_argument("--thresholds", type=_thresholds, default=[47, 46, 45, 44, 43, 42, 41, 40, 35, 30])
    p.add_argument("--output", choices=("table", "csv"), default="table")

    p = sub.add_parser("codec", help="encode or decode a piggyback message as hex")
    csub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    e = csub.add_parser("encode", help="JSON message -> hex")
    e.add_argument("message", help='{"t": ..., "entries": [[prn, pr, cnr], ...]}, or - for stdin')
    d = csub.add_parser("decode", help="hex -> JSON message")
    d.add_argument("hex")
    return parser


def _load_pairs(path):
    pairs = harness.pair_epochs(harness.load_epochs(path))
    if not pairs:
        raise ParseError(f"{path}: no epoch pairs")
    return pairs


def cmd_simulate(args):
    model = NoiseModel(args.kappa, args.common_sigma, args.clock_range)
    pairs = harness.simulate_session(
        args.epochs, args.baseline, seed=args.seed, model=model, n_sats=args.sats,
        cnr_range=(args.cnr_low, args.cnr_high), cnr_jitter=args.cnr_jitter)
    harness.dump_epochs([e for pair in pairs for e in pair], args.path)
    print(f"wrote {2 * len(pairs)} epochs to {args.path}")
    return EXIT_OK


def cmd_solve(args):
    pairs = _load_pairs(args.path)
    if args.time is not None:
        pairs = [p for p in pairs if p[0].gps_time_tag == args.time]
        if not pairs:
            raise UsageError(f"no epoch pair with time tag {args.time}")
    ea, eb = pairs[0]
    if args.method is Method.GPS_FIX:
        est = fix_baseline(ea, eb)
    else:
        res = harness.evaluate_pair(ea, eb, args.cnr_min, args.cnr_ref, (args.method,))
        if isinstance(res, DropReason):
            print(json.dumps({"t": ea.gps_time_tag, "dropped": res.value}))
            return EXIT_NO_ELIGIBLE
        est = res[args.method]
    print(json.dumps({
        "peer_id": eb.receiver_id,
        "t": ea.gps_time_tag,
        "method": est.method.value,
        "distance_m": est.distance,
        "baseline_m": list(est.r),
        "n_sats": est.n_sats,
        "reference_prn": est.reference_prn,
        "residual_norm_m": est.residual_norm,
        "clock_diff_m": est.clock_diff,
    }))
    return EXIT_OK


def cmd_eval(args):
    report = harness.run_comparison(_load_pairs(args.path), args.baseline, args.cnr_min, args.cnr_ref)
    if args.output == "csv":
        sys.stdout.write(harness.comparison_csv(report))
    else:
        sys.stdout.write(harness.comparison_table(report, f"{args.baseline:g} m baseline"))
    return EXIT_OK if report.eligible else EXIT_NO_ELIGIBLE


def cmd_sweep(args):
    rows = harness.cnr_threshold_sweep(_load_pairs(args.path), args.thresholds, args.baseline)
    sys.stdout.write(harness.sweep_csv(rows) if args.output == "csv" else harness.sweep_table(rows))
    return EXIT_OK if any(r.valid_samples for r in rows) else EXIT_NO_ELIGIBLE


def cmd_codec(args):
    if args.action == "encode":
        text = sys.stdin.read() if args.message == "-" else args.message
        try:
            obj = json.loads(text)
            msg = codec.PiggybackMessage(int(obj["t"]), tuple(tuple(e) for e in obj["entries"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad message JSON: {exc}") from None
        print(codec.encode(msg).hex())
        return EXIT_OK
    try:
        buf = bytes.fromhex(args.hex)
    except ValueError as exc:
        raise ParseError(f"bad hex: {exc}") from None
    msg = codec.decode(buf)
    print(json.dumps({"t": msg.gps_time_tag, "bitmap": f"0x{msg.sat_bitmap:08x}",
                      "entries": [list(e) for e in msg.entries]}))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "solve": cmd_solve, "eval": cmd_eval,
            "sweep": cmd_sweep, "codec": cmd_codec}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParseError, MalformedMessageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, DomainError, CoopRangingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
