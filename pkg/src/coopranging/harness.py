"""Epoch files, synthetic sessions and the distance-error evaluations."""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geo
from .errors import CoopRangingError, DomainError, ParseError, SingularGeometryError
from .estimators import ALL_METHODS, Method, estimate_baseline, fix_baseline
from .exchange import DEFAULT_CNR_MIN, DEFAULT_CNR_REF, DropReason, gate_pairs
from .measurement import (
    MAX_PRN,
    NoiseModel,
    PseudorangeObs,
    ReceiverEpoch,
    SatelliteEpochState,
    WEEK_MS,
    random_constellation,
    random_receiver_position,
    simulate_epoch_pair,
)

# --------------------------------------------------------------------------
# epoch files: one JSON object per line
# --------------------------------------------------------------------------

_REQUIRED = ("receiver_id", "t", "obs", "sats")


def _no_duplicate_keys(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate field {k!r}")
        out[k] = v
    return out


def _prn(value, lineno):
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= MAX_PRN:
        raise ParseError(f"unknown PRN {value!r}", lineno)
    return value


def _vector(value, name, lineno):
    if not isinstance(value, list) or len(value) != 3:
        raise ParseError(f"{name} must be a list of three numbers", lineno)
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ParseError(f"{name} must be a list of three numbers", lineno) from None


def parse_epoch_record(line, lineno=None):
    try:
        rec = json.loads(line, object_pairs_hook=_no_duplicate_keys)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    if not isinstance(rec, dict):
        raise ParseError("record is not a JSON object", lineno)
    for key in _REQUIRED:
        if key not in rec:
            raise ParseError(f"missing field {key!r}", lineno)
    has_ecef = "fix_ecef" in rec
    has_geo = "fix_geodetic" in rec
    if has_ecef == has_geo:
        raise ParseError("exactly one of fix_ecef / fix_geodetic is required", lineno)
    t = rec["t"]
    if not isinstance(t, int) or isinstance(t, bool):
        raise ParseError("t must be an integer", lineno)
    try:
        if has_ecef:
            fix = _vector(rec["fix_ecef"], "fix_ecef", lineno)
        else:
            fix = geo.ecef_from_geodetic(*_vector(rec["fix_geodetic"], "fix_geodetic", lineno))
        obs = []
        for o in rec["obs"]:
            for key in ("prn", "pr", "cnr"):
                if key not in o:
                    raise ParseError(f"observation missing field {key!r}", lineno)
            obs.append(PseudorangeObs(_prn(o["prn"], lineno), float(o["pr"]), float(o["cnr"])))
        sats = []
        for s in rec["sats"]:
            for key in ("prn", "pos"):
                if key not in s:
                    raise ParseError(f"satellite missing field {key!r}", lineno)
            sats.append(SatelliteEpochState(_prn(s["prn"], lineno),
                                            tuple(_vector(s["pos"], "pos", lineno))))
        return ReceiverEpoch(str(rec["receiver_id"]), t, fix, obs, sats)
    except ParseError:
        raise
    except (CoopRangingError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), lineno) from None


def load_epochs(path):
    epochs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                epochs.append(parse_epoch_record(line, lineno))
    return epochs


def epoch_to_record(epoch):
    return {
        "receiver_id": epoch.receiver_id,
        "t": epoch.gps_time_tag,
        "fix_ecef": list(epoch.fix),
        "obs": [{"prn": o.prn, "pr": o.pr, "cnr": o.cnr} for o in epoch.obs],
        "sats": [{"prn": s.prn, "pos": list(s.pos)} for s in epoch.sats],
    }


def dump_epochs(epochs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for e in epochs:
            fh.write(json.dumps(epoch_to_record(e)) + "\n")


def pair_epochs(epochs):
    """Group epochs by time tag into ``(a, b)`` pairs.

    Receiver ``a`` is whichever receiver id appears first in the input;
    tags seen for only one receiver are skipped.
    """
    order = []
    by_tag = {}
    for e in epochs:
        if e.receiver_id not in order:
            order.append(e.receiver_id)
        by_tag.setdefault(e.gps_time_tag, {})[e.receiver_id] = e
    if len(order) > 2:
        raise DomainError(f"expected two receivers, found {len(order)}")
    if len(order) < 2:
        return []
    a_id, b_id = order
    return [(g[a_id], g[b_id]) for _, g in sorted(by_tag.items()) if a_id in g and b_id in g]


# --------------------------------------------------------------------------
# synthetic sessions
# --------------------------------------------------------------------------

def epoch_seed(seed, index):
    """Per-epoch seed; depends only on the master seed and epoch index."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _baseline_ecef(origin, baseline_enu):
    fix = np.asarray(origin)
    lat = math.degrees(math.asin(fix[2] / np.linalg.norm(fix)))
    lon = math.degrees(math.atan2(fix[1], fix[0]))
    return geo.enu_basis(lat, lon).T @ np.asarray(baseline_enu, dtype=np.float64)


def simulate_session(n_epochs, baseline_enu=(3.0, 0.0, 0.0), seed=0, model=NoiseModel(),
                     n_sats=(8, 8), cnr_range=(30.0, 50.0), cnr_jitter=None,
                     start_tag=0, interval_ms=1000):
    """Simulate ``n_epochs`` independent epoch pairs.

    Each epoch draws a fresh receiver site, constellation and CNRs.  CNRs
    are uniform on ``cnr_range``; they are independent between receivers
    unless ``cnr_jitter`` is given, in which case receiver ``b`` sees
    receiver ``a``'s CNR plus a uniform offset of at most ``cnr_jitter``.
    """
    pairs = []
    for i in range(n_epochs):
        s = epoch_seed(seed, i)
        rng = np.random.default_rng(s)
        pos_a = random_receiver_position(rng)
        pos_b = pos_a + _baseline_ecef(pos_a, baseline_enu)
        n = int(rng.integers(n_sats[0], n_sats[1] + 1))
        sats = random_constellation(rng, pos_a, n)
        cnr_a = rng.uniform(*cnr_range, size=n)
        if cnr_jitter is None:
            cnr_b = rng.uniform(*cnr_range, size=n)
        else:
            cnr_b = np.clip(cnr_a + rng.uniform(-cnr_jitter, cnr_jitter, size=n), 10.0, 60.0)
        cnr_map = {sat.prn: (float(ca), float(cb)) for sat, ca, cb in zip(sats, cnr_a, cnr_b)}
        tag = (start_tag + i * interval_ms) % WEEK_MS
        pairs.append(simulate_epoch_pair(sats, pos_a, pos_b, cnr_map, model,
                                         seed=s ^ 0x5EED, gps_time_tag=tag))
    return pairs


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def avg_distance_error(estimates, d_B):
    """Mean absolute difference between estimated distances and ``d_B``."""
    d = np.asarray(estimates, dtype=np.float64)
    if d.size == 0:
        raise DomainError("no estimates to average")
    return float(np.mean(np.abs(d - d_B)))


@dataclass
class MethodStats:
    method: Method
    errors: list = field(default_factory=list)

    @property
    def valid_samples(self):
        return len(self.errors)

    @property
    def mean_abs_error(self):
        return float(np.mean(self.errors)) if self.errors else None


@dataclass
class EvalReport:
    total_epochs: int
    methods: dict
    drops: dict

    @property
    def eligible(self):
        return next(iter(self.methods.values())).valid_samples


@dataclass
class SweepRow:
    threshold: float
    mean_abs_error: float
    valid_samples: int


def evaluate_pair(epoch_a, epoch_b, cnr_min=DEFAULT_CNR_MIN, cnr_ref=DEFAULT_CNR_REF,
                  methods=ALL_METHODS):
    """All requested estimates for one pair, or the DropReason that excludes it."""
    if epoch_a.gps_time_tag != epoch_b.gps_time_tag:
        return DropReason.TIME_TAG_UNMATCHED
    sat_lookup = {s.prn: s.pos for s in epoch_a.sats}
    gated = gate_pairs(epoch_a.obs, epoch_b.obs, epoch_a.fix, sat_lookup, cnr_min, cnr_ref)
    if isinstance(gated, DropReason):
        return gated
    pairs, ref = gated
    out = {}
    try:
        for m in methods:
            m = Method(m)
            out[m] = fix_baseline(epoch_a, epoch_b) if m is Method.GPS_FIX else estimate_baseline(pairs, m, ref)
    except SingularGeometryError:
        return DropReason.SINGULAR_GEOMETRY
    return out


def run_comparison(epoch_pairs, d_B, cnr_min=DEFAULT_CNR_MIN, cnr_ref=DEFAULT_CNR_REF,
                   methods=ALL_METHODS):
    """Mean absolute distance error per method over the DD-eligible epochs.

    An epoch counts for every method or for none: it must pass the
    double-difference gates and every method must produce a solution.
    """
    methods = tuple(Method(m) for m in methods)
    stats = {m: MethodStats(m) for m in methods}
    drops = {r: 0 for r in DropReason}
    n = 0
    for ea, eb in epoch_pairs:
        n += 1
        res = evaluate_pair(ea, eb, cnr_min, cnr_ref, methods)
        if isinstance(res, DropReason):
            drops[res] += 1
            continue
        for m, est in res.items():
            stats[m].errors.append(abs(est.distance - d_B))
    return EvalReport(n, stats, drops)


def cnr_threshold_sweep(epoch_pairs, thresholds, d_B):
    """LS-DD error and valid-sample count at each CNR threshold.

    The reference is the best shared satellite with no separate reference
    gate, so a threshold only changes which satellites are candidates.
    """
    if not thresholds:
        raise DomainError("no thresholds")
    epoch_pairs = list(epoch_pairs)
    rows = []
    for th in thresholds:
        errs = []
        for ea, eb in epoch_pairs:
            res = evaluate_pair(ea, eb, th, -math.inf, (Method.LS_DD,))
            if not isinstance(res, DropReason):
                errs.append(abs(res[Method.LS_DD].distance - d_B))
        rows.append(SweepRow(float(th), float(np.mean(errs)) if errs else None, len(errs)))
    return rows


# --------------------------------------------------------------------------
# report rendering
# --------------------------------------------------------------------------

def _fmt(v):
    return "" if v is None else f"{v:.3f}"


def comparison_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "mean_abs_error_m", "valid_samples"])
    for m, s in report.methods.items():
        w.writerow([m.value, _fmt(s.mean_abs_error), s.valid_samples])
    return buf.getvalue()


def comparison_table(report, label="Baseline"):
    names = [m.value.replace("_", "-") for m in report.methods]
    cells = [_fmt(s.mean_abs_error) or "-" for s in report.methods.values()]
    widths = [max(len(a), len(b)) for a, b in zip(names, cells)]
    first = max(len(label), len("valid samples"))
    lines = [
        " | ".join([" " * first] + [n.rjust(w) for n, w in zip(names, widths)]),
        " | ".join([label.ljust(first)] + [c.rjust(w) for c, w in zip(cells, widths)]),
        " | ".join(["valid samples".ljust(first)]
                   + [str(s.valid_samples).rjust(w) for s, w in zip(report.methods.values(), widths)]),
    ]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold_dbhz", "mean_abs_error_m", "valid_samples"])
    for r in rows:
        w.writerow([f"{r.threshold:g}", _fmt(r.mean_abs_error), r.valid_samples])
    return buf.getvalue()


def sweep_table(rows):
    head = ["CNR threshold (dBHz)", "Average distance error (m)", "Valid samples"]
    body = [[f"{r.threshold:g}", _fmt(r.mean_abs_error) or "-", str(r.valid_samples)] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    out = [" | ".join(h.rjust(w) for h, w in zip(head, widths)), "-" * (sum(widths) + 6)]
    out += [" | ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(out) + "\n"
