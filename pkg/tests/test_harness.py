import json

import numpy as np
import pytest

from coopranging import harness
from coopranging.errors import DomainError, ParseError
from coopranging.estimators import ALL_METHODS, Method
from coopranging.measurement import NoiseModel

from conftest import NOISELESS

RECORD = {
    "receiver_id": "a", "t": 1000, "fix_ecef": [6378137.0, 0.0, 0.0],
    "obs": [{"prn": 1, "pr": 2.0e7, "cnr": 45.0}],
    "sats": [{"prn": 1, "pos": [2.6e7, 0.0, 0.0]}],
}


def _write(tmp_path, records):
    path = tmp_path / "epochs.jsonl"
    path.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in records))
    return path


def test_load_one_record(tmp_path):
    epochs = harness.load_epochs(_write(tmp_path, [RECORD]))
    assert len(epochs) == 1
    e = epochs[0]
    assert (e.receiver_id, e.gps_time_tag, e.obs[0].cnr) == ("a", 1000, 45.0)


def test_load_empty_file(tmp_path):
    assert harness.load_epochs(_write(tmp_path, [])) == []


def test_load_geodetic_fix(tmp_path):
    rec = dict(RECORD)
    del rec["fix_ecef"]
    rec["fix_geodetic"] = [0.0, 0.0, 0.0]
    assert harness.load_epochs(_write(tmp_path, [rec]))[0].fix == (6378137.0, 0.0, 0.0)


def _broken(**changes):
    rec = json.loads(json.dumps(RECORD))
    for k, v in changes.items():
        if v is None:
            rec.pop(k)
        else:
            rec[k] = v
    return rec


@pytest.mark.parametrize("record,fragment", [
    (_broken(obs=[{"prn": 1, "pr": 2.0e7}]), "cnr"),
    (_broken(t=None), "'t'"),
    (_broken(fix_ecef=None), "fix"),
    (_broken(fix_geodetic=[0, 0, 0]), "exactly one"),
    (_broken(obs=[{"prn": 33, "pr": 2.0e7, "cnr": 40}]), "PRN"),
    (_broken(sats=[{"prn": 40, "pos": [2.6e7, 0, 0]}]), "PRN"),
    ('{"receiver_id": "a", "receiver_id": "b"}', "duplicate"),
    ("not json", ""),
])
def test_parse_errors_name_the_line(tmp_path, record, fragment):
    path = _write(tmp_path, [RECORD, record])
    with pytest.raises(ParseError) as info:
        harness.load_epochs(path)
    assert info.value.lineno == 2
    assert "line 2" in str(info.value) and fragment in str(info.value)


def test_file_round_trip(tmp_path):
    pairs = harness.simulate_session(5, seed=3)
    path = tmp_path / "s.jsonl"
    harness.dump_epochs([e for p in pairs for e in p], path)
    assert harness.pair_epochs(harness.load_epochs(path)) == pairs


def test_pair_epochs_skips_unmatched():
    (a0, b0), (a1, b1) = harness.simulate_session(2, seed=4)
    assert harness.pair_epochs([a0, b0, a1]) == [(a0, b0)]


def test_avg_distance_error():
    assert harness.avg_distance_error([4, 2, 3], 3) == pytest.approx(2 / 3)
    assert harness.avg_distance_error([3, 3], 3) == 0
    with pytest.raises(DomainError):
        harness.avg_distance_error([], 3)


def test_epoch_seed_is_order_independent():
    assert harness.epoch_seed(7, 3) == harness.epoch_seed(7, 3)
    assert len({harness.epoch_seed(7, i) for i in range(100)}) == 100


def test_comparison_zero_noise():
    pairs = harness.simulate_session(60, (3.0, 0.0, 0.0), seed=5, model=NOISELESS,
                                     cnr_range=(45.0, 52.0))
    report = harness.run_comparison(pairs, 3.0)
    assert report.eligible > 0
    for s in report.methods.values():
        assert s.mean_abs_error < 1e-3


def test_comparison_all_gated_out():
    pairs = harness.simulate_session(30, seed=6, cnr_range=(30.0, 46.0))
    report = harness.run_comparison(pairs, 3.0)
    assert report.eligible == 0
    assert all(s.mean_abs_error is None for s in report.methods.values())
    assert sum(report.drops.values()) == 30
    assert "LS_DD,,0" in harness.comparison_csv(report)


def test_comparison_uses_one_sample_set():
    pairs = harness.simulate_session(300, seed=8)
    report = harness.run_comparison(pairs, 3.0)
    counts = {s.valid_samples for s in report.methods.values()}
    assert len(counts) == 1 and 0 < report.eligible <= 300
    assert report.eligible + sum(report.drops.values()) == report.total_epochs
    assert all(e >= 0 for s in report.methods.values() for e in s.errors)


def test_comparison_is_deterministic():
    r1 = harness.run_comparison(harness.simulate_session(100, seed=9), 3.0)
    r2 = harness.run_comparison(harness.simulate_session(100, seed=9), 3.0)
    assert harness.comparison_csv(r1) == harness.comparison_csv(r2)


def test_sweep_counts_non_increasing():
    pairs = harness.simulate_session(300, seed=10, n_sats=(10, 10), cnr_jitter=1.0)
    rows = harness.cnr_threshold_sweep(pairs, [30, 35, 40, 44, 45, 47], 3.0)
    counts = [r.valid_samples for r in rows]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] > 0


def test_report_formats():
    pairs = harness.simulate_session(100, seed=11)
    report = harness.run_comparison(pairs, 3.0)
    lines = harness.comparison_csv(report).splitlines()
    assert lines[0] == "method,mean_abs_error_m,valid_samples"
    assert [l.split(",")[0] for l in lines[1:]] == [m.value for m in ALL_METHODS]
    table = harness.comparison_table(report, "3m Baseline")
    assert "WLS-DD" in table and "3m Baseline" in table
    rows = harness.cnr_threshold_sweep(pairs, [47, 30], 3.0)
    assert harness.sweep_csv(rows).splitlines()[0] == "threshold_dbhz,mean_abs_error_m,valid_samples"
    assert "CNR threshold" in harness.sweep_table(rows)
