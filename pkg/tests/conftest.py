import numpy as np
import pytest

from coopranging import geo
from coopranging.measurement import (
    NoiseModel,
    random_constellation,
    random_receiver_position,
    simulate_epoch_pair,
)

NOISELESS = NoiseModel(kappa=1e-12, common_error_sigma=0.0, clock_bias_range=0.0)


def enu_offset(pos, enu):
    p = np.asarray(pos)
    lat = np.degrees(np.arcsin(p[2] / np.linalg.norm(p)))
    lon = np.degrees(np.arctan2(p[1], p[0]))
    return p + geo.enu_basis(lat, lon).T @ np.asarray(enu, dtype=float)


def random_pair(rng, baseline_enu=(3.0, 0.0, 0.0), n_sats=6, model=NOISELESS,
                cnr=(30.0, 50.0), seed=None, tag=0):
    """A simulated epoch pair plus its true positions and constellation."""
    pos_a = random_receiver_position(rng)
    pos_b = enu_offset(pos_a, baseline_enu)
    sats = random_constellation(rng, pos_a, n_sats)
    cnr_map = {s.prn: tuple(rng.uniform(*cnr, size=2)) for s in sats}
    if seed is None:
        seed = int(rng.integers(2 ** 63))
    ea, eb = simulate_epoch_pair(sats, pos_a, pos_b, cnr_map, model, seed, gps_time_tag=tag)
    return ea, eb, pos_a, pos_b, sats


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
