"""Pseudorange forward model, epoch records and the two-receiver simulator.

A pseudorange is modelled as the true range plus the receiver clock bias,
an error common to every receiver observing the same satellite, and a
receiver-specific code-acquisition error whose standard deviation shrinks
with CNR as ``kappa / cnr``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geo, kernels
from .errors import DomainError

WEEK_MS = 604_800_000
MAX_PRN = 32
GPS_ORBIT_RADIUS = 26_560_000.0


@dataclass(frozen=True)
class PseudorangeObs:
    prn: int
    pr: float
    cnr: float

    def __post_init__(self):
        if not 1 <= self.prn <= MAX_PRN:
            raise DomainError(f"PRN {self.prn} outside 1..{MAX_PRN}")
        if not (math.isfinite(self.pr) and math.isfinite(self.cnr)):
            raise DomainError(f"non-finite observation for PRN {self.prn}")


@dataclass(frozen=True)
class SatelliteEpochState:
    prn: int
    pos: tuple

    def __post_init__(self):
        if not 1 <= self.prn <= MAX_PRN:
            raise DomainError(f"PRN {self.prn} outside 1..{MAX_PRN}")
        p = geo.check_satellite_position(self.pos)
        object.__setattr__(self, "pos", tuple(float(c) for c in p))


@dataclass(frozen=True)
class ReceiverEpoch:
    """One receiver's synchronized snapshot.

    ``gps_time_tag`` is milliseconds into the GPS week.  ``fix`` is the
    receiver's own reported ECEF position, which anchors the lines of sight.
    """

    receiver_id: str
    gps_time_tag: int
    fix: tuple
    obs: tuple
    sats: tuple

    def __post_init__(self):
        if not 0 <= self.gps_time_tag < WEEK_MS:
            raise DomainError(f"time tag {self.gps_time_tag} outside the GPS week")
        object.__setattr__(self, "fix", tuple(float(c) for c in geo.as_point(self.fix)))
        object.__setattr__(self, "obs", tuple(self.obs))
        object.__setattr__(self, "sats", tuple(self.sats))
        prns = [o.prn for o in self.obs]
        if len(set(prns)) != len(prns):
            raise DomainError("duplicate PRN in observations")
        sat_prns = [s.prn for s in self.sats]
        if len(set(sat_prns)) != len(sat_prns):
            raise DomainError("duplicate PRN in satellite states")
        missing = set(prns) - set(sat_prns)
        if missing:
            raise DomainError(f"no satellite state for PRN(s) {sorted(missing)}")

    @property
    def fix_array(self):
        return np.array(self.fix)

    def sat_positions(self, prns):
        table = {s.prn: s.pos for s in self.sats}
        return np.array([table[p] for p in prns], dtype=np.float64).reshape(-1, 3)


@dataclass(frozen=True)
class NoiseModel:
    kappa: float = 300.0
    common_error_sigma: float = 5.0
    clock_bias_range: float = 1e5

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if self.common_error_sigma < 0 or self.clock_bias_range < 0:
            raise DomainError("noise magnitudes must be non-negative")


def true_range(a, b):
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return math.sqrt(float(d @ d))


def pseudorange_forward(true_range, clock_bias, common_error, noncommon_noise):
    return true_range + clock_bias + common_error + noncommon_noise


def cnr_sigma(cnr, model):
    """Code-noise standard deviation in meters at ``cnr`` dBHz."""
    if not cnr > 0:
        raise DomainError(f"CNR must be positive, got {cnr}")
    return model.kappa / cnr


def spp_fix(obs, sats_by_prn, initial=None, tol=1e-4, max_iter=20):
    """Raw Gauss-Newton fix; returns ``(state, iterations, status)``."""
    pos = np.array([sats_by_prn[o.prn] for o in obs], dtype=np.float64)
    pr = np.array([o.pr for o in obs], dtype=np.float64)
    x0 = np.zeros(4) if initial is None else np.append(np.asarray(initial, dtype=np.float64), 0.0)
    return kernels.gauss_newton_fix(pos, pr, x0, tol, max_iter)


def simulate_epoch_pair(constellation, pos_a, pos_b, cnr_map, model, seed,
                        gps_time_tag=0, receiver_ids=("a", "b")):
    """Simulate one synchronized epoch for two receivers.

    ``cnr_map`` maps PRN to ``(cnr_a, cnr_b)``.  Every random draw comes
    from a generator private to this call, seeded by ``seed``.  Each
    receiver's fix is its own Gauss-Newton solution from the Earth's
    centre; with fewer than four satellites no fix can be computed and the
    true position is reported instead.
    """
    sats = list(constellation)
    if not sats:
        raise DomainError("empty constellation")
    prns = [s.prn for s in sats]
    if len(set(prns)) != len(prns):
        raise DomainError("duplicate PRN in constellation")
    pa = geo.as_point(pos_a)
    pb = geo.as_point(pos_b)
    n = len(sats)

    rng = np.random.default_rng(seed)
    clock = rng.uniform(-model.clock_bias_range, model.clock_bias_range, size=2)
    common = rng.normal(0.0, 1.0, size=n) * model.common_error_sigma
    unit_noise = rng.normal(0.0, 1.0, size=(2, n))

    sats_by_prn = {s.prn: s.pos for s in sats}
    epochs = []
    for r, (rid, pos) in enumerate(zip(receiver_ids, (pa, pb))):
        obs = []
        for i, s in enumerate(sats):
            cnr = float(cnr_map[s.prn][r])
            eps = unit_noise[r, i] * cnr_sigma(cnr, model)
            pr = pseudorange_forward(true_range(s.pos, pos), clock[r], common[i], eps)
            obs.append(PseudorangeObs(s.prn, float(pr), cnr))
        fix = pos
        if n >= 4:
            state, _, status = spp_fix(obs, sats_by_prn)
            if status in (kernels.STATUS_OK, kernels.STATUS_MAX_ITER):
                fix = state[:3]
        epochs.append(ReceiverEpoch(rid, gps_time_tag, fix, obs, sats))
    return epochs[0], epochs[1]


def random_receiver_position(rng, alt_range=(0.0, 100.0)):
    lat = math.degrees(math.asin(rng.uniform(-0.95, 0.95)))
    lon = rng.uniform(-180.0, 180.0)
    return geo.ecef_from_geodetic(lat, lon, rng.uniform(*alt_range))


def random_constellation(rng, receiver, n_sats, min_elevation=10.0,
                         radius=GPS_ORBIT_RADIUS):
    """Satellites on a sphere of ``radius`` visible above ``min_elevation`` degrees."""
    if not 1 <= n_sats <= MAX_PRN:
        raise DomainError(f"satellite count {n_sats} outside 1..{MAX_PRN}")
    rx = geo.as_point(receiver)
    lat = math.degrees(math.asin(rx[2] / np.linalg.norm(rx)))
    lon = math.degrees(math.atan2(rx[1], rx[0]))
    east, north, up = geo.enu_basis(lat, lon)
    prns = sorted(rng.choice(np.arange(1, MAX_PRN + 1), size=n_sats, replace=False))
    s_min = math.sin(math.radians(min_elevation))
    out = []
    for prn in prns:
        el = math.asin(rng.uniform(s_min, 1.0))
        az = rng.uniform(0.0, 2.0 * math.pi)
        u = (math.cos(el) * (math.sin(az) * east + math.cos(az) * north)
             + math.sin(el) * up)
        ru = float(rx @ u)
        t = -ru + math.sqrt(ru * ru - float(rx @ rx) + radius * radius)
        out.append(SatelliteEpochState(int(prn), tuple(rx + t * u)))
    return out
