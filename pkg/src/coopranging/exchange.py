"""Receive-side cooperative ranging: cache local epochs, match, solve or drop."""

import enum
from dataclasses import dataclass

from .errors import DomainError, SingularGeometryError
from .estimators import (
    MIN_SHARED,
    BaselineEstimate,
    Method,
    estimate_baseline,
    pair_observations,
    select_reference,
)
from .measurement import PseudorangeObs

DEFAULT_CNR_MIN = 30.0
DEFAULT_CNR_REF = 47.0
DEFAULT_CAPACITY = 10


class DropReason(enum.Enum):
    TIME_TAG_UNMATCHED = "TimeTagUnmatched"
    INSUFFICIENT_SHARED_SATELLITES = "InsufficientSharedSatellites"
    REFERENCE_GATE_FAILED = "ReferenceGateFailed"
    SINGULAR_GEOMETRY = "SingularGeometry"


@dataclass(frozen=True)
class ExchangeConfig:
    cnr_min: float = DEFAULT_CNR_MIN
    cnr_ref: float = DEFAULT_CNR_REF
    method: Method = Method.WLS_DD

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.GPS_FIX:
            raise DomainError("GPS_FIX needs the peer's fix, which is not exchanged")


@dataclass(frozen=True)
class DistanceResult:
    peer_id: str
    gps_time_tag: int
    estimate: BaselineEstimate
    distance: float


class EpochCache:
    """Local epochs keyed by GPS time tag; the oldest tag is evicted first.

    Single writer: one owner calls ``put``; concurrent readers are fine.
    """

    def __init__(self, capacity=DEFAULT_CAPACITY):
        if capacity < 1:
            raise DomainError("capacity must be at least 1")
        self.capacity = capacity
        self._epochs = {}

    def put(self, epoch):
        self._epochs[epoch.gps_time_tag] = epoch
        while len(self._epochs) > self.capacity:
            del self._epochs[min(self._epochs)]
        return self

    def get(self, tag):
        return self._epochs.get(tag)

    def tags(self):
        return sorted(self._epochs)

    def __contains__(self, tag):
        return tag in self._epochs

    def __len__(self):
        return len(self._epochs)


def cache_put(cache, epoch):
    return cache.put(epoch)


def gate_pairs(local_obs, peer_obs, anchor, sat_lookup, cnr_min, cnr_ref):
    """Shared pairs and reference PRN, or the DropReason that stops the round."""
    pairs = pair_observations(local_obs, peer_obs, anchor, sat_lookup, cnr_min)
    if len(pairs) < MIN_SHARED:
        return DropReason.INSUFFICIENT_SHARED_SATELLITES
    ref = select_reference(pairs, cnr_ref)
    if ref is None:
        return DropReason.REFERENCE_GATE_FAILED
    return pairs, ref


def on_receive(cache, msg, config=ExchangeConfig(), peer_id=""):
    """Process one decoded piggyback message against the local cache.

    Returns a DistanceResult or exactly one DropReason.  The baseline points
    from the local receiver to the peer.
    """
    local = cache.get(msg.gps_time_tag)
    if local is None:
        return DropReason.TIME_TAG_UNMATCHED
    peer_obs = [PseudorangeObs(e.prn, e.pr, float(e.cnr)) for e in msg.entries]
    sat_lookup = {s.prn: s.pos for s in local.sats}
    gated = gate_pairs(local.obs, peer_obs, local.fix, sat_lookup,
                       config.cnr_min, config.cnr_ref)
    if isinstance(gated, DropReason):
        return gated
    pairs, ref = gated
    try:
        est = estimate_baseline(pairs, config.method, ref)
    except SingularGeometryError:
        return DropReason.SINGULAR_GEOMETRY
    return DistanceResult(peer_id, msg.gps_time_tag, est, est.distance)
