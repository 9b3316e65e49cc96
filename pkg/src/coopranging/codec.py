"""Piggyback message attached to DSRC heartbeats.

Wire layout, all fields little-endian::

    offset  size  field
    0       4     GPS time tag, uint32, ms of GPS week
    4       4     satellite bitmap, uint32, bit k set iff PRN k+1 present
    8       9n    n entries in ascending PRN order:
                    8  pseudorange, IEEE-754 double, meters
                    1  CNR, uint8, dBHz

Total length is ``8 + 9n`` bytes.
"""

import math
import struct
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, EncodingError, MalformedMessageError, TruncatedMessageError
from .estimators import filter_candidates
from .measurement import MAX_PRN

HEADER = struct.Struct("<II")
ENTRY = struct.Struct("<dB")
MIN_BROADCAST = 4


class PiggybackEntry(NamedTuple):
    prn: int
    pr: float
    cnr: int


@dataclass(frozen=True)
class PiggybackMessage:
    gps_time_tag: int
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(PiggybackEntry(*e) for e in self.entries))

    @property
    def sat_bitmap(self):
        bitmap = 0
        for e in self.entries:
            bitmap |= 1 << (e.prn - 1)
        return bitmap

    def validate(self):
        if not 0 <= self.gps_time_tag < 2 ** 32:
            raise EncodingError(f"time tag {self.gps_time_tag} does not fit 32 bits")
        if len(self.entries) > MAX_PRN:
            raise EncodingError("more than 32 entries")
        prev = 0
        for e in self.entries:
            if not prev < e.prn <= MAX_PRN:
                raise EncodingError(f"PRN {e.prn} out of range or out of order")
            if not math.isfinite(e.pr):
                raise EncodingError(f"non-finite pseudorange for PRN {e.prn}")
            if not 0 <= e.cnr <= 255 or int(e.cnr) != e.cnr:
                raise EncodingError(f"CNR {e.cnr} is not a uint8")
            prev = e.prn


def encoded_length(n):
    if not 0 <= n <= MAX_PRN:
        raise DomainError(f"satellite count {n} outside 0..{MAX_PRN}")
    return HEADER.size + ENTRY.size * n


def encode(msg):
    msg.validate()
    parts = [HEADER.pack(msg.gps_time_tag, msg.sat_bitmap)]
    parts.extend(ENTRY.pack(e.pr, int(e.cnr)) for e in msg.entries)
    return b"".join(parts)


def decode(buf):
    buf = bytes(buf)
    if len(buf) < HEADER.size:
        raise TruncatedMessageError(f"{len(buf)} bytes, header needs {HEADER.size}")
    tag, bitmap = HEADER.unpack_from(buf, 0)
    prns = [k + 1 for k in range(MAX_PRN) if bitmap >> k & 1]
    if len(buf) != encoded_length(len(prns)):
        raise MalformedMessageError(
            f"{len(buf)} bytes but bitmap lists {len(prns)} satellites "
            f"({encoded_length(len(prns))} bytes expected)")
    entries = []
    for i, prn in enumerate(prns):
        pr, cnr = ENTRY.unpack_from(buf, HEADER.size + i * ENTRY.size)
        if not math.isfinite(pr):
            raise MalformedMessageError(f"non-finite pseudorange for PRN {prn}")
        entries.append(PiggybackEntry(prn, pr, cnr))
    return PiggybackMessage(tag, tuple(entries))


def wire_cnr(cnr):
    """Round half-up to an integer dBHz clamped to the uint8 range."""
    return min(255, max(0, math.floor(cnr + 0.5)))


def should_broadcast(epoch, cnr_min, cnr_ref):
    """Message to piggyback this round, or None when the transmit gates fail.

    Transmission needs at least four candidates above ``cnr_min`` and a best
    candidate reaching ``cnr_ref``.
    """
    cands = filter_candidates(epoch.obs, cnr_min)
    if len(cands) < MIN_BROADCAST or max(o.cnr for o in cands) < cnr_ref:
        return None
    entries = sorted((o.prn, o.pr, wire_cnr(o.cnr)) for o in cands)
    return PiggybackMessage(epoch.gps_time_tag, tuple(entries))
