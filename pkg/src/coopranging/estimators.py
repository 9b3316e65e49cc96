"""Differencing and least-squares baseline estimators.

Conventions: receiver ``a`` is the local receiver whose fix anchors the
lines of sight, and the estimated baseline points from ``a`` to ``b``.
Single differences are ``pr_a - pr_b`` so that, for a line of sight ``e``
and baseline ``r``, ``S = e . r + (t_a - t_b)``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import geo, kernels
from .errors import (
    ConvergenceError,
    DomainError,
    InsufficientObservationsError,
    SingularGeometryError,
    TimeMismatchError,
)
from .measurement import spp_fix

MIN_SHARED = 4


class Method(str, enum.Enum):
    GPS_FIX = "GPS_FIX"
    LS_SD = "LS_SD"
    LS_DD = "LS_DD"
    WLS_SD = "WLS_SD"
    WLS_DD = "WLS_DD"

    @property
    def is_dd(self):
        return self in (Method.LS_DD, Method.WLS_DD)

    @property
    def is_weighted(self):
        return self in (Method.WLS_SD, Method.WLS_DD)


ALL_METHODS = (Method.GPS_FIX, Method.LS_SD, Method.LS_DD, Method.WLS_SD, Method.WLS_DD)


@dataclass(frozen=True)
class SharedObsPair:
    prn: int
    pr_a: float
    pr_b: float
    cnr_a: float
    cnr_b: float
    unit: tuple


@dataclass(frozen=True)
class BaselineEstimate:
    r: tuple
    method: Method
    n_sats: int
    residual_norm: float
    clock_diff: float = None
    reference_prn: int = None

    @property
    def distance(self):
        return baseline_distance(self.r)


def filter_candidates(obs, cnr_min):
    return [o for o in obs if o.cnr >= cnr_min]


def pair_observations(obs_a, obs_b, anchor, sat_lookup, cnr_min):
    """Pair candidate observations present at both receivers, by ascending PRN.

    ``sat_lookup`` maps PRN to satellite ECEF position; lines of sight are
    taken from ``anchor``.
    """
    a = {o.prn: o for o in filter_candidates(obs_a, cnr_min)}
    b = {o.prn: o for o in filter_candidates(obs_b, cnr_min)}
    prns = sorted(a.keys() & b.keys())
    if not prns:
        return []
    units = geo.unit_vectors(anchor, np.array([sat_lookup[p] for p in prns]))
    return [
        SharedObsPair(p, a[p].pr, b[p].pr, a[p].cnr, b[p].cnr, tuple(u))
        for p, u in zip(prns, units)
    ]


def shared_satellites(epoch_a, epoch_b, cnr_min, anchor=None):
    """Shared candidate satellites of two epochs.

    Lines of sight are taken from ``epoch_a.fix`` unless ``anchor`` is given.
    """
    if epoch_a.gps_time_tag != epoch_b.gps_time_tag:
        raise TimeMismatchError(
            f"time tags differ: {epoch_a.gps_time_tag} != {epoch_b.gps_time_tag}")
    sat_lookup = {s.prn: s.pos for s in epoch_a.sats}
    origin = epoch_a.fix if anchor is None else anchor
    return pair_observations(epoch_a.obs, epoch_b.obs, origin, sat_lookup, cnr_min)


def select_reference(pairs, cnr_ref):
    """PRN with the best CNR at both receivers, or None if it misses ``cnr_ref``.

    Ranking is by the smaller of the two CNRs, then by their sum, then by
    the lower PRN.
    """
    if not pairs:
        raise DomainError("no shared satellites")
    best = max(pairs, key=lambda p: (min(p.cnr_a, p.cnr_b), p.cnr_a + p.cnr_b, -p.prn))
    if min(best.cnr_a, best.cnr_b) < cnr_ref:
        return None
    return best.prn


def single_difference(pairs):
    return np.array([p.pr_a - p.pr_b for p in pairs], dtype=np.float64)


def double_difference(sd, ref_index):
    sd = np.asarray(sd, dtype=np.float64)
    if sd.shape[0] < 2:
        raise DomainError("need at least two single differences")
    if not 0 <= ref_index < sd.shape[0]:
        raise DomainError(f"reference index {ref_index} out of range")
    return np.delete(sd, ref_index) - sd[ref_index]


def pair_weights(cnr_a, cnr_b):
    """Inverse combined code variance ``a^2 b^2 / (a^2 + b^2)`` per satellite."""
    a = np.asarray(cnr_a, dtype=np.float64)
    b = np.asarray(cnr_b, dtype=np.float64)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("CNR must be positive")
    a2 = a * a
    b2 = b * b
    return a2 * b2 / (a2 + b2)


def weight_matrix(pairs):
    return np.diag(pair_weights(np.array([p.cnr_a for p in pairs]),
                                np.array([p.cnr_b for p in pairs])))


def _solve(H, w, y, n_unknowns):
    H = np.ascontiguousarray(H, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != n_unknowns:
        raise DomainError(f"design matrix must have {n_unknowns} columns")
    if H.shape[0] != y.shape[0] or w.shape[0] != y.shape[0]:
        raise DomainError("dimension mismatch")
    if H.shape[0] < n_unknowns:
        raise SingularGeometryError(f"{H.shape[0]} equations for {n_unknowns} unknowns")
    if np.any(~(w > 0)):
        raise DomainError("weights must be positive")
    x, cond = kernels.normal_solve(H, w, y)
    if not math.isfinite(cond) or cond > kernels.COND_LIMIT:
        raise SingularGeometryError(f"normal matrix condition number {cond:.3g}")
    return x


def _diagonal(W, n):
    W = np.asarray(W, dtype=np.float64)
    w = W.copy() if W.ndim == 1 else np.diag(W).copy()
    if w.shape[0] != n:
        raise DomainError("weight matrix size mismatch")
    if W.ndim == 2 and np.any(W - np.diag(w) != 0):
        raise DomainError("weight matrix must be diagonal")
    return w


def solve_ls(H, D):
    H = np.asarray(H, dtype=np.float64)
    return _solve(H, np.ones(H.shape[0]), D, 3)


def solve_wls(H, W, D):
    """Weighted solution of ``D = H r``; ``W`` may be a diagonal matrix or its diagonal."""
    H = np.asarray(H, dtype=np.float64)
    return _solve(H, _diagonal(W, H.shape[0]), D, 3)


def solve_sd(H4, S, W=None):
    """Solve the four-unknown single-difference system; returns ``(r, clock_diff)``."""
    H4 = np.asarray(H4, dtype=np.float64)
    w = np.ones(H4.shape[0]) if W is None else _diagonal(W, H4.shape[0])
    x = _solve(H4, w, S, 4)
    return x[:3], float(x[3])


def single_point_fix(obs, sats, initial=None):
    """Standalone Gauss-Newton fix from at least four pseudoranges.

    Iterates until the position update drops below 0.1 mm or 20 iterations
    have run.  Returns ``(position, clock_bias)``.
    """
    obs = list(obs)
    if len(obs) < 4:
        raise InsufficientObservationsError(f"{len(obs)} satellites, need 4")
    table = {s.prn: s.pos for s in sats}
    state, _, status = spp_fix(obs, table, initial)
    if status == kernels.STATUS_SINGULAR:
        raise SingularGeometryError("degenerate satellite geometry")
    if status == kernels.STATUS_DIVERGED:
        raise ConvergenceError("position updates grew for 3 consecutive iterations")
    return state[:3].copy(), float(state[3])


def baseline_distance(r):
    r = np.asarray(r, dtype=np.float64)
    return math.sqrt(float(r @ r))


def estimate_baseline(pairs, method, reference_prn=None):
    """Run one difference method over shared pairs.

    Double-difference methods need ``reference_prn``; single-difference
    methods use every pair and ignore it.
    """
    method = Method(method)
    if method is Method.GPS_FIX:
        raise DomainError("GPS_FIX is computed from receiver fixes, see fix_baseline")
    if len(pairs) < MIN_SHARED:
        raise InsufficientObservationsError(f"{len(pairs)} shared satellites, need {MIN_SHARED}")
    units = np.array([p.unit for p in pairs])
    sd = single_difference(pairs)
    if method.is_dd:
        prns = [p.prn for p in pairs]
        if reference_prn not in prns:
            raise DomainError(f"reference PRN {reference_prn} not among shared satellites")
        k = prns.index(reference_prn)
        order = [k] + [i for i in range(len(pairs)) if i != k]
        H = geo.dd_geometry_matrix(units[order])
        D = double_difference(sd, k)
        others = [pairs[i] for i in order[1:]]
        if method.is_weighted:
            r = solve_wls(H, pair_weights([p.cnr_a for p in others], [p.cnr_b for p in others]), D)
        else:
            r = solve_ls(H, D)
        resid = D - H @ r
        clock = None
    else:
        H4 = geo.sd_geometry_matrix(units)
        w = pair_weights([p.cnr_a for p in pairs], [p.cnr_b for p in pairs]) if method.is_weighted else None
        r, clock = solve_sd(H4, sd, w)
        resid = sd - H4 @ np.append(r, clock)
    return BaselineEstimate(
        r=tuple(float(c) for c in r),
        method=method,
        n_sats=len(pairs),
        residual_norm=float(np.linalg.norm(resid)),
        clock_diff=clock,
        reference_prn=reference_prn if method.is_dd else None,
    )


def fix_baseline(epoch_a, epoch_b):
    """The GPS-fix comparison: difference of the two reported fixes."""
    r = np.array(epoch_b.fix) - np.array(epoch_a.fix)
    return BaselineEstimate(tuple(float(c) for c in r), Method.GPS_FIX,
                            n_sats=min(len(epoch_a.obs), len(epoch_b.obs)),
                            residual_norm=0.0)
