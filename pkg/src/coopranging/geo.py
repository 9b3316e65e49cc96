"""ECEF geometry: geodetic conversion, lines of sight and design matrices.

Points, unit vectors and baselines are plain ``float64`` arrays of shape
``(3,)``; lists of them are stacked into ``(n, 3)`` arrays.
"""

import math

import numpy as np

from . import kernels
from .errors import DegenerateGeometryError, DomainError

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

RECEIVER_RADIUS_RANGE = (6.2e6, 6.6e6)
SATELLITE_RADIUS_RANGE = (2.0e7, 3.0e7)
MIN_LINE_OF_SIGHT = 1e6


def as_point(p):
    """Coerce ``p`` to a finite 3-vector."""
    a = np.asarray(p, dtype=np.float64)
    if a.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("non-finite coordinate")
    return a


def _check_radius(p, bounds, what):
    a = as_point(p)
    r = float(np.linalg.norm(a))
    if not bounds[0] <= r <= bounds[1]:
        raise DomainError(f"{what} radius {r:.1f} m outside [{bounds[0]:g}, {bounds[1]:g}]")
    return a


def check_receiver_position(p):
    return _check_radius(p, RECEIVER_RADIUS_RANGE, "receiver")


def check_satellite_position(p):
    return _check_radius(p, SATELLITE_RADIUS_RANGE, "satellite")


def ecef_from_geodetic(lat, lon, alt):
    """WGS-84 geodetic (degrees, degrees, meters) to ECEF meters."""
    if not -90.0 <= lat <= 90.0:
        raise DomainError(f"latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise DomainError(f"longitude {lon} outside [-180, 180]")
    phi = math.radians(lat)
    lam = math.radians(lon)
    s = math.sin(phi)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * s * s)
    return np.array([
        (n + alt) * math.cos(phi) * math.cos(lam),
        (n + alt) * math.cos(phi) * math.sin(lam),
        (n * (1.0 - WGS84_E2) + alt) * s,
    ])


def enu_basis(lat, lon):
    """Rows are the local east, north and up unit vectors in ECEF."""
    phi = math.radians(lat)
    lam = math.radians(lon)
    sp, cp = math.sin(phi), math.cos(phi)
    sl, cl = math.sin(lam), math.cos(lam)
    return np.array([
        [-sl, cl, 0.0],
        [-sp * cl, -sp * sl, cp],
        [cp * cl, cp * sl, sp],
    ])


def unit_vector_to_satellite(rx_fix, sat):
    rx = as_point(rx_fix)
    s = as_point(sat)
    d = s - rx
    r = math.sqrt(float(d @ d))
    if r <= MIN_LINE_OF_SIGHT:
        raise DegenerateGeometryError(f"receiver-satellite separation {r:.1f} m too small")
    return d / r


def unit_vectors(rx_fix, sats):
    """Lines of sight from one receiver to each row of ``sats``."""
    rx = as_point(rx_fix)
    s = np.ascontiguousarray(sats, dtype=np.float64).reshape(-1, 3)
    d = s - rx
    if np.any(np.einsum("ij,ij->i", d, d) <= MIN_LINE_OF_SIGHT ** 2):
        raise DegenerateGeometryError("receiver-satellite separation too small")
    return kernels.unit_vectors(rx, s)


def dd_geometry_matrix(units):
    """Rows ``e_i - e_0`` for a stack of unit vectors with the reference first."""
    u = np.asarray(units, dtype=np.float64).reshape(-1, 3)
    if u.shape[0] < 2:
        raise DomainError("need the reference plus at least one satellite")
    return u[1:] - u[0]


def sd_geometry_matrix(units):
    """Rows ``(e_x, e_y, e_z, 1)``; the last column carries the clock difference in meters."""
    u = np.asarray(units, dtype=np.float64).reshape(-1, 3)
    return np.hstack([u, np.ones((u.shape[0], 1))])
