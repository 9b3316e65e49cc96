"""Hot numeric kernels with a numba path and a pure-numpy path.

Both paths are always importable (the numba path only when numba is
installed); ``BACKEND`` names the one bound to the public names.  Set
``COOPRANGING_DISABLE_NUMBA=1`` before import to force the numpy path.

Kernels report failure through integer status codes rather than raising,
so the jitted and interpreted variants behave identically.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

COND_LIMIT = 1e12

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_DIVERGED = 2
STATUS_MAX_ITER = 3

_DISABLE_FLAG = "COOPRANGING_DISABLE_NUMBA"


def _numba_requested():
    value = os.environ.get(_DISABLE_FLAG, "").strip().lower()
    return value in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------

def unit_vectors_numpy(origin, targets):
    d = targets - origin
    return d / np.sqrt(np.einsum("ij,ij->i", d, d))[:, None]


def normal_solve_numpy(H, w, y):
    """Solve ``(H^T W H) x = H^T W y`` with ``W = diag(w)``.

    Returns ``(x, cond)``; ``x`` is all-NaN when the normal matrix is
    singular or ``cond`` exceeds ``COND_LIMIT``.
    """
    Hw = H * w[:, None]
    A = H.T @ Hw
    b = Hw.T @ y
    ev = np.linalg.eigvalsh(A)
    if not ev[0] > 0.0:
        return np.full(H.shape[1], np.nan), math.inf
    cond = ev[-1] / ev[0]
    if cond > COND_LIMIT:
        return np.full(H.shape[1], np.nan), cond
    return np.linalg.solve(A, b), cond


def gauss_newton_fix_numpy(sat_pos, pr, x0, tol, max_iter):
    """Iterate the four-unknown pseudorange equations from ``x0``.

    ``x0`` and the returned state are ``(x, y, z, clock_bias)`` in meters.
    Returns ``(state, iterations, status)``.
    """
    x = x0.astype(np.float64).copy()
    n = sat_pos.shape[0]
    G = np.empty((n, 4))
    G[:, 3] = 1.0
    w = np.ones(n)
    prev_step = math.inf
    growing = 0
    for it in range(1, max_iter + 1):
        d = sat_pos - x[:3]
        rho = np.sqrt(np.einsum("ij,ij->i", d, d))
        G[:, :3] = -d / rho[:, None]
        dx, cond = normal_solve_numpy(G, w, pr - (rho + x[3]))
        if not math.isfinite(cond) or cond > COND_LIMIT:
            return x, it, STATUS_SINGULAR
        x += dx
        step = math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2)
        if step < tol:
            return x, it, STATUS_OK
        growing = growing + 1 if step > prev_step else 0
        if growing >= 3:
            return x, it, STATUS_DIVERGED
        prev_step = step
    return x, max_iter, STATUS_MAX_ITER


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def unit_vectors_numba(origin, targets):
        n = targets.shape[0]
        out = np.empty((n, 3))
        for i in range(n):
            dx = targets[i, 0] - origin[0]
            dy = targets[i, 1] - origin[1]
            dz = targets[i, 2] - origin[2]
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            out[i, 0] = dx / r
            out[i, 1] = dy / r
            out[i, 2] = dz / r
        return out

    @numba.njit(cache=True)
    def normal_solve_numba(H, w, y):
        n, m = H.shape
        A = np.zeros((m, m))
        b = np.zeros(m)
        for k in range(n):
            wk = w[k]
            for i in range(m):
                hi = H[k, i] * wk
                b[i] += hi * y[k]
                for j in range(i, m):
                    A[i, j] += hi * H[k, j]
        for i in range(m):
            for j in range(i):
                A[i, j] = A[j, i]
        ev = np.linalg.eigvalsh(A)
        if not ev[0] > 0.0:
            return np.full(m, np.nan), np.inf
        cond = ev[m - 1] / ev[0]
        if cond > COND_LIMIT:
            return np.full(m, np.nan), cond
        return np.linalg.solve(A, b), cond

    @numba.njit(cache=True)
    def gauss_newton_fix_numba(sat_pos, pr, x0, tol, max_iter):
        x = x0.astype(np.float64).copy()
        n = sat_pos.shape[0]
        G = np.empty((n, 4))
        res = np.empty(n)
        w = np.ones(n)
        prev_step = np.inf
        growing = 0
        for it in range(1, max_iter + 1):
            for i in range(n):
                dx = sat_pos[i, 0] - x[0]
                dy = sat_pos[i, 1] - x[1]
                dz = sat_pos[i, 2] - x[2]
                rho = math.sqrt(dx * dx + dy * dy + dz * dz)
                G[i, 0] = -dx / rho
                G[i, 1] = -dy / rho
                G[i, 2] = -dz / rho
                G[i, 3] = 1.0
                res[i] = pr[i] - (rho + x[3])
            delta, cond = normal_solve_numba(G, w, res)
            if not math.isfinite(cond) or cond > COND_LIMIT:
                return x, it, STATUS_SINGULAR
            for k in range(4):
                x[k] += delta[k]
            step = math.sqrt(delta[0] ** 2 + delta[1] ** 2 + delta[2] ** 2)
            if step < tol:
                return x, it, STATUS_OK
            if step > prev_step:
                growing += 1
            else:
                growing = 0
            if growing >= 3:
                return x, it, STATUS_DIVERGED
            prev_step = step
        return x, max_iter, STATUS_MAX_ITER


if numba is not None and _numba_requested():
    BACKEND = "numba"
    unit_vectors = unit_vectors_numba
    normal_solve = normal_solve_numba
    gauss_newton_fix = gauss_newton_fix_numba
else:
    BACKEND = "numpy"
    unit_vectors = unit_vectors_numpy
    normal_solve = normal_solve_numpy
    gauss_newton_fix = gauss_newton_fix_numpy
