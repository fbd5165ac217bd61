"""Compiled inner loops for the grid search."""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def grid_errors(D, rho, n0_max):
    """Error of every (z, n0) pair on a grid.

    ``rho[iz, j-1]`` is the tail step ``C_{j+1}/C_j`` at grid point ``iz``.
    Returns ``E[iz, n0-1]`` for n0 = 1..n0_max.  The innermost loops run
    over n0 so they vectorise; per n0 the sums are still taken in class order.
    """
    nz = rho.shape[0]
    m = D.shape[0]
    E = np.empty((nz, n0_max))
    Q = np.empty((m, n0_max))
    inv = np.empty(n0_max)
    acc = np.empty(n0_max)
    for iz in range(nz):
        r = rho[iz]
        for k in range(n0_max):
            Q[0, k] = 1.0
            inv[k] = 1.0
        for i in range(1, m):
            for k in range(n0_max):
                Q[i, k] = Q[i - 1, k] * r[k + i - 1]
                inv[k] += Q[i, k]
        for k in range(n0_max):
            inv[k] = 1.0 / inv[k]
            acc[k] = 0.0
        for i in range(m):
            d0 = D[i]
            for k in range(n0_max):
                d = d0 - Q[i, k] * inv[k]
                acc[k] += d * d
        for k in range(n0_max):
            E[iz, k] = math.sqrt(acc[k])
    return E


@numba.njit(cache=True)
def select_n0_rows(E, accuracy):
    """Apply the optimal-n0 rule to every row of ``E``.

    Per row: the largest n0 at or below the first argmin whose step
    ``|E(n0-1) - E(n0)|`` exceeds ``accuracy``; 1 if none does.
    Returns (n0 per row, error at that n0).
    """
    nz, n = E.shape
    n0 = np.empty(nz, dtype=np.int64)
    err = np.empty(nz)
    for iz in range(nz):
        best = 0
        for k in range(1, n):
            if E[iz, k] < E[iz, best]:
                best = k
        chosen = 0
        for k in range(best, 0, -1):
            if abs(E[iz, k - 1] - E[iz, k]) > accuracy:
                chosen = k
                break
        n0[iz] = chosen + 1
        err[iz] = E[iz, chosen]
    return n0, err
