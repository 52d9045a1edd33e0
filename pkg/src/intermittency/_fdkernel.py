"""Compiled inner loop of the finite-difference oracle.

Semi-implicit Euler on a periodic grid:

    (1 + 2r) u_i' - r (u_{i-1}' + u_{i+1}') = u_i (1 + sigma xi_i),   r = dt / (2 dx^2),

with Rademacher xi and sigma = sqrt(dt / dx).  The cyclic tridiagonal
system is solved by the Thomas algorithm plus a Sherman-Morrison
correction.  Random bits come from a counter-based splitmix64 hash of
(path key, step, site chunk), so a path's trajectory does not depend on
which block or thread runs it.
"""

import numba as nb
import numpy as np


def cyclic_setup(n: int, r: float):
    """Factorization data for the cyclic matrix (1+2r) I - r (S + S^T)."""
    a, b, c = -r, 1.0 + 2.0 * r, -r
    gam = -b
    diag = np.full(n, b)
    diag[0] = b - gam
    diag[-1] = b - a * c / gam
    cp = np.zeros(n)
    denom = np.zeros(n)
    denom[0] = diag[0]
    cp[0] = c / denom[0]
    for i in range(1, n):
        denom[i] = diag[i] - a * cp[i - 1]
        cp[i] = c / denom[i] if i < n - 1 else 0.0

    def solve(rhs):
        d = rhs.copy()
        d[0] /= denom[0]
        for i in range(1, n):
            d[i] = (d[i] - a * d[i - 1]) / denom[i]
        for i in range(n - 2, -1, -1):
            d[i] -= cp[i] * d[i + 1]
        return d

    u = np.zeros(n)
    u[0], u[-1] = gam, c
    z = solve(u)
    vfac = a / gam
    z = z / (1.0 + z[0] + vfac * z[-1])
    return cp, denom, z, vfac


@nb.njit(cache=True, nogil=True)
def run_paths(keys, n_sites, n_steps, r, sigma, cp, denom, zvec, vfac, probe):
    """Advance len(keys) independent paths from u = 1 and return u at site ``probe``."""
    P = keys.shape[0]
    u = np.ones((n_sites, P))
    dot = np.empty(P)
    bits = np.empty(P, dtype=np.uint64)
    m1 = np.uint64(0xBF58476D1CE4E5B9)
    m2 = np.uint64(0x94D049BB133111EB)
    golden = np.uint64(0x9E3779B97F4A7C15)
    lo = 1.0 - sigma
    span = 2.0 * sigma
    nchunk = (n_sites + 63) // 64
    for step in range(n_steps):
        base = np.uint64(step) * np.uint64(nchunk)
        # forward sweep with the noisy right-hand side folded in
        for i in range(n_sites):
            if i % 64 == 0:
                ctr = (base + np.uint64(i // 64) + np.uint64(1)) * golden
                for q in range(P):
                    z = keys[q] ^ ctr
                    z = (z ^ (z >> np.uint64(30))) * m1
                    z = (z ^ (z >> np.uint64(27))) * m2
                    bits[q] = z ^ (z >> np.uint64(31))
            sh = np.uint64(i % 64)
            di = 1.0 / denom[i]
            for q in range(P):
                f = lo + span * np.float64((bits[q] >> sh) & np.uint64(1))
                v = u[i, q] * f
                if i > 0:
                    v = v + r * u[i - 1, q]
                u[i, q] = v * di
        for i in range(n_sites - 2, -1, -1):
            c = cp[i]
            for q in range(P):
                u[i, q] = u[i, q] - c * u[i + 1, q]
        for q in range(P):
            dot[q] = u[0, q] + vfac * u[n_sites - 1, q]
        for i in range(n_sites):
            zi = zvec[i]
            for q in range(P):
                u[i, q] = u[i, q] - dot[q] * zi
    return u[probe].copy()
