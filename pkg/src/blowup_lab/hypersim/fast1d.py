"""Compiled single-step kernel for the 1D ``(rho, rho v)`` system.

Same scheme as :mod:`.scheme` (primitive minmod MUSCL, Rusanov, SSP-RK2,
zero-gradient ghosts) specialised to two unknowns, for the long runs of the
shock-lifespan experiment.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    return a if abs(a) < abs(b) else b


@njit(cache=True)
def _rhs(rho, m, h, v, sr, sv, dr, dm):
    n = rho.shape[0]
    for i in range(n):
        v[i] = m[i] / rho[i]
    # edge cells see a constant ghost neighbour, so their limited slope is zero
    sr[0] = 0.0
    sv[0] = 0.0
    sr[n - 1] = 0.0
    sv[n - 1] = 0.0
    for i in range(1, n - 1):
        sr[i] = _minmod(rho[i] - rho[i - 1], rho[i + 1] - rho[i])
        sv[i] = _minmod(v[i] - v[i - 1], v[i + 1] - v[i])
    fr_prev = 0.0
    fm_prev = 0.0
    for f in range(n + 1):  # face between cells f-1 and f
        if f == 0:
            rl = rho[0]
            vl = v[0]
        else:
            rl = rho[f - 1] + 0.5 * sr[f - 1]
            vl = v[f - 1] + 0.5 * sv[f - 1]
        if f == n:
            rr = rho[n - 1]
            vr = v[n - 1]
        else:
            rr = rho[f] - 0.5 * sr[f]
            vr = v[f] - 0.5 * sv[f]
        ml = rl * vl
        mr = rr * vr
        a = max(abs(vl) + np.sqrt(rl), abs(vr) + np.sqrt(rr))
        fr = 0.5 * (ml + mr) - 0.5 * a * (rr - rl)
        fm = 0.5 * (ml * vl + 0.5 * (rl * rl) + mr * vr + 0.5 * (rr * rr)) - 0.5 * a * (mr - ml)
        if f > 0:
            dr[f - 1] = -(fr - fr_prev) / h
            dm[f - 1] = -(fm - fm_prev) / h
        fr_prev = fr
        fm_prev = fm


@njit(cache=True)
def step(rho, m, h, cfl):
    """One SSP-RK2 step in place; returns ``dt`` (or ``-1`` on vacuum)."""
    n = rho.shape[0]
    smax = 0.0
    for i in range(n):
        if not rho[i] > 0.0:
            return -1.0
        s = abs(m[i] / rho[i]) + np.sqrt(rho[i])
        if s > smax:
            smax = s
    dt = cfl * h / smax
    v = np.empty(n)
    sr = np.empty(n)
    sv = np.empty(n)
    dr = np.empty(n)
    dm = np.empty(n)
    _rhs(rho, m, h, v, sr, sv, dr, dm)
    r1 = rho + dt * dr
    m1 = m + dt * dm
    for i in range(n):
        if not r1[i] > 0.0:
            return -1.0
    _rhs(r1, m1, h, v, sr, sv, dr, dm)
    for i in range(n):
        rho[i] = 0.5 * rho[i] + 0.5 * (r1[i] + dt * dr[i])
        m[i] = 0.5 * m[i] + 0.5 * (m1[i] + dt * dm[i])
    return dt


@njit(cache=True)
def gradient_diagnostics(rho, m, h):
    """``(max |dv/dy|, total variation of dv/dy)``."""
    n = rho.shape[0]
    gmax = 0.0
    tv = 0.0
    prev = 0.0
    for i in range(n - 1):
        g = (m[i + 1] / rho[i + 1] - m[i] / rho[i]) / h
        if abs(g) > gmax:
            gmax = abs(g)
        if i > 0:
            tv += abs(g - prev)
        prev = g
    return gmax, tv
