"""Slab-symmetric compressible Euler: everything depends on one coordinate ``y``.

Unknowns are ``rho``, ``rho v`` (along ``y``) and ``rho w`` (the ``n - 1``
transverse velocity components, which are only advected). Pressure is
``rho^2 / 2``, the shallow-water law with unit gravity.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..fieldlab.functionals import FunctionalSeries
from ..fieldlab.manufactured import Bump, ScalarField
from . import scheme
from .scheme import BoundaryError, Layout, VacuumError


def bump_profile(y, center=0.0, radius=1.0):
    """Unit-peak smooth bump ``e * exp(1/(s^2 - 1))`` on a 1D grid."""
    f = ScalarField((Bump((center,), radius, 1.0),))
    return f(np.asarray(y, dtype=float)[..., None])


@dataclass(frozen=True)
class SlabInit:
    """``rho = 1 + eps*rho_amp*phi``, ``v = eps*vel_amp*y*phi``, ``w = eps*w_amp*phi``.

    ``phi`` is the unit bump of radius ``support`` at the origin. With
    ``simple_wave=True`` the velocity is instead ``2 sqrt(rho) - 2``, a
    right-going simple wave whose lifespan is set by the steepest compressive
    slope of ``rho``.
    """

    eps: float
    rho_amp: float = -0.5
    vel_amp: float = 5.0
    w_amp: float = 0.0
    support: float = 1.0
    simple_wave: bool = False

    def validate(self):
        if not self.eps >= 0:
            raise ValueError("eps must be non-negative")
        if self.simple_wave:
            if not self.rho_amp >= 0 or self.eps * self.rho_amp > 1.0:
                raise ValueError("simple-wave data needs 0 <= eps*rho_amp <= 1")
        elif self.rho_amp > 0:
            raise ValueError("rho_amp must be <= 0 (density dip)")
        if 1.0 + self.eps * min(self.rho_amp, 0.0) <= 0.5:
            raise VacuumError(f"initial density 1 + eps*rho_amp = {1 + self.eps * self.rho_amp:.6g} is below 1/2 (vacuum risk)")
        if not self.simple_wave and self.eps > 0 and not self.positivity() > 0:
            raise ValueError("blow-up functional of the initial data is not positive")
        return self

    def primitives(self, y, transverse):
        phi = bump_profile(y, 0.0, self.support)
        rho = 1.0 + self.eps * self.rho_amp * phi
        if self.simple_wave:
            v = 2.0 * np.sqrt(rho) - 2.0
        else:
            v = self.eps * self.vel_amp * y * phi
        w = np.repeat((self.eps * self.w_amp * phi)[None], transverse, axis=0)
        return rho, v, w

    def positivity(self, cells=4096):
        """Blow-up functional ``int (e^y + e^-y) rho0 + int (e^y - e^-y)(1 + rho0) v0``."""
        R = self.support
        h = 2.0 * R / cells
        y = -R + h * (np.arange(cells) + 0.5)
        rho, v, _ = self.primitives(y, 0)
        ep, em = np.exp(y), np.exp(-y)
        return float(np.sum((ep + em) * (rho - 1.0) + (ep - em) * rho * v) * h)


@dataclass
class SimOutput:
    series: FunctionalSeries
    shock_time: float  # gradient-threshold time, or inf when not reached
    t_final: float
    grid: dict
    state: np.ndarray
    params: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)


class SlabGrid:
    def __init__(self, cells, half_length):
        self.cells = int(cells)
        self.L = float(half_length)
        self.h = 2.0 * self.L / self.cells
        self.y = -self.L + self.h * (np.arange(self.cells) + 0.5)
        ep, em = np.exp(self.y), np.exp(-self.y)
        self.wX = ep + em
        self.wY = ep - em

    def describe(self):
        return {"cells": self.cells, "half_length": self.L, "spacing": self.h}


def slab_state(rho, v, w):
    lay = Layout(1, w.shape[0])
    W = np.vstack([rho[None], v[None], w])
    return scheme.to_conserved(W, lay), lay


def slab_functionals(U, grid):
    X = float(np.sum(grid.wX * (U[0] - 1.0)) * grid.h)
    Y = float(np.sum(grid.wY * U[1]) * grid.h)
    return X, Y


def max_gradient(U, h):
    rho = U[0]
    v = U[1] / rho
    return float(np.max(np.abs(np.diff(v))) / h), float(np.max(np.abs(np.diff(rho))) / h)


def total_variation(a):
    return float(np.sum(np.abs(np.diff(a))))


def support_radius(U, ambient, y, tol=1e-12):
    dev = np.max(np.abs(U - ambient[:, None]), axis=0)
    idx = np.nonzero(dev > tol)[0]
    if idx.size == 0:
        return 0.0
    return float(max(abs(y[idx[0]]), abs(y[idx[-1]])))


def evolve(U, lay, grid, t_max, samples=400, cfl=0.4, shock_factor=None, check_boundary=True,
           stop_at_shock=False, snapshot_times=(), record=None):
    """Advance ``U`` to ``t_max`` sampling functionals at ``samples`` equally spaced times."""
    ambient = np.zeros(lay.nvars)
    ambient[0] = 1.0
    series = FunctionalSeries()
    g0v, g0r = max_gradient(U, grid.h)
    X, Y = slab_functionals(U, grid)
    mass0 = float(np.sum(U[0]))
    tv0 = total_variation(U[0])
    series.append(0.0, X, Y, maxgrad=g0v, maxgrad_rho=g0r, mass=mass0, tv=tv0,
                  support=support_radius(U, ambient, grid.y))
    out_times = np.linspace(0.0, t_max, samples + 1)[1:]
    snaps = sorted(snapshot_times)
    snapshots = []
    t = 0.0
    shock_time = math.inf
    k = 0
    while k < len(out_times):
        target = out_times[k]
        if snaps and snaps[0] < target:
            target = snaps[0]
        dt = scheme.stable_dt(U, lay, grid.h, cfl)
        hit = t + dt >= target * (1.0 - 1e-14)
        if hit:
            dt = target - t
        U = scheme.ssp_rk2(U, lay, grid.h, dt)
        t = target if hit else t + dt
        if check_boundary:
            edge = np.max(np.abs(U[:, [0, 1, 2, -3, -2, -1]] - ambient[:, None]))
            if edge > 1e-12:
                raise BoundaryError(f"disturbance reached the domain edge at t={t:.4g}")
        if record is not None:
            record(t, U)
        if not hit:
            continue
        if snaps and t == snaps[0]:
            snapshots.append((t, U.copy()))
            snaps.pop(0)
            if t < out_times[k]:
                continue
        gv, gr = max_gradient(U, grid.h)
        X, Y = slab_functionals(U, grid)
        series.append(t, X, Y, maxgrad=gv, maxgrad_rho=gr, mass=float(np.sum(U[0])),
                      tv=total_variation(U[0]), support=support_radius(U, ambient, grid.y))
        if shock_factor is not None and math.isinf(shock_time) and g0v > 0 and gv > shock_factor * g0v:
            shock_time = t
            if stop_at_shock:
                break
        k += 1
    return U, series, shock_time, t, snapshots


PRECURSOR_CELLS = 48


def pad_for_precursor(reach, cells):
    """Half-length whose outermost ``PRECURSOR_CELLS`` cells lie beyond ``reach``."""
    if cells <= 4 * PRECURSOR_CELLS:
        return 2.0 * reach
    return reach * cells / (cells - 2 * PRECURSOR_CELLS)


def default_half_length(init, t_max, cells=None, safety=1.5):
    rho, v, _ = init.primitives(np.linspace(-init.support, init.support, 2001), 0)
    c_max = float(np.max(np.abs(v) + np.sqrt(rho)))
    reach = init.support + safety * c_max * t_max + 0.25
    return reach if cells is None else pad_for_precursor(reach, cells)


def run_slab_euler(init, n=1, cells=4096, t_max=1.0, half_length=None, samples=400, cfl=0.4,
                   shock_factor=20.0, stop_at_shock=False, snapshot_times=()):
    """Evolve slab data and record ``X``, ``Y`` and gradient diagnostics.

    ``n`` is the effective dimension; the ``n - 1`` transverse momenta are
    advected passively. The domain is ``[-half_length, half_length]`` and must
    contain the disturbance for the whole run.
    """
    init.validate()
    if n not in (1, 2, 3):
        raise ValueError("n must be 1..3")
    L = default_half_length(init, t_max, cells) if half_length is None else float(half_length)
    grid = SlabGrid(cells, L)
    rho, v, w = init.primitives(grid.y, n - 1)
    U, lay = slab_state(rho, v, w)
    U, series, shock, t, snaps = evolve(U, lay, grid, t_max, samples, cfl, shock_factor,
                                        True, stop_at_shock, snapshot_times)
    params = {"eps": init.eps, "rho_amp": init.rho_amp, "vel_amp": init.vel_amp, "w_amp": init.w_amp,
              "support": init.support, "simple_wave": init.simple_wave, "n": n, "cfl": cfl,
              "t_max": t_max, "scheme": "MUSCL-minmod/Rusanov/SSP-RK2"}
    return SimOutput(series, shock, t, grid.describe(), U, params, snaps)


def dam_break_exact(y, t, h_left=2.0, h_right=1.0):
    """Exact density of the ``p = rho^2/2`` (shallow water, g = 1) dam break at rest."""
    cl, cr = math.sqrt(h_left), math.sqrt(h_right)

    def mismatch(hs):
        u_raref = 2.0 * (cl - math.sqrt(hs))
        u_shock = (hs - h_right) * math.sqrt(0.5 * (hs + h_right) / (hs * h_right))
        return u_raref - u_shock

    hs = brentq(mismatch, h_right, h_left, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    us = 2.0 * (cl - math.sqrt(hs))
    s = hs * us / (hs - h_right)
    xi = np.asarray(y, dtype=float) / t
    out = np.full(xi.shape, h_right)
    out[xi < s] = hs
    fan = (xi >= -cl) & (xi < us - math.sqrt(hs))
    out[fan] = (2.0 * cl - xi[fan]) ** 2 / 9.0
    out[xi < -cl] = h_left
    return out


def run_dam_break(cells=4096, t=0.5, half_length=2.0, cfl=0.4):
    """Dam break on ``[-half_length, half_length]``; returns ``(y, rho, exact, relative L1 error)``."""
    grid = SlabGrid(cells, half_length)
    rho = np.where(grid.y < 0.0, 2.0, 1.0)
    U, lay = slab_state(rho, np.zeros(cells), np.zeros((0, cells)))
    U, *_ = evolve(U, lay, grid, t, samples=1, cfl=cfl, check_boundary=False)
    exact = dam_break_exact(grid.y, t)
    err = np.sum(np.abs(U[0] - exact)) / np.sum(np.abs(exact - 1.0))
    return grid.y, U[0], exact, float(err)
