"""Planar MHD with a vertical magnetic field ``(0, 0, b)``, and plain 2D Euler.

The field magnitude obeys ``b_t + div(b u) = 0`` so ``b/rho`` is carried by
the flow; the total pressure is ``(rho^2 + b^2)/2``. Dropping ``b`` gives
2D isentropic Euler through the same code path.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import weightfn
from ..fieldlab.functionals import FunctionalSeries
from ..fieldlab.manufactured import Bump, ScalarField
from . import scheme
from .scheme import BoundaryError, Layout, VacuumError
from .slab import SimOutput, pad_for_precursor


@dataclass(frozen=True)
class Mhd2dInit:
    """``rho = 1 + eps*rho_amp*phi``, ``u = eps*vel_amp*x*phi``, ``b = b0 + eps*h_amp*phi``.

    With ``locked=True`` the field is instead ``b = b0 * rho`` so that
    ``b/rho`` is exactly uniform.
    """

    eps: float
    b0: float = 1.0
    rho_amp: float = -0.5
    vel_amp: float = 8.0
    h_amp: float = 0.5
    support: float = 1.0
    locked: bool = False

    @property
    def a2(self):
        return 1.0 + self.b0 * self.b0

    def validate(self):
        if not self.eps >= 0 or not self.b0 >= 0:
            raise ValueError("eps and b0 must be non-negative")
        if self.rho_amp > 0 or self.h_amp < 0:
            raise ValueError("need rho_amp <= 0 and h_amp >= 0")
        if 1.0 + self.eps * self.rho_amp <= 0.5:
            raise VacuumError(f"initial density 1 + eps*rho_amp = {1 + self.eps * self.rho_amp:.6g} is below 1/2 (vacuum risk)")
        if not self.locked and self.eps > 0 and not self.positivity() > 0:
            raise ValueError("blow-up functional of the initial data is not positive")
        return self

    def fields(self, x):
        phi = ScalarField((Bump((0.0, 0.0), self.support, 1.0),))(x)
        rho = 1.0 + self.eps * self.rho_amp * phi
        u = self.eps * self.vel_amp * np.moveaxis(x, -1, 0) * phi
        b = self.b0 * rho if self.locked else self.b0 + self.eps * self.h_amp * phi
        return rho, u, b

    def positivity(self, cells=256):
        """``a * int F (rho0 - 1) + int rho0 u0 . grad F`` with ``a = sqrt(1 + b0^2)``."""
        R = self.support
        h = 2.0 * R / cells
        ax = -R + h * (np.arange(cells) + 0.5)
        x = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
        rho, u, _ = self.fields(x)
        F = weightfn.eval_F(2, np.linalg.norm(x, axis=-1))
        G = np.moveaxis(weightfn.moment(2, x, 1).components, -1, 0)
        return float((math.sqrt(self.a2) * np.sum(F * (rho - 1.0)) + np.sum(rho * u * G)) * h * h)


class PlaneGrid:
    def __init__(self, cells, half_length):
        self.cells = int(cells)
        self.L = float(half_length)
        self.h = 2.0 * self.L / self.cells
        ax = -self.L + self.h * (np.arange(self.cells) + 0.5)
        self.x = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
        r = np.linalg.norm(self.x, axis=-1)
        self.F = weightfn.eval_F(2, r)
        self.G = np.moveaxis(weightfn.moment(2, self.x, 1).components, -1, 0)

    def describe(self):
        return {"cells": [self.cells, self.cells], "half_length": self.L, "spacing": self.h}


def _diagnostics(U, grid, magnetic):
    rho = U[0]
    dA = grid.h * grid.h
    X = float(np.sum(grid.F * (rho - 1.0)) * dA)
    Y = float(np.sum(grid.G * U[1:3]) * dA)
    u = U[1:3] / rho
    gx = np.max(np.abs(np.diff(u, axis=1)))
    gy = np.max(np.abs(np.diff(u, axis=2)))
    aux = {"maxgrad": float(max(gx, gy)) / grid.h, "mass": float(np.sum(rho))}
    if magnetic:
        k = U[3] / rho
        aux.update(min_b_over_rho=float(np.min(k)), max_b_over_rho=float(np.max(k)),
                   total_b=float(np.sum(U[3])))
    return X, Y, aux


def _run(U, lay, grid, t_max, samples, cfl, shock_factor, snapshot_times):
    ambient = U[:, 0, 0].copy()
    series = FunctionalSeries()
    X, Y, aux = _diagnostics(U, grid, lay.magnetic)
    g0 = aux["maxgrad"]
    series.append(0.0, X, Y, **aux)
    out_times = np.linspace(0.0, t_max, samples + 1)[1:]
    snaps = sorted(snapshot_times)
    snapshots = []
    t = 0.0
    shock = math.inf
    for target in out_times:
        while t < target:
            dt = scheme.stable_dt(U, lay, grid.h, cfl)
            hit = t + dt >= target * (1.0 - 1e-14)
            if hit:
                dt = target - t
            U = scheme.ssp_rk2(U, lay, grid.h, dt)
            t = target if hit else t + dt
            rim = np.concatenate([U[:, :3, :].ravel() - np.repeat(ambient, 3 * grid.cells),
                                  U[:, -3:, :].ravel() - np.repeat(ambient, 3 * grid.cells),
                                  (U[:, :, :3] - ambient[:, None, None]).ravel(),
                                  (U[:, :, -3:] - ambient[:, None, None]).ravel()])
            if np.max(np.abs(rim)) > 1e-12:
                raise BoundaryError(f"disturbance reached the domain edge at t={t:.4g}")
        while snaps and snaps[0] <= t:
            snapshots.append((snaps.pop(0), U.copy()))
        X, Y, aux = _diagnostics(U, grid, lay.magnetic)
        series.append(t, X, Y, **aux)
        if shock_factor and math.isinf(shock) and g0 > 0 and aux["maxgrad"] > shock_factor * g0:
            shock = t
    return U, series, shock, t, snapshots


def default_half_length(init, t_max, cells, safety=1.5):
    """Physical reach plus room for the ~1e-12 numerical precursor (a few dozen cells)."""
    rho_min = 1.0 + init.eps * init.rho_amp
    c_max = math.sqrt(rho_min + (init.b0 + init.eps * init.h_amp) ** 2 / rho_min) + init.eps * init.vel_amp
    return pad_for_precursor(init.support + safety * c_max * t_max + 0.25, cells)


def _setup(init, cells, t_max, half_length, magnetic):
    init.validate()
    L = default_half_length(init, t_max, cells) if half_length is None else float(half_length)
    grid = PlaneGrid(cells, L)
    rho, u, b = init.fields(grid.x)
    lay = Layout(2, 1 if magnetic else 0, magnetic)
    W = [rho, u[0], u[1]]
    if magnetic:
        W.append(b / rho)
    return scheme.to_conserved(np.stack(W), lay), lay, grid


def run_mhd2d(init, cells=256, t_max=0.5, half_length=None, samples=200, cfl=0.4, shock_factor=20.0,
              snapshot_times=()):
    U, lay, grid = _setup(init, cells, t_max, half_length, True)
    U, series, shock, t, snaps = _run(U, lay, grid, t_max, samples, cfl, shock_factor, snapshot_times)
    params = {"eps": init.eps, "b0": init.b0, "rho_amp": init.rho_amp, "vel_amp": init.vel_amp,
              "h_amp": init.h_amp, "support": init.support, "locked": init.locked, "cfl": cfl,
              "t_max": t_max, "scheme": "MUSCL-minmod/Rusanov/SSP-RK2", "system": "mhd2d"}
    return SimOutput(series, shock, t, grid.describe(), U, params, snaps)


def run_euler2d(init, cells=256, t_max=0.5, half_length=None, samples=200, cfl=0.4, shock_factor=20.0,
                snapshot_times=()):
    """2D isentropic Euler from the density and velocity of ``init`` (its field is ignored)."""
    U, lay, grid = _setup(init, cells, t_max, half_length, False)
    U, series, shock, t, snaps = _run(U, lay, grid, t_max, samples, cfl, shock_factor, snapshot_times)
    params = {"eps": init.eps, "rho_amp": init.rho_amp, "vel_amp": init.vel_amp, "support": init.support,
              "cfl": cfl, "t_max": t_max, "scheme": "MUSCL-minmod/Rusanov/SSP-RK2", "system": "euler2d"}
    return SimOutput(series, shock, t, grid.describe(), U, params, snaps)
