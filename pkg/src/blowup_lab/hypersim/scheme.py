"""Second-order finite-volume kernel for isentropic (magneto)gas dynamics.

Conserved variables are ``(rho, rho*u_1..rho*u_d, rho*q_1..rho*q_p)`` where the
``q`` are specific scalars carried with the flow. With ``magnetic=True`` the
first passive is ``kappa = b/rho`` and adds ``b^2/2`` to the pressure
``rho^2/2``. Reconstruction acts on the primitives ``(rho, u, q)`` with a
minmod limiter; interface fluxes are Rusanov; time stepping is SSP-RK2.
"""

from dataclasses import dataclass

import numpy as np

from ..blowup_ode import NumericalFailure


class VacuumError(NumericalFailure):
    """Density became non-positive."""


class BoundaryError(NumericalFailure):
    """The disturbance reached the edge of the computational domain."""


@dataclass(frozen=True)
class Layout:
    dim: int  # number of velocity components (= spatial dimension of the grid)
    passives: int = 0
    magnetic: bool = False

    @property
    def nvars(self):
        return 1 + self.dim + self.passives


def minmod(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def to_primitive(U, lay):
    rho = U[0]
    if not np.all(rho > 0.0):
        raise VacuumError(f"non-positive density (min {np.min(rho):.3g})")
    W = np.empty_like(U)
    W[0] = rho
    W[1:] = U[1:] / rho
    return W


def to_conserved(W, lay):
    U = np.empty_like(W)
    U[0] = W[0]
    U[1:] = W[1:] * W[0]
    return U


def pressure(W, lay):
    rho = W[0]
    if lay.magnetic:
        b = rho * W[1 + lay.dim]
        return 0.5 * (rho * rho + b * b)
    return 0.5 * (rho * rho)


def sound_speed(W, lay):
    rho = W[0]
    if lay.magnetic:
        k = W[1 + lay.dim]
        return np.sqrt(rho * (1.0 + k * k))
    return np.sqrt(rho)


def physical_flux(W, lay, axis):
    rho = W[0]
    un = W[1 + axis]
    mass = rho * un
    F = np.empty_like(W)
    F[0] = mass
    F[1:] = mass * W[1:]
    F[1 + axis] += pressure(W, lay)
    return F


def _shift(a, axis, lo, hi):
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(lo, a.shape[axis] + hi if hi <= 0 else hi)
    return a[tuple(sl)]


def flux_difference(W, lay, axis, h):
    """``-(F_{i+1/2} - F_{i-1/2}) / h`` along grid ``axis`` with zero-gradient ghosts."""
    ax = axis + 1
    pad = [(0, 0)] * W.ndim
    pad[ax] = (2, 2)
    Wp = np.pad(W, pad, mode="edge")
    d = np.diff(Wp, axis=ax)  # d[i] = Wp[i+1] - Wp[i]
    s = minmod(_shift(d, ax, 0, -1), _shift(d, ax, 1, 0))  # slopes of Wp[1..-2]
    core = _shift(Wp, ax, 1, -1)
    WL = _shift(core + 0.5 * s, ax, 0, -1)  # left states at the faces between core cells
    WR = _shift(core - 0.5 * s, ax, 1, 0)
    FL = physical_flux(WL, lay, axis)
    FR = physical_flux(WR, lay, axis)
    sL = np.abs(WL[1 + axis]) + sound_speed(WL, lay)
    sR = np.abs(WR[1 + axis]) + sound_speed(WR, lay)
    alpha = np.maximum(sL, sR)
    F = 0.5 * (FL + FR) - 0.5 * alpha * (to_conserved(WR, lay) - to_conserved(WL, lay))
    return -np.diff(F, axis=ax) / h


def rhs(U, lay, h):
    W = to_primitive(U, lay)
    out = flux_difference(W, lay, 0, h)
    for axis in range(1, U.ndim - 1):
        out += flux_difference(W, lay, axis, h)
    return out


def max_speed(U, lay):
    W = to_primitive(U, lay)
    c = sound_speed(W, lay)
    return float(max(np.max(np.abs(W[1 + a]) + c) for a in range(lay.dim)))


def ssp_rk2(U, lay, h, dt):
    U1 = U + dt * rhs(U, lay, h)
    return 0.5 * U + 0.5 * (U1 + dt * rhs(U1, lay, h))


def stable_dt(U, lay, h, cfl=0.4):
    return cfl * h / max_speed(U, lay)
