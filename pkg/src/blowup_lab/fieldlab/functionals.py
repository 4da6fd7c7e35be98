"""Weighted averages of sampled fields: X, Y and the Hoelder bound."""

from dataclasses import dataclass, field

import numpy as np

from .. import weightfn
from .grid import Grid, GridField
from .manufactured import Bump, ScalarField, random_scalar_field


def _weight(gf, n, slab):
    x = gf.coords()
    if slab:
        y = x[..., 0]
        return np.exp(y) + np.exp(-y)
    if n != gf.dim:
        raise ValueError(f"field dimension {gf.dim} does not match n={n}")
    return weightfn.eval_F(n, np.linalg.norm(x, axis=-1))


def _weight_gradient(gf, n, slab):
    x = gf.coords()
    if slab:
        y = x[..., 0]
        g = np.zeros(x.shape)
        g[..., 0] = np.exp(y) - np.exp(-y)
        return g
    if n != gf.dim:
        raise ValueError(f"field dimension {gf.dim} does not match n={n}")
    return weightfn.moment(n, x, 1).components


def functional_X(gf, n=None, component="drho", slab=False):
    """Midpoint rule for ``X = int F (rho - 1) dx``; ``slab`` uses ``e^y + e^{-y}``."""
    n = gf.dim if n is None else n
    gf.check_interior([component])
    return float(np.sum(_weight(gf, n, slab) * gf[component]) * gf.cell_volume)


def functional_Y(rho, u, n=None, rho_component="rho", u_component="u", slab=False):
    """Midpoint rule for ``Y = int rho u . grad F dx``, the omega-average of rho (u.omega) e^{omega.x}."""
    n = rho.dim if n is None else n
    vel = np.asarray(u[u_component])
    if vel.shape[0] != u.dim:
        raise ValueError("velocity must carry one component per dimension")
    u.check_interior([u_component])
    grad = _weight_gradient(rho, n, slab)
    flux = rho[rho_component][..., None] * np.moveaxis(vel, 0, -1)
    return float(np.sum(flux * grad) * rho.cell_volume)


def holder_gap(gf, n=None, R=None, component="drho"):
    """``(int F (rho-1)^2, X^2 / int_{|x|<=R} F)``; Cauchy-Schwarz says lhs >= rhs."""
    n = gf.dim if n is None else n
    R = gf.support_radius if R is None else R
    gf.check_support(R)
    d = gf[component]
    F = _weight(gf, n, False)
    lhs = float(np.sum(F * d * d) * gf.cell_volume)
    X = float(np.sum(F * d) * gf.cell_volume)
    return lhs, X * X / weightfn.ball_integral(n, R)


def blowup_functional(drho, u, n=None, speed=1.0, rho_component="drho", u_component="u"):
    """``speed * int F rho_0 + int (1 + rho_0) u_0 . grad F``.

    With ``speed = 1`` this is the Euler blow-up condition; the vertical-field
    MHD condition uses ``speed = sqrt(1 + b0^2)``.
    """
    n = drho.dim if n is None else n
    r0 = drho[rho_component]
    X = np.sum(_weight(drho, n, False) * r0) * drho.cell_volume
    vel = np.moveaxis(np.asarray(u[u_component]), 0, -1)
    Y = np.sum(((1.0 + r0)[..., None] * vel) * _weight_gradient(drho, n, False)) * drho.cell_volume
    return float(speed * X + Y)


@dataclass
class FunctionalSeries:
    times: list = field(default_factory=list)
    X: list = field(default_factory=list)
    Y: list = field(default_factory=list)
    aux: dict = field(default_factory=dict)

    def append(self, t, X, Y, **aux):
        if self.times and not t > self.times[-1]:
            raise ValueError("times must be strictly increasing")
        self.times.append(float(t))
        self.X.append(float(X))
        self.Y.append(float(Y))
        for k, v in aux.items():
            self.aux.setdefault(k, []).append(float(v))

    def __len__(self):
        return len(self.times)

    def arrays(self):
        return np.asarray(self.times), np.asarray(self.X), np.asarray(self.Y)


def holder_rows(seed=42, count=50, cells=64):
    """Cauchy-Schwarz lower bound on ``count`` random scalar bump fields (3D)."""
    rng = np.random.default_rng(seed)
    grid = Grid(3, cells)
    pts = grid.points()
    out = []
    for _ in range(count):
        f = random_scalar_field(rng, 3)
        gf = GridField.on_grid(grid, 1.0, drho=f(pts))
        lhs, rhs = holder_gap(gf, 3, 1.0)
        out.append((lhs, rhs))
    return out


def velocity_threshold(alpha, cells=64, radius=1.0):
    """Smallest outward-velocity amplitude making the blow-up functional positive.

    Data family: ``rho0 = -alpha * phi``, ``u0 = beta * x * phi`` with ``phi``
    the unit bump of the given radius at the origin. The functional is affine
    in ``beta``, so the threshold is solved for directly.
    """
    grid = Grid(3, cells)
    x = grid.points()
    phi = ScalarField((Bump((0.0, 0.0, 0.0), radius, 1.0),))(x)
    vel = np.moveaxis(x * phi[..., None], -1, 0)
    drho = GridField.on_grid(grid, radius, drho=-alpha * phi)
    u = GridField.on_grid(grid, radius, u=vel)
    base = blowup_functional(drho, GridField.on_grid(grid, radius, u=0 * vel))
    slope = blowup_functional(drho, u) - base
    return -base / slope
