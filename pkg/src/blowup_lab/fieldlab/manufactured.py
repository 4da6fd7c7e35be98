"""Compactly supported C-infinity test fields with analytic derivatives.

Every field is a sum of bumps ``A e exp(1/(s^2 - 1))`` (peak value ``A``),
``s = |x - c| / r``. Vector fields can be built directly from bumps, as
gradients of a scalar bump potential, or as curls of a bump vector potential,
which gives exactly curl-free and divergence-free test inputs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0


@dataclass(frozen=True)
class Bump:
    center: tuple
    radius: float
    amplitude: float
    component: int = 0

    @property
    def reach(self):
        return float(np.linalg.norm(self.center)) + self.radius


def bump_jet(points, bump, order=0):
    """Value and derivatives (up to ``order`` <= 3) of one bump at ``points`` (..., n).

    Returns a list ``[value, grad, hess, third]`` truncated to ``order + 1``
    entries; derivative axes trail the point axes.
    """
    x = np.asarray(points, dtype=float)
    d = x - np.asarray(bump.center, dtype=float)
    r2 = bump.radius ** 2
    q = np.sum(d * d, axis=-1) / r2
    inside = q < 1.0
    u = np.where(inside, 1.0 / np.where(inside, q - 1.0, -1.0), 0.0)
    g = np.where(inside, bump.amplitude * math.e * np.exp(u), 0.0)
    out = [g]
    if order >= 1:
        g1 = -u * u * g
        out.append(g1[..., None] * (2.0 / r2) * d)
    if order >= 2:
        n = x.shape[-1]
        eye = np.eye(n)
        g2 = g * (u ** 4 + 2.0 * u ** 3)
        dd = d[..., :, None] * d[..., None, :]
        out.append(g2[..., None, None] * (4.0 / r2 ** 2) * dd + g1[..., None, None] * (2.0 / r2) * eye)
    if order >= 3:
        g3 = -g * (u ** 6 + 6.0 * u ** 5 + 6.0 * u ** 4)
        ddd = d[..., :, None, None] * d[..., None, :, None] * d[..., None, None, :]
        sym = (
            eye[:, :, None] * d[..., None, None, :]
            + eye[:, None, :] * d[..., None, :, None]
            + eye[None, :, :] * d[..., :, None, None]
        )
        out.append(g3[..., None, None, None] * (8.0 / r2 ** 3) * ddd + g2[..., None, None, None] * (4.0 / r2 ** 2) * sym)
    return out


@dataclass(frozen=True)
class ScalarField:
    """Sum of scalar bumps (the ``component`` of each bump is ignored)."""

    bumps: tuple

    @property
    def reach(self):
        return max((b.reach for b in self.bumps), default=0.0)

    def jet(self, points, order=0):
        x = np.asarray(points, dtype=float)
        n = x.shape[-1]
        acc = [np.zeros(x.shape[:-1] + (n,) * k) for k in range(order + 1)]
        for b in self.bumps:
            for k, part in enumerate(bump_jet(x, b, order)):
                acc[k] += part
        return acc

    def __call__(self, points):
        return self.jet(points, 0)[0]


@dataclass(frozen=True)
class VectorField:
    """3-component field ``u = sum(bumps) + grad(potential) + curl(stream)``.

    ``jet`` returns ``(u, Du, D2u)`` with ``Du[..., i, j] = d_j u_i`` and
    ``D2u[..., i, j, k] = d_j d_k u_i``.
    """

    direct: tuple = ()
    potential: tuple = ()
    stream: tuple = ()
    dim: int = 3
    seed: int = field(default=-1, compare=False)

    @property
    def reach(self):
        return max((b.reach for b in self.direct + self.potential + self.stream), default=0.0)

    def jet(self, points):
        x = np.asarray(points, dtype=float)
        n = self.dim
        shape = x.shape[:-1]
        u = np.zeros(shape + (n,))
        Du = np.zeros(shape + (n, n))
        D2u = np.zeros(shape + (n, n, n))
        for b in self.direct:
            v, g, h = bump_jet(x, b, 2)
            u[..., b.component] += v
            Du[..., b.component, :] += g
            D2u[..., b.component, :, :] += h
        for b in self.potential:
            _, g, h, t = bump_jet(x, b, 3)
            u += g
            Du += h
            D2u += t
        for b in self.stream:
            _, g, h, t = bump_jet(x, b, 3)
            eps = LEVI_CIVITA[:, :, b.component]  # u_i = eps_ij(k) d_j A_k
            u += np.einsum("ij,...j->...i", eps, g)
            Du += np.einsum("ij,...jl->...il", eps, h)
            D2u += np.einsum("ij,...jlm->...ilm", eps, t)
        return u, Du, D2u

    def __call__(self, points):
        return self.jet(points)[0]


def _random_bump(rng, dim, max_reach, rmin, rmax, component):
    radius = rng.uniform(rmin, rmax)
    room = max_reach - radius
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    dist = room * rng.uniform() ** (1.0 / dim)
    center = tuple(float(c) for c in direction * dist)
    return Bump(center, float(radius), float(rng.uniform(-1.0, 1.0)), int(component))


def random_vector_field(rng, max_bumps=4, max_reach=1.0, rmin=0.8, rmax=1.0, dim=3):
    """Direct bumps on random components, 1..max_bumps of them."""
    count = int(rng.integers(1, max_bumps + 1))
    bumps = tuple(_random_bump(rng, dim, max_reach, rmin, rmax, rng.integers(dim)) for _ in range(count))
    return VectorField(direct=bumps, dim=dim)


def random_scalar_field(rng, dim, max_bumps=4, max_reach=1.0, rmin=0.3, rmax=0.9):
    count = int(rng.integers(1, max_bumps + 1))
    return ScalarField(tuple(_random_bump(rng, dim, max_reach, rmin, rmax, 0) for _ in range(count)))


def vector_ensemble(seed=42, count=10, **kwargs):
    """The reproducible default ensemble of manufactured vector fields."""
    rng = np.random.default_rng(seed)
    return [random_vector_field(rng, **kwargs) for _ in range(count)]


def gradient_field(seed=0, bumps=2, max_reach=1.0):
    """Curl-free field ``grad(phi)``; ``phi`` must reach slightly less since u = grad phi."""
    rng = np.random.default_rng(seed)
    pot = tuple(_random_bump(rng, 3, max_reach, 0.8, 1.0, 0) for _ in range(bumps))
    return VectorField(potential=pot)


def solenoidal_field(seed=0, bumps=2, max_reach=1.0):
    """Divergence-free field ``curl(A)``."""
    rng = np.random.default_rng(seed)
    stream = tuple(_random_bump(rng, 3, max_reach, 0.8, 1.0, rng.integers(3)) for _ in range(bumps))
    return VectorField(stream=stream)
