r"""The spherical exponential weight and its derivative tensors.

The weight is

.. math::

    F_n(x) = \int_{S^{n-1}} e^{\omega\cdot x}\,d\omega ,
    \qquad F_1(x) = e^{x} + e^{-x},

which is radial, positive and satisfies :math:`\Delta F = F`. In closed form
:math:`F_n(r) = (2\pi)^{n/2} I_{\nu}(r)/r^{\nu}` with :math:`\nu = n/2 - 1`.

Because :math:`\nabla e^{\omega\cdot x} = \omega e^{\omega\cdot x}`, every
sphere moment :math:`\int \omega^{\otimes k} e^{\omega\cdot x} d\omega` is the
k-th derivative tensor of F. Writing :math:`F = \phi(s)` with
:math:`s = |x|^2/2`, the chain rule gives compact Cartesian forms, and
:math:`\phi^{(k)}(s) = (2\pi)^{n/2} I_{\nu+k}(r)/r^{\nu+k}`.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._bessel import bessel_i0, scaled_bessel_i

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

#: beyond this radius exp() overflows in double precision
MAX_RADIUS = 700.0


class DomainError(ValueError):
    """Argument outside the supported domain of the weight function."""


def _check_dim(n):
    if n not in (1, 2, 3):
        raise DomainError(f"n must be 1..3, got {n!r}")


def _check_radius(r, name="r"):
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    if np.any(arr > MAX_RADIUS):
        raise DomainError(f"{name} > {MAX_RADIUS} overflows")
    return arr


def _sinhc(r):
    # sinh(r)/r; Taylor branch avoids the removable singularity at 0
    r = np.asarray(r, dtype=float)
    r2 = r * r
    small = r < 1e-2
    safe = np.where(small, 1.0, r)
    series = 1.0 + r2 / 6.0 * (1.0 + r2 / 20.0 * (1.0 + r2 / 42.0))
    return np.where(small, series, np.sinh(safe) / safe)


def eval_F(n, r):
    """Evaluate the weight at radius ``r`` (scalar or array)."""
    _check_dim(n)
    arr = _check_radius(r)
    if n == 1:
        out = np.exp(arr) + np.exp(-arr)
    elif n == 2:
        out = 2.0 * math.pi * bessel_i0(arr)
    else:
        out = 4.0 * math.pi * _sinhc(arr)
    return float(out) if np.ndim(out) == 0 else out


def radial_derivative(n, k, r):
    """k-th derivative of F with respect to ``s = r**2 / 2``."""
    _check_dim(n)
    arr = _check_radius(r)
    nu = 0.5 * n - 1.0
    return (2.0 * math.pi) ** (0.5 * n) * scaled_bessel_i(nu + k, arr)


@dataclass(frozen=True)
class TestFunction:
    """The weight F in dimension ``n``; callable on points of shape (..., n)."""

    __test__ = False  # not a pytest class

    n: int

    def __post_init__(self):
        _check_dim(self.n)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return eval_F(self.n, np.linalg.norm(x, axis=-1))

    def moment(self, x, order):
        return moment(self.n, x, order)


@dataclass(frozen=True)
class MomentTensor:
    """``order``-th derivative tensor of F; trailing axes hold the tensor indices."""

    order: int
    components: np.ndarray

    def trace(self):
        if self.order != 2:
            raise ValueError("trace defined for order-2 tensors only")
        return np.trace(self.components, axis1=-2, axis2=-1)


def moment(n, x, order):
    """Derivative tensor of F of the given order at ``x`` (shape (..., n)).

    Order 0 is F, order 1 is grad F, i.e. the sphere moments of
    ``e^{omega.x}`` with 0..3 factors of omega.
    """
    _check_dim(n)
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order!r}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"last axis of x must have length {n}")
    r = np.linalg.norm(x, axis=-1)
    if order == 0:
        return MomentTensor(0, np.asarray(eval_F(n, r)))
    d = [np.asarray(radial_derivative(n, k, r)) for k in range(1, order + 1)]
    if order == 1:
        comp = d[0][..., None] * x
    elif order == 2:
        eye = np.eye(n)
        comp = d[1][..., None, None] * x[..., :, None] * x[..., None, :] + d[0][..., None, None] * eye
    else:
        eye = np.eye(n)
        xxx = x[..., :, None, None] * x[..., None, :, None] * x[..., None, None, :]
        sym = (
            eye[:, :, None] * x[..., None, None, :]
            + eye[:, None, :] * x[..., None, :, None]
            + eye[None, :, :] * x[..., :, None, None]
        )
        comp = d[2][..., None, None, None] * xxx + d[1][..., None, None, None] * sym
    return MomentTensor(order, comp)


@dataclass(frozen=True)
class SphereQuadrature:
    """Quadrature nodes on the unit sphere ``S^{n-1}``."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        """Integrate ``f(nodes) -> (M, ...)`` over the sphere."""
        vals = np.asarray(f(self.nodes))
        return np.tensordot(self.weights, vals, axes=(0, 0))

    def weight_moment(self, x, order=0):
        """Sphere quadrature of ``omega^{(x)order} e^{omega.x}`` at one point."""
        x = np.asarray(x, dtype=float)

        def integrand(w):
            e = np.exp(w @ x)
            out = e
            for _ in range(order):
                out = out[..., None] * w.reshape((w.shape[0],) + (1,) * (out.ndim - 1) + (self.n,))
            return out

        return self.integrate(integrand)


def sphere_quadrature(n, m=64):
    """Sphere rule: trapezoid on the circle, Gauss-Legendre x trapezoid on S^2.

    Trapezoid in the azimuth is spectrally accurate for periodic integrands;
    ``m >= 64`` resolves ``e^{omega.x}`` for ``|x| <= 10`` to roundoff.
    """
    _check_dim(n)
    if n == 1:
        return SphereQuadrature(1, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    phi = 2.0 * math.pi * np.arange(2 * m) / (2 * m)
    wphi = np.full(2 * m, 2.0 * math.pi / (2 * m))
    if n == 2:
        return SphereQuadrature(2, np.stack([np.cos(phi), np.sin(phi)], axis=1), wphi)
    mu, wmu = np.polynomial.legendre.leggauss(m)
    st = np.sqrt(1.0 - mu * mu)
    nodes = np.stack(
        [
            (st[:, None] * np.cos(phi)[None, :]).ravel(),
            (st[:, None] * np.sin(phi)[None, :]).ravel(),
            np.repeat(mu, phi.size),
        ],
        axis=1,
    )
    weights = (wmu[:, None] * wphi[None, :]).ravel()
    return SphereQuadrature(3, nodes, weights)


def ball_integral(n, R):
    """Integral of F over the ball ``|x| <= R``."""
    _check_dim(n)
    R = _check_radius(R, "R")
    if n == 1:
        out = 4.0 * np.sinh(R)
    elif n == 2:
        out = 4.0 * math.pi ** 2 * R * R * scaled_bessel_i(1.0, R)
    else:
        # R cosh R - sinh R = sum_k 2k R^{2k+1} / (2k+1)!
        R2 = R * R
        series = R * R2 / 3.0 * (1.0 + R2 / 10.0 * (1.0 + R2 / 28.0 * (1.0 + R2 / 54.0)))
        small = R < 0.1
        safe = np.where(small, 1.0, R)
        closed = safe * np.cosh(safe) - np.sinh(safe)
        out = 16.0 * math.pi ** 2 * np.where(small, series, closed)
    return float(out) if np.ndim(out) == 0 else out


_SLAB_NODES = 256


def slab_ball_integral(n, R):
    """Integral of ``e^y + e^{-y}`` over the ball ``y^2 + |z|^2 <= R^2``, z in R^{n-1}.

    The z-integral is the volume of an (n-1)-ball; the remaining y-integral is
    done by Gauss-Legendre after ``y = R sin(theta)``, which removes the
    square-root endpoint behaviour.
    """
    _check_dim(n)
    R = float(_check_radius(R, "R"))
    if n == 1:
        return ball_integral(1, R)
    theta, w = np.polynomial.legendre.leggauss(_SLAB_NODES)
    theta = 0.5 * math.pi * theta
    w = 0.5 * math.pi * w
    y = R * np.sin(theta)
    rho = R * np.cos(theta)
    if n == 2:
        vol = 2.0 * rho
    else:
        vol = math.pi * rho * rho
    return float(np.sum(w * 2.0 * np.cosh(y) * vol * R * np.cos(theta)))


def growth_envelope(n, r_grid):
    """Ratios ``F(r) (1+r)^{(n-1)/2} e^{-r}`` on the given radii."""
    r = _check_radius(r_grid)
    return eval_F(n, r) * (1.0 + r) ** (0.5 * (n - 1)) * np.exp(-r)
