import math

import numpy as np
import pytest
from scipy import special

from blowup_lab import weightfn
from blowup_lab._bessel import scaled_bessel_i


def _fd_laplacian(n, x, h=1e-3):
    F = weightfn.TestFunction(n)
    out = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        # fourth-order central stencil
        out += (-F(x + 2 * e) + 16 * F(x + e) - 30 * F(x) + 16 * F(x - e) - F(x - 2 * e)) / (12 * h * h)
    return out


def test_closed_forms_at_origin():
    assert weightfn.eval_F(1, 0.0) == 2.0
    assert weightfn.eval_F(2, 0.0) == pytest.approx(2 * math.pi, rel=1e-15)
    assert weightfn.eval_F(3, 0.0) == pytest.approx(4 * math.pi, rel=1e-15)


def test_against_scipy_bessel():
    r = np.linspace(0.0, 60.0, 241)
    assert np.allclose(weightfn.eval_F(2, r), 2 * math.pi * special.iv(0, r), rtol=1e-13, atol=0)
    for mu in (0.0, 0.5, 1.0, 1.5, 2.5):
        rr = r[1:]
        assert np.allclose(scaled_bessel_i(mu, rr) * rr ** mu, special.iv(mu, rr), rtol=1e-12, atol=0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_laplacian_equals_F(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        x = rng.uniform(-5, 5, n)
        assert _fd_laplacian(n, x) == pytest.approx(weightfn.TestFunction(n)(x), rel=1e-6)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_moments_match_sphere_quadrature(n, order):
    quad = weightfn.sphere_quadrature(n, 64)
    rng = np.random.default_rng(10 * n + order)
    for _ in range(10):
        x = rng.normal(size=n)
        x *= rng.uniform(0, 10) / np.linalg.norm(x)
        ref = quad.weight_moment(x, order)
        got = weightfn.moment(n, x, order)
        got = got.components
        assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref)) + 1e-300


def test_moment_trace_is_laplacian():
    x = np.array([[0.3, -1.2, 2.0], [0.0, 0.0, 0.0]])
    M2 = weightfn.moment(3, x, 2)
    assert np.allclose(M2.trace(), weightfn.TestFunction(3)(x), rtol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_integral_matches_radial_quadrature(n):
    from scipy.integrate import quad

    area = weightfn.SPHERE_AREA[n]
    for R in (0.05, 1.0, 4.0):
        ref, _ = quad(lambda r: weightfn.eval_F(n, r) * area * r ** (n - 1), 0, R, epsabs=0, epsrel=1e-13)
        assert weightfn.ball_integral(n, R) == pytest.approx(ref, rel=1e-11)


def test_slab_ball_closed_forms():
    for R in (0.5, 1.0, 3.0):
        assert weightfn.slab_ball_integral(2, R) == pytest.approx(4 * math.pi * R * special.iv(1, R), rel=1e-12)
        assert weightfn.slab_ball_integral(3, R) == pytest.approx(8 * math.pi * (R * math.cosh(R) - math.sinh(R)), rel=1e-12)


def test_envelope_bounds():
    r = np.linspace(0, 50, 2001)
    e1 = weightfn.growth_envelope(1, r)
    e3 = weightfn.growth_envelope(3, r)
    # 1 + e^{-2r}, up to rounding
    assert np.all((e1 >= 1 - 1e-15) & (e1 <= 2))
    assert np.all((e3 >= 2 * math.pi - 0.1) & (e3 <= 4 * math.pi + 0.1))
    e2 = weightfn.growth_envelope(2, r)
    assert e2.max() / e2.min() < 4


@pytest.mark.parametrize("bad", [(4, 1.0), (0, 1.0), (3, -1.0), (3, float("nan")), (3, 800.0)])
def test_domain_errors(bad):
    with pytest.raises(weightfn.DomainError):
        weightfn.eval_F(*bad)


def test_monotone_in_radius():
    r = np.linspace(0, 30, 500)
    for n in (1, 2, 3):
        assert np.all(np.diff(weightfn.eval_F(n, r)) > 0)
        assert np.all(np.diff(weightfn.ball_integral(n, r[1:])) > 0)
