import math

import numpy as np
import pytest
from scipy.integrate import quad

from blowup_lab import weightfn
from blowup_lab.blowup_ode import CHI
from blowup_lab.fieldlab import functionals, identities, manufactured
from blowup_lab.fieldlab.grid import Grid, GridField, TruncationError


def _radial_bump():
    return manufactured.ScalarField((manufactured.Bump((0.0, 0.0, 0.0), 1.0, 1.0),))


def test_bump_jet_matches_finite_differences():
    b = manufactured.Bump((0.1, -0.2, 0.3), 0.9, 0.7)
    x = np.array([0.4, 0.1, 0.2])
    v, g, h, t = manufactured.bump_jet(x, b, 3)
    step = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        vp, gp, hp = manufactured.bump_jet(x + e, b, 2)
        vm, gm, hm = manufactured.bump_jet(x - e, b, 2)
        assert (vp - vm) / (2 * step) == pytest.approx(g[i], rel=1e-7)
        assert np.allclose((gp - gm) / (2 * step), h[:, i], rtol=1e-6, atol=1e-9)
        assert np.allclose((hp - hm) / (2 * step), t[:, :, i], rtol=1e-6, atol=1e-8)


def test_special_fields_have_zero_curl_or_divergence():
    x = np.random.default_rng(0).uniform(-1, 1, (200, 3))
    _, Du, _ = manufactured.gradient_field(seed=1).jet(x)
    assert np.max(np.abs(Du - np.swapaxes(Du, -1, -2))) < 1e-12
    _, Du, _ = manufactured.solenoidal_field(seed=1).jet(x)
    assert np.max(np.abs(np.trace(Du, axis1=-2, axis2=-1))) < 1e-12


def test_functional_X_against_radial_quadrature():
    phi = _radial_bump()
    ref, _ = quad(lambda r: 4 * math.pi * r * r * weightfn.eval_F(3, r) * phi(np.array([r, 0.0, 0.0])),
                  0, 1, epsabs=0, epsrel=1e-12)
    grid = Grid(3, 96)
    gf = GridField.on_grid(grid, 1.0, drho=phi(grid.points()))
    assert functionals.functional_X(gf) == pytest.approx(ref, rel=1e-6)


def test_functionals_are_linear():
    grid = Grid(3, 48)
    x = grid.points()
    rng = np.random.default_rng(3)
    f = manufactured.random_scalar_field(rng, 3)(x)
    g = manufactured.random_scalar_field(rng, 3)(x)
    X = lambda a: functionals.functional_X(GridField.on_grid(grid, 1.0, drho=a))
    assert X(2.0 * f - 3.0 * g) == pytest.approx(2.0 * X(f) - 3.0 * X(g), rel=1e-12)
    vel = np.stack([f, g, f * g])
    rho = GridField.on_grid(grid, 1.0, rho=1.0 + 0 * f)
    Y = lambda v: functionals.functional_Y(rho, GridField.on_grid(grid, 1.0, u=v))
    assert Y(vel + 2 * vel) == pytest.approx(3 * Y(vel), rel=1e-12)


def test_truncated_field_rejected():
    grid = Grid(3, 16)
    gf = GridField.on_grid(grid, drho=np.ones((16, 16, 16)))
    with pytest.raises(TruncationError):
        functionals.functional_X(gf)


def test_holder_lower_bound_random_fields():
    rows = functionals.holder_rows(seed=7, count=10, cells=32)
    assert all(lhs >= rhs for lhs, rhs in rows)


def test_holder_equality_for_mollified_constant():
    # the bound is sharp for the indicator of the ball; ratios must decrease towards 1
    grid = Grid(1, 20000)
    y = grid.points()[..., 0]
    ratios = []
    for delta in (0.2, 0.1, 0.05, 0.025):
        f = CHI((np.abs(y) - (1.0 - delta)) / delta)
        lhs, rhs = functionals.holder_gap(GridField.on_grid(grid, 1.0, drho=f), 1, 1.0)
        ratios.append(lhs / rhs)
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert 1.0 <= ratios[-1] < 1.05


def test_velocity_threshold_positive_and_monotone():
    b = [functionals.velocity_threshold(a, cells=32) for a in (0.05, 0.1, 0.3)]
    assert all(v > 0 for v in b)
    assert b[0] < b[1] < b[2]


@pytest.fixture(scope="module")
def ensemble_integrals():
    fields = manufactured.vector_ensemble(seed=42, count=2)
    return fields, [identities.field_integrals(f, 64) for f in fields]


def test_curl_term_vanishes(ensemble_integrals):
    for ints in ensemble_integrals[1]:
        assert identities.curl_weight_check(ints).residual <= 1e-8


def test_cross_term_coefficient_is_two(ensemble_integrals):
    for ints in ensemble_integrals[1]:
        rep = identities.grad_decomposition_identity(ints)
        assert rep.measured_cross_coefficient == pytest.approx(2.0, abs=1e-3)
        assert rep.residual < 1e-4 < rep.residual_unit_cross


def test_identity_residuals_converge_under_refinement():
    f = manufactured.vector_ensemble(seed=42, count=1)[0]
    coarse = identities.field_integrals(f, 32)
    fine = identities.field_integrals(f, 96)
    for name in ("residual",):
        a = getattr(identities.grad_decomposition_identity(coarse), name)
        b = getattr(identities.grad_decomposition_identity(fine), name)
        assert b <= a / 3
    qa, qb = identities.q1_identities(coarse), identities.q1_identities(fine)
    assert qb.A_residual <= qa.A_residual / 3
    assert qb.B_residual <= qa.B_residual / 3


def test_integrals_scale_quadratically():
    f = manufactured.vector_ensemble(seed=5, count=1)[0]
    g = manufactured.VectorField(tuple(manufactured.Bump(b.center, b.radius, 2 * b.amplitude, b.component)
                                       for b in f.direct))
    a = identities.field_integrals(f, 32)
    b = identities.field_integrals(g, 32)
    for key in ("grad2", "div2", "curl2", "psi2", "A_lhs"):
        assert b[key] == pytest.approx(4 * a[key], rel=1e-12, abs=1e-300)


def test_gradient_field_has_no_curl_energy():
    ints = identities.field_integrals(manufactured.gradient_field(seed=2), 48)
    assert abs(ints["curl2"]) < 1e-10 * ints["grad2"]


def test_elastic_checks_hold_on_ensemble(ensemble_integrals):
    coeffs = identities.ElasticCoeffs.default()
    for ints in ensemble_integrals[1]:
        assert identities.elastic_inequality(ints, coeffs).holds
        assert identities.q2_bound(ints, coeffs).holds
        q = identities.q1_identities(ints)
        assert q.A_lower_holds and q.B_mid_holds and q.B_upper_holds


def test_elastic_coefficients_validated():
    with pytest.raises(identities.CoefficientError):
        identities.ElasticCoeffs.default(lam=100.0, sigma3=5.0).validate()
    with pytest.raises(identities.CoefficientError):
        identities.ElasticCoeffs.default(c2_squared=1.5).validate()


def test_field_touching_boundary_rejected():
    far = manufactured.VectorField(direct=(manufactured.Bump((1.5, 0.0, 0.0), 0.6, 1.0, 0),))
    with pytest.raises(ValueError):
        identities.field_integrals(far, 32)


def test_elastic_rows_parallel_matches_serial():
    fields = manufactured.vector_ensemble(seed=1, count=2)
    a = identities.elastic_rows(fields, 24)
    b = identities.elastic_rows(fields, 24, jobs=2)
    assert a == b
