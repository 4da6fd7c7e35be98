import math

import numpy as np
import pytest

from blowup_lab import blowup_ode as ode


@pytest.mark.parametrize("T_star", [0.5, 1.0, 2.0])
def test_riccati_exact_blowup(T_star):
    # X = 6 (T* - t)^-2 solves X'' = X^2
    out = ode.integrate_riccati(6 / T_star ** 2, 12 / T_star ** 3)
    assert out.blew_up
    assert abs(out.t_blow - T_star) < 1e-6


def test_linear_case_never_blows_up():
    out = ode.integrate(ode.OdeParams(n=1, C=0.0, eps=0.1), horizon=50.0)
    assert not out.blew_up and out.reason == "horizon"
    # X'' = X with X(0) = eps, X'(0) = 0 -> eps cosh t
    k = np.searchsorted(out.t, 10.0)
    assert out.X[k] == pytest.approx(0.1 * math.cosh(out.t[k]), rel=1e-8)


def test_lifespan_decreases_with_eps():
    T = [ode.integrate(ode.OdeParams(n=1, eps=e)).t_blow for e in (0.05, 0.1, 0.2, 0.4)]
    assert all(a > b for a, b in zip(T, T[1:]))


def test_larger_C_blows_up_sooner():
    a = ode.integrate(ode.OdeParams(n=2, C=1.0, eps=0.05)).t_blow
    b = ode.integrate(ode.OdeParams(n=2, C=4.0, eps=0.05)).t_blow
    assert b < a


@pytest.mark.parametrize("field,value", [("n", 4), ("C", -1.0), ("R0", 0.5), ("a", 0.5), ("eps", 0.0),
                                         ("domain_factor", 0.0), ("x0", -1.0)])
def test_invalid_params(field, value):
    from dataclasses import replace

    with pytest.raises(ValueError):
        replace(ode.OdeParams(), **{field: value}).validate()


def test_fit_recovers_known_power_law():
    eps = np.geomspace(0.01, 0.1, 6)
    params, r2 = ode.fit_lifespan(eps, 3.0 * eps ** -1.5, "power")
    assert params["exponent"] == pytest.approx(-1.5, abs=1e-12)
    assert params["K"] == pytest.approx(3.0, rel=1e-12)
    assert r2 == pytest.approx(1.0)


def test_fit_recovers_exponential_law():
    eps = np.geomspace(0.05, 0.3, 6)
    params, r2 = ode.fit_lifespan(eps, np.exp(0.4 / eps + 1.0), "exp")
    assert params["K"] == pytest.approx(0.4, rel=1e-12)
    assert params["log_prefactor"] == pytest.approx(1.0, rel=1e-10)


def test_sweep_rejects_narrow_range():
    with pytest.raises(ValueError):
        ode.lifespan_sweep(ode.OdeParams(n=1), [0.1, 0.12, 0.14, 0.16])


def test_sweep_parallel_matches_serial():
    eps = np.geomspace(0.05, 0.4, 5)
    a = ode.lifespan_sweep(ode.OdeParams(n=1), eps, jobs=1)
    b = ode.lifespan_sweep(ode.OdeParams(n=1), eps, jobs=2)
    assert a.lifespans == b.lifespans


def test_sweep_reports_non_blowup():
    with pytest.raises(ode.SweepError) as info:
        ode.lifespan_sweep(ode.OdeParams(n=2), [0.002, 0.004, 0.008, 0.016], horizon=1e4)
    assert 0.002 in info.value.offending


def test_change_of_variables_on_trajectory():
    p = ode.OdeParams(n=3, x0=10.0, eps=0.1)
    rep = ode.change_of_variables_check(ode.integrate(p), p)
    assert rep.residual <= 1e-3


def test_weak_form_integration_by_parts_on_smooth_data():
    tau = np.linspace(0, 3, 2001)
    Z = np.exp(-tau) * np.cos(tau) + 0.5
    dZ = -np.exp(-tau) * (np.cos(tau) + np.sin(tau))
    d2Z = 2 * np.exp(-tau) * np.sin(tau)
    rep = ode.weak_form_check(tau, Z, 3.0, 1.0, dZ=dZ, d2Z=d2Z)
    assert abs(rep.ibp_residual) <= 1e-6


def test_weak_form_selects_decaying_weight():
    p = ode.OdeParams(n=3, x0=10.0, eps=0.1)
    out = ode.integrate(p)
    T = 0.9 * math.log(out.t_blow + p.R0)
    tau, Z, Ztau = ode.resample_tau(out, p, T, 2000)
    rep = ode.weak_form_check(tau, Z, T, p.C, dZ0=Ztau[0])
    scale = abs(rep.boundary) + abs(rep.nonlinear)
    assert abs(rep.gap) <= 1e-3 * scale
    assert abs(rep.gap_plus) > 0.1 * scale
    assert rep.exact_variant == "e^{-tau}"


def test_cutoff_function():
    tau = np.linspace(0, 1.2, 200)
    chi = ode.CHI(tau)
    assert np.all(chi[tau <= 1 / 8] == 1.0) and np.all(chi[tau >= 7 / 8] == 0.0)
    assert np.all(np.diff(chi) <= 0)
