import numpy as np
import pytest

from blowup_lab.hypersim import analysis, fast1d, mhd2d, scheme, slab
from blowup_lab.hypersim.snapshot import Snapshot, read_snapshot, write_snapshot


def test_dam_break_matches_exact_solution():
    errs = [slab.run_dam_break(cells=N)[3] for N in (512, 2048)]
    assert errs[1] < 0.02
    assert errs[1] < errs[0] / 2


def test_dam_break_exact_states():
    y = np.array([-10.0, 10.0])
    assert np.allclose(slab.dam_break_exact(y, 0.5), [2.0, 1.0])


def test_mass_conserved_and_data_symmetric():
    out = slab.run_slab_euler(slab.SlabInit(0.1), cells=1024, t_max=1.0, samples=50)
    mass = np.asarray(out.series.aux["mass"])
    assert np.max(np.abs(mass / mass[0] - 1)) <= 1e-12
    rho, m = out.state[0], out.state[1]
    # even density, odd momentum
    assert np.max(np.abs(rho - rho[::-1])) < 1e-12
    assert np.max(np.abs(m + m[::-1])) < 1e-12


def test_finite_propagation_speed():
    out = slab.run_slab_euler(slab.SlabInit(0.1), cells=2048, t_max=1.5, samples=30)
    t = np.asarray(out.series.times)
    R = np.asarray(out.series.aux["support"])
    h = out.grid["spacing"]
    # ambient sound speed is 1; allow the numerical precursor of the scheme
    assert np.all(R <= 1.0 + t + slab.PRECURSOR_CELLS * h)
    assert R[-1] > 1.0 + 0.9 * t[-1]


def test_second_order_self_convergence():
    init = slab.SlabInit(0.1)
    prev, errs = None, []
    for N in (1024, 2048, 4096, 8192):
        rho = slab.run_slab_euler(init, cells=N, t_max=0.5, half_length=4.0, samples=4).state[0]
        if prev is not None:
            coarse = rho.reshape(-1, 2).mean(axis=1)
            errs.append(np.sum(np.abs(coarse - prev)) / len(prev))
        prev = rho
    order = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert order[-1] >= 1.8


def test_functional_grows_from_positive_data():
    init = slab.SlabInit(0.1)
    assert init.positivity() > 0
    out = slab.run_slab_euler(init, cells=1024, t_max=2.0, samples=200)
    t, X, Y = out.series.arrays()
    assert np.all(X >= X[0])
    assert np.all(X + Y >= X[0] + Y[0])
    assert np.all(np.diff(X + Y) > 0)


def test_chain_audit_converges():
    res = []
    for N in (1024, 2048):
        out = slab.run_slab_euler(slab.SlabInit(0.1), cells=N, t_max=2.0, samples=300)
        audit = analysis.ode_chain_audit(out)
        assert audit.sign_ok
        res.append(audit.xprime_residual)
    assert res[1] < 0.6 * res[0]


def test_vacuum_and_sign_preconditions():
    with pytest.raises(scheme.VacuumError):
        slab.SlabInit(0.8, rho_amp=-1.0).validate()
    with pytest.raises(ValueError):
        slab.SlabInit(0.1, rho_amp=0.5).validate()
    with pytest.raises(ValueError):
        slab.SlabInit(0.1, vel_amp=-5.0).validate()


def test_boundary_reached_is_an_error():
    with pytest.raises(scheme.BoundaryError):
        slab.run_slab_euler(slab.SlabInit(0.1), cells=256, t_max=3.0, half_length=1.5)


def test_compiled_step_matches_array_scheme():
    init = slab.SlabInit(0.2, rho_amp=1.0, simple_wave=True)
    grid = slab.SlabGrid(800, 4.0)
    rho, v, w = init.primitives(grid.y, 0)
    U, lay = slab.slab_state(rho, v, w)
    r, m = U[0].copy(), U[1].copy()
    for _ in range(20):
        dt = fast1d.step(r, m, grid.h, 0.4)
        U = scheme.ssp_rk2(U, lay, grid.h, scheme.stable_dt(U, lay, grid.h, 0.4))
    assert dt > 0
    assert np.max(np.abs(r - U[0])) < 1e-13
    assert np.max(np.abs(m - U[1])) < 1e-13


def test_mhd_locked_ratio_and_conservation():
    out = mhd2d.run_mhd2d(mhd2d.Mhd2dInit(0.1, locked=True), cells=64, t_max=0.2, samples=20)
    aux = out.series.aux
    assert max(aux["max_b_over_rho"]) - 1.0 <= 1e-3
    assert 1.0 - min(aux["min_b_over_rho"]) <= 1e-3
    for key in ("mass", "total_b"):
        v = np.asarray(aux[key])
        assert np.max(np.abs(v / v[0] - 1)) <= 1e-12


def test_mhd_without_field_is_euler():
    init = mhd2d.Mhd2dInit(0.1, b0=0.0, h_amp=0.0)
    a = mhd2d.run_mhd2d(init, cells=32, t_max=0.1, samples=5)
    b = mhd2d.run_euler2d(init, cells=32, t_max=0.1, samples=5)
    assert np.array_equal(a.state[:3], b.state)
    assert a.series.X == b.series.X and a.series.Y == b.series.Y


def test_snapshot_roundtrip(tmp_path):
    data = np.random.default_rng(0).normal(size=(3, 5, 7))
    path = tmp_path / "s.bin"
    write_snapshot(path, Snapshot(0.25, 0.1, (-0.25, -0.35), data))
    snap = read_snapshot(path)
    assert snap.time == 0.25 and snap.spacing == 0.1 and tuple(snap.origin) == (-0.25, -0.35)
    assert np.array_equal(snap.data, data)


def test_snapshot_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTSNAP\0" + bytes(64))
    with pytest.raises(ValueError):
        read_snapshot(path)


def test_snapshots_taken_at_requested_times():
    out = slab.run_slab_euler(slab.SlabInit(0.1), cells=256, t_max=0.5, samples=10, snapshot_times=(0.1, 0.3))
    assert [t for t, _ in out.snapshots] == [0.1, 0.3]


def test_simple_wave_shock_time_near_prediction():
    init = slab.SlabInit(0.4, rho_amp=1.0, simple_wave=True)
    run = analysis.simple_wave_run(init, cells_per_unit=1600)
    t20 = analysis.threshold_time(run, 20)
    T = analysis.predicted_lifespan(0.4)
    assert 0.85 * T < t20 < T
