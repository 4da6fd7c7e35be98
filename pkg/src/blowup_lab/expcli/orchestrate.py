"""Dispatch a validated config to the owning module and persist the results."""

import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .. import __version__, weightfn
from .. import blowup_ode as ode
from ..fieldlab import functionals, identities, manufactured
from ..hypersim import analysis, mhd2d, slab
from ..hypersim.snapshot import Snapshot, write_snapshot
from .output import line_plot, write_csv, write_json_atomic, write_text

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class RunManifest:
    timestamp: str
    version: str
    config: dict
    runs: list = field(default_factory=list)
    contracts: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    diagnostic: str = ""

    def as_dict(self):
        return {"timestamp": self.timestamp, "artifact_version": self.version, "config": self.config,
                "runs": self.runs, "contracts": self.contracts, "exit_code": self.exit_code,
                "diagnostic": self.diagnostic}


# -- weightfn -----------------------------------------------------------------

ENVELOPE_BOUNDS = {1: (1.0, 2.0), 3: (2 * math.pi - 0.1, 4 * math.pi + 0.1)}


def weightfn_table(p):
    n = p["n"]
    if p["mode"] == "eval":
        r = p["r"]
        return ["r", "F", "ratio"], [(r, weightfn.eval_F(n, r), float(weightfn.growth_envelope(n, [r])[0]))]
    if p["mode"] == "ball":
        R = p["R"]
        return ["R", "ball", "slab_ball"], [(R, weightfn.ball_integral(n, R), weightfn.slab_ball_integral(n, R))]
    r = np.linspace(0.0, p["rmax"], p["steps"])
    F = weightfn.eval_F(n, r)
    ratio = weightfn.growth_envelope(n, r)
    return ["r", "F", "ratio"], list(zip(r, F, ratio))


def _run_weightfn(p, out, jobs, seed):
    header, rows = weightfn_table(p)
    write_csv(os.path.join(out, "weightfn.csv"), header, rows)
    contracts = {"positive": all(row[1] > 0 for row in rows)}
    if p["mode"] == "envelope":
        ratio = np.array([row[2] for row in rows])
        if p["n"] in ENVELOPE_BOUNDS:
            lo, hi = ENVELOPE_BOUNDS[p["n"]]
            contracts["envelope_bounds"] = bool(np.all((ratio >= lo) & (ratio <= hi)))
        else:
            contracts["envelope_bounds"] = bool(ratio.max() / ratio.min() <= 4.0)
        line_plot(os.path.join(out, "envelope.svg"), [(f"n={p['n']}", [r[0] for r in rows], ratio, "line")],
                  "r", "F(r)(1+r)^((n-1)/2) e^-r", "growth envelope")
    return {"rows": len(rows)}, contracts


# -- ode ------------------------------------------------------------------------

SCALING_TARGETS = {1: (-1.0, 0.15), 2: (-2.0, 0.2)}


def _template(p, eps):
    return ode.OdeParams(n=p["n"], C=p["C"], R0=p["R0"], a=p["a"], domain_factor=p["domain_factor"],
                         eps=eps, x0=p["x0"]).validate()


def _run_ode(p, out, jobs, seed):
    if p["mode"] == "run":
        res = ode.integrate(_template(p, p["eps"]), horizon=p["horizon"], threshold=p["threshold"])
        write_csv(os.path.join(out, "runs.csv"), ["eps", "T_blow", "terminationReason"],
                  [(p["eps"], res.t_blow, res.reason)])
        write_csv(os.path.join(out, "trajectory.csv"), ["t", "Z", "dZ", "logX"],
                  zip(res.t, res.Z, res.dZ, res.log_X))
        if p["plot"]:
            line_plot(os.path.join(out, "trajectory.svg"), [("log X", res.t, res.log_X, "line")],
                      "t", "log X", "comparison ODE")
        return {"blew_up": res.blew_up, "T_blow": res.t_blow, "reason": res.reason}, {"finite": True}
    model = ode.default_model(p["n"]) if p["fit"] == "auto" else p["fit"]
    fit = ode.lifespan_sweep(_template(p, p["eps_list"][0]), p["eps_list"], model, p["horizon"],
                             p["threshold"], jobs)
    order = np.argsort(fit.epsilons)
    write_csv(os.path.join(out, "runs.csv"), ["eps", "T_blow", "terminationReason"],
              [(fit.epsilons[i], fit.lifespans[i], fit.outcomes[i].reason) for i in order])
    write_text(os.path.join(out, "fit.txt"), [("model", model), *sorted(fit.params.items()),
                                             ("r_squared", fit.r_squared)])
    T = np.array(fit.lifespans)[order]
    contracts = {"monotone_in_eps": bool(np.all(np.diff(T) <= 0))}
    if model == ode.default_model(p["n"]):
        if model == "exp":
            contracts["scaling_law"] = fit.r_squared >= 0.98
        else:
            target, tol = SCALING_TARGETS[p["n"]]
            contracts["scaling_law"] = abs(fit.params["exponent"] - target) <= tol
    if p["plot"]:
        e = np.array(fit.epsilons)[order]
        if model == "exp":
            line_plot(os.path.join(out, "lifespan.svg"), [("log T_blow", 1 / e, np.log(T), "dots")],
                      "1/eps", "log T", f"lifespan, n={p['n']}")
        else:
            line_plot(os.path.join(out, "lifespan.svg"), [("T_blow", e, T, "dots")], "eps", "T",
                      f"lifespan, n={p['n']}", logx=True, logy=True)
    return {"fit": fit.params, "r_squared": fit.r_squared, "model": model}, contracts


# -- verify -------------------------------------------------------------------


def _run_verify(p, out, jobs, seed):
    rows = []
    findings = []
    if p["suite"] in ("euler", "all"):
        for k, (lhs, rhs) in enumerate(functionals.holder_rows(seed, p["holder_count"])):
            rows.append(identities.CheckRow(f"holder_lower_bound[{k}]", 64, lhs - rhs, lhs >= rhs))
        thr = functionals.velocity_threshold(0.1)
        findings.append(("velocity_threshold_ratio_at_alpha_0.1", thr / 0.1))
    if p["suite"] in ("elastic", "all"):
        coeffs = identities.ElasticCoeffs.default(lam=p["lam"], sigma3=p["sigma3"])
        fields = manufactured.vector_ensemble(seed, p["count"])
        rows += identities.elastic_rows(fields, p["resolution"], coeffs, jobs)
        coeffs_found = [identities.grad_decomposition_identity(identities.field_integrals(f, p["resolution"]))
                        .measured_cross_coefficient for f in fields[:1]]
        findings.append(("cross_term_coefficient_field0", coeffs_found[0]))
    write_csv(os.path.join(out, "identities.csv"), ["check", "resolution", "residual", "pass"],
              [(r.check, r.resolution, r.residual, r.passed) for r in rows])
    if findings:
        write_text(os.path.join(out, "findings.txt"), findings)
    failed = [r.check for r in rows if not r.passed]
    return {"checks": len(rows), "failed": failed}, {"all_checks": not failed}


# -- sim ------------------------------------------------------------------------


def _snapshots(out, snaps, grid):
    for k, (t, U) in enumerate(snaps):
        dims = U.ndim - 1
        origin = (-grid["half_length"],) * dims
        write_snapshot(os.path.join(out, f"snapshot_{k:04d}.bin"), Snapshot(t, grid["spacing"], origin, U))


def _series_csv(out, series, key_b=None):
    t, X, Y = series.arrays()
    g = series.aux["maxgrad"]
    b = series.aux.get(key_b, [math.nan] * len(t)) if key_b else [math.nan] * len(t)
    write_csv(os.path.join(out, "series.csv"), ["t", "X", "Y", "maxgrad", "minBoverRho"], zip(t, X, Y, g, b))


def _audit(out_obj, dim, a2, contracts):
    try:
        audit = analysis.ode_chain_audit(out_obj, dim=dim, a2=a2)
    except ode.InsufficientData as exc:
        return {"audit": f"skipped: {exc}"}
    contracts["x_prime_equals_y"] = audit.xprime_residual <= 1e-2
    contracts["y_prime_sign"] = audit.sign_ok
    return {"xprime_residual": audit.xprime_residual, "sign_margin": audit.sign_margin}


def _run_sim(p, out, jobs, seed):
    system = p["system"]
    snaps = tuple(p["snapshots"])
    if system == "lifespan":
        ex = analysis.lifespan_experiment(p["eps_list"], rho_amp=p["rho_amp"], cells_per_unit=p["cells_per_unit"])
        write_csv(os.path.join(out, "lifespan.csv"), ["eps", "T_shock", "T_40", "T_tv", "cells"],
                  [(r.eps, r.t20, r.t40, r.t_tv, r.cells) for r in ex.records])
        write_text(os.path.join(out, "fit.txt"), [*sorted(ex.fit.params.items()), ("r_squared", ex.fit.r_squared),
                                                 ("threshold_shift", ex.threshold_shift),
                                                 ("tv_agreement", ex.tv_agreement)])
        if p["plot"]:
            line_plot(os.path.join(out, "lifespan.svg"),
                      [("shock time", ex.fit.epsilons, ex.fit.lifespans, "dots")], "eps", "T",
                      "shock formation", logx=True, logy=True)
        contracts = {"exponent": abs(ex.fit.params["exponent"] + 1.0) <= 0.2,
                     "threshold_insensitive": ex.threshold_shift <= 0.05}
        return {"fit": ex.fit.params, "excluded": ex.excluded}, contracts
    if system == "slab-euler":
        init = slab.SlabInit(p["eps"], rho_amp=p["rho_amp"], vel_amp=p["vel_amp"])
        res = slab.run_slab_euler(init, p["n"], p["cells"], p["tmax"], samples=p["samples"], snapshot_times=snaps)
        _series_csv(out, res.series)
        mass = np.asarray(res.series.aux["mass"])
        contracts = {"mass_conservation": float(np.max(np.abs(mass / mass[0] - 1.0))) <= 1e-12}
        X = np.asarray(res.series.X)
        if p["eps"] > 0:
            contracts["x_nondecreasing_from_start"] = bool(np.all(X >= X[0] - 1e-12 * max(1.0, abs(X[0]))))
        outcome = _audit(res, 1, 1.0, contracts)
    else:
        init = mhd2d.Mhd2dInit(p["eps"], b0=p["b0"] if system == "mhd2d" else 0.0, rho_amp=p["rho_amp"],
                               vel_amp=p["vel_amp"], h_amp=p["h_amp"] if system == "mhd2d" else 0.0,
                               locked=p["locked"])
        run = mhd2d.run_mhd2d if system == "mhd2d" else mhd2d.run_euler2d
        res = run(init, p["cells"], p["tmax"], samples=p["samples"], snapshot_times=snaps)
        _series_csv(out, res.series, "min_b_over_rho" if system == "mhd2d" else None)
        mass = np.asarray(res.series.aux["mass"])
        contracts = {"mass_conservation": float(np.max(np.abs(mass / mass[0] - 1.0))) <= 1e-12}
        a2 = 1.0
        if system == "mhd2d":
            a2 = init.a2
            tb = np.asarray(res.series.aux["total_b"])
            contracts["field_conservation"] = float(np.max(np.abs(tb / tb[0] - 1.0))) <= 1e-12
            kmin = min(res.series.aux["min_b_over_rho"])
            kmax = max(res.series.aux["max_b_over_rho"])
            if p["locked"]:
                contracts["b_over_rho_drift"] = max(abs(kmin - init.b0), abs(kmax - init.b0)) <= 1e-3
            else:
                contracts["b_over_rho_lower_bound"] = kmin >= init.b0 - 1e-3
        outcome = _audit(res, 2, a2, contracts)
    _snapshots(out, res.snapshots, res.grid)
    if p["plot"]:
        t, X, Y = res.series.arrays()
        line_plot(os.path.join(out, "functionals.svg"), [("X(t)", t, X, "line"), ("Y(t)", t, Y, "line")],
                  "t", "functional", f"{system} eps={p['eps']}")
    outcome.update(shock_time=res.shock_time, grid=res.grid)
    return outcome, contracts


RUNNERS = {"weightfn": _run_weightfn, "ode": _run_ode, "verify": _run_verify, "sim": _run_sim}


def default_out(config):
    return config.out or os.path.join("runs", config.kind)


def orchestrate(config, out=None, jobs=1):
    """Run ``config``, write outputs into ``out`` and return the manifest (also written to disk)."""
    out = out or default_out(config)
    os.makedirs(out, exist_ok=True)
    manifest = RunManifest(datetime.now(timezone.utc).isoformat(timespec="seconds"), __version__,
                           config.snapshot())
    t0 = time.perf_counter()
    name = config.kind + (f":{config.params.get('mode') or config.params.get('system') or config.params.get('suite')}")
    try:
        outcome, contracts = RUNNERS[config.kind](config.params, out, jobs, config.seed)
        status = "pass" if all(contracts.values()) else "contract-violation"
        manifest.exit_code = EXIT_OK if status == "pass" else EXIT_CONTRACT
    except (ode.NumericalFailure, ode.SweepError) as exc:
        outcome, contracts, status = {}, {}, "numerical-failure"
        manifest.exit_code = EXIT_NUMERICAL
        manifest.diagnostic = f"{type(exc).__name__}: {exc}"
    except ValueError as exc:  # module precondition rejected the parameters
        outcome, contracts, status = {}, {}, "invalid-parameters"
        manifest.exit_code = EXIT_USAGE
        manifest.diagnostic = f"{type(exc).__name__}: {exc}"
    manifest.runs.append({"name": name, "status": status, "outcome": outcome,
                          "wall_seconds": time.perf_counter() - t0})
    manifest.contracts = contracts
    write_json_atomic(os.path.join(out, "manifest.json"), manifest.as_dict())
    return manifest
