import json
import xml.etree.ElementTree as ET

import pytest

from blowup_lab.expcli import ConfigError, load_config, orchestrate, validate
from blowup_lab.expcli.cli import main
from blowup_lab.expcli.output import fmt, write_csv

ODE_SWEEP = """
kind = "ode"
seed = 3

[ode]
mode = "sweep"
n = 1
eps_list = [0.05, 0.08, 0.12, 0.2, 0.3, 0.4]
"""


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_ode_config_valid(tmp_path):
    cfg = load_config(_write(tmp_path, ODE_SWEEP))
    assert cfg.kind == "ode" and cfg.seed == 3
    assert cfg.params["fit"] == "auto" and cfg.params["C"] == 1.0


def test_n_out_of_range_rejected():
    with pytest.raises(ConfigError) as info:
        validate({"kind": "ode", "ode": {"mode": "sweep", "n": 4, "eps_list": [0.1, 0.2, 0.3, 0.4]}})
    assert any("n must be 1..3" in e for e in info.value.errors)


def test_missing_eps_names_key():
    with pytest.raises(ConfigError) as info:
        validate({"kind": "ode", "ode": {"mode": "run", "n": 2}})
    assert info.value.errors == ["ode.eps: required key missing"]


def test_all_errors_reported():
    doc = {"kind": "sim", "bogus": 1, "sim": {"system": "slab-euler", "cells": 2, "tmax": -1.0, "colour": "red"}}
    with pytest.raises(ConfigError) as info:
        validate(doc)
    errs = " | ".join(info.value.errors)
    for fragment in ("bogus", "sim.cells", "sim.tmax", "sim.colour"):
        assert fragment in errs
    assert len(info.value.errors) == 4


def test_parse_error_has_position(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, 'kind = "ode"\n[ode\nn = 1\n'))
    assert "line 2" in info.value.errors[0]


def test_wrong_type_rejected():
    with pytest.raises(ConfigError) as info:
        validate({"kind": "weightfn", "weightfn": {"mode": "eval", "n": "three"}})
    assert "expected an integer" in info.value.errors[0]


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, 2.0 ** 60, -7.25):
        assert float(fmt(v)) == v
    assert fmt(True) == "true" and fmt("x") == "x"


def test_ode_sweep_outputs_and_determinism(tmp_path):
    cfg = load_config(_write(tmp_path, ODE_SWEEP))
    m1 = orchestrate(cfg, out=str(tmp_path / "a"))
    m2 = orchestrate(cfg, out=str(tmp_path / "b"))
    assert m1.exit_code == 0 and m1.contracts["scaling_law"]
    for name in ("runs.csv", "fit.txt", "lifespan.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "runs.csv").read_text().splitlines()[0]
    assert header == "eps,T_blow,terminationReason"
    ET.parse(tmp_path / "a" / "lifespan.svg")
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 3 and manifest["artifact_version"]


def test_verify_suite_exit_zero(tmp_path):
    doc = {"kind": "verify", "verify": {"suite": "euler", "holder_count": 10}}
    m = orchestrate(validate(doc), out=str(tmp_path))
    assert m.exit_code == 0
    lines = (tmp_path / "identities.csv").read_text().splitlines()
    assert lines[0] == "check,resolution,residual,pass" and len(lines) == 11


def test_vacuum_amplitude_gives_diagnostic(tmp_path):
    doc = {"kind": "sim", "sim": {"system": "slab-euler", "eps": 0.8, "rho_amp": -1.0, "cells": 128}}
    m = orchestrate(validate(doc), out=str(tmp_path))
    assert m.exit_code == 3
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "VacuumError" in manifest["diagnostic"] and manifest["exit_code"] == 3


def test_sim_outputs(tmp_path):
    doc = {"kind": "sim", "sim": {"system": "slab-euler", "eps": 0.1, "cells": 512, "tmax": 1.0,
                                  "samples": 250, "snapshots": [0.5]}}
    m = orchestrate(validate(doc), out=str(tmp_path))
    assert m.exit_code == 0, m.contracts
    header = (tmp_path / "series.csv").read_text().splitlines()[0]
    assert header == "t,X,Y,maxgrad,minBoverRho"
    assert (tmp_path / "snapshot_0000.bin").exists()
    ET.parse(tmp_path / "functionals.svg")


def test_cli_weightfn_stdout(capsys):
    assert main(["weightfn", "eval", "--n", "3", "--r", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "r,F,ratio"
    assert float(out[1].split(",")[1]) == pytest.approx(4 * 3.141592653589793)


def test_cli_usage_errors(capsys):
    assert main(["weightfn", "eval", "--n", "4", "--r", "1"]) == 2
    assert "n must be 1..3" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2
    assert main(["ode", "run", "--n", "1", "--eps", "0.1", "--jobs", "0"]) == 2


def test_cli_contract_violation(tmp_path):
    # a coarse 2D grid cannot meet the X' = Y audit tolerance
    code = main(["sim", "euler2d", "--eps", "0.1", "--cells", "48", "--tmax", "0.3", "--out", str(tmp_path)])
    assert code == 1
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["contracts"]["x_prime_equals_y"] is False


def test_cli_config_with_override(tmp_path):
    cfg = _write(tmp_path, ODE_SWEEP)
    out = tmp_path / "run"
    assert main(["ode", "sweep", "--config", str(cfg), "--n", "2", "--eps-list", "0.01,0.02,0.03,0.05",
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["ode"]["n"] == 2


def test_csv_writer_is_deterministic(tmp_path):
    rows = [(0.1, 1 / 3, "x"), (2.0, float("inf"), True)]
    write_csv(tmp_path / "a.csv", ["a", "b", "c"], rows)
    write_csv(tmp_path / "b.csv", ["a", "b", "c"], rows)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
