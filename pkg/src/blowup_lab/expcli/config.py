"""Experiment configuration: TOML files with one table per experiment kind.

Grammar (TOML 1.0)::

    kind = "ode"            # weightfn | ode | verify | sim
    seed = 42               # optional, default 0
    out = "runs/ode-n3"     # optional output directory

    [ode]                   # exactly one table, named after ``kind``
    mode = "sweep"
    n = 3
    eps = [0.04, 0.06, 0.08, 0.1, 0.14, 0.2]
    ...

Every key of every table is listed in ``SCHEMA`` with its type, default and
range; unknown keys are errors. Validation reports all problems at once.
"""

import math
from dataclasses import dataclass, field

import tomli

KINDS = ("weightfn", "ode", "verify", "sim")


class ConfigError(Exception):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


REQUIRED = object()


@dataclass(frozen=True)
class Key:
    kind: type  # float, int, bool, str or list (list of floats)
    default: object = REQUIRED
    check: object = None  # callable returning an error string or None
    choices: tuple = ()
    modes: tuple = ()  # modes in which the key is required (empty: governed by default)


def _range(lo=None, hi=None, lo_open=False, msg=None):
    def check(v):
        bad = (lo is not None and (v <= lo if lo_open else v < lo)) or (hi is not None and v > hi)
        if bad:
            return msg
        return None
    return check


def _eps_list(v):
    if len(v) < 4:
        return "needs at least 4 values"
    if any(not e > 0 for e in v):
        return "values must be positive"
    if max(v) < 4 * min(v):
        return "must span at least a factor of 4"
    return None


_N = Key(int, REQUIRED, _range(1, 3, msg="n must be 1..3"))

SCHEMA = {
    "weightfn": {
        "mode": Key(str, REQUIRED, choices=("eval", "ball", "envelope")),
        "n": _N,
        "r": Key(float, 0.0, _range(0.0, 700.0, msg="r must be in [0, 700]"), modes=("eval",)),
        "R": Key(float, 1.0, _range(0.0, 700.0, msg="R must be in [0, 700]"), modes=("ball",)),
        "rmax": Key(float, 50.0, _range(0.0, 700.0, lo_open=True, msg="rmax must be in (0, 700]")),
        "steps": Key(int, 501, _range(2, 10 ** 7, msg="steps must be >= 2")),
    },
    "ode": {
        "mode": Key(str, REQUIRED, choices=("run", "sweep")),
        "n": _N,
        "C": Key(float, 1.0, _range(0.0, lo_open=False, msg="C must be >= 0")),
        "R0": Key(float, 1.0, _range(1.0, msg="R0 must be >= 1")),
        "a": Key(float, 1.0, _range(1.0, msg="a must be >= 1")),
        "domain_factor": Key(float, 1.0, _range(0.0, lo_open=True, msg="domain_factor must be > 0")),
        "x0": Key(float, 1.0, _range(0.0, msg="x0 must be >= 0")),
        "eps": Key(float, REQUIRED, _range(0.0, lo_open=True, msg="eps must be > 0"), modes=("run",)),
        "eps_list": Key(list, REQUIRED, _eps_list, modes=("sweep",)),
        "fit": Key(str, "auto", choices=("auto", "power", "exp")),
        "horizon": Key(float, 1e6, _range(0.0, lo_open=True, msg="horizon must be > 0")),
        "threshold": Key(float, 1e9, _range(0.0, lo_open=True, msg="threshold must be > 0")),
        "plot": Key(bool, True),
    },
    "verify": {
        "suite": Key(str, "all", choices=("euler", "elastic", "all")),
        "resolution": Key(int, 96, _range(16, 1024, msg="resolution must be in 16..1024")),
        "count": Key(int, 10, _range(1, 1000, msg="count must be in 1..1000")),
        "holder_count": Key(int, 50, _range(1, 10000, msg="holder_count must be >= 1")),
        "lam": Key(float, 100.0, _range(0.0, lo_open=True, msg="lam must be > 0")),
        "sigma3": Key(float, 0.0),
    },
    "sim": {
        "system": Key(str, REQUIRED, choices=("slab-euler", "mhd2d", "euler2d", "lifespan")),
        "eps": Key(float, 0.1, _range(0.0, msg="eps must be >= 0")),
        "eps_list": Key(list, REQUIRED, _eps_list, modes=("lifespan",)),
        "n": Key(int, 1, _range(1, 3, msg="n must be 1..3")),
        "cells": Key(int, None, _range(16, 10 ** 6, msg="cells must be in 16..1e6")),
        "tmax": Key(float, None, _range(0.0, lo_open=True, msg="tmax must be > 0")),
        "samples": Key(int, 400, _range(2, 10 ** 6, msg="samples must be >= 2")),
        # None: default depends on the system, see SIM_DEFAULTS
        "rho_amp": Key(float, None),
        "vel_amp": Key(float, None),
        "b0": Key(float, 1.0, _range(0.0, msg="b0 must be >= 0")),
        "h_amp": Key(float, 0.5, _range(0.0, msg="h_amp must be >= 0")),
        "locked": Key(bool, False),
        "cells_per_unit": Key(int, 6400, _range(100, 10 ** 6, msg="cells_per_unit must be >= 100")),
        "snapshots": Key(list, []),
        "plot": Key(bool, True),
    },
}

SIM_DEFAULTS = {
    "slab-euler": {"cells": 4096, "tmax": 2.0, "rho_amp": -0.5, "vel_amp": 5.0},
    "mhd2d": {"cells": 384, "tmax": 0.5, "rho_amp": -0.5, "vel_amp": 8.0},
    "euler2d": {"cells": 384, "tmax": 0.5, "rho_amp": -0.5, "vel_amp": 8.0},
    "lifespan": {"cells": None, "tmax": None, "rho_amp": 1.0, "vel_amp": 0.0},
}

MODE_KEY = {"weightfn": "mode", "ode": "mode", "verify": None, "sim": "system"}


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    seed: int = 0
    out: str = None
    source: str = None
    raw: dict = field(default_factory=dict)

    def snapshot(self):
        return {"kind": self.kind, "seed": self.seed, "out": self.out, self.kind: dict(self.params)}


def _coerce(name, key, value):
    if key.kind is bool:
        if isinstance(value, bool):
            return value, None
        return None, f"{name}: expected true/false"
    if key.kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value, None
        return None, f"{name}: expected an integer"
    if key.kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
            return float(value), None
        return None, f"{name}: expected a finite number"
    if key.kind is str:
        if isinstance(value, str):
            return value, None
        return None, f"{name}: expected a string"
    if key.kind is list:
        if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return [float(v) for v in value], None
        return None, f"{name}: expected a list of numbers"
    raise TypeError(key.kind)


def validate(doc, source=None):
    """Turn a parsed document into an ExperimentConfig or raise ConfigError with every problem."""
    errors = []
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError([f"kind: must be one of {', '.join(KINDS)} (got {kind!r})"])
    for k in doc:
        if k not in ("kind", "seed", "out", kind):
            errors.append(f"{k}: unknown key")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append("seed: expected a non-negative integer")
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        errors.append("out: expected a string")
    table = doc.get(kind, {})
    if not isinstance(table, dict):
        raise ConfigError(errors + [f"{kind}: expected a table"])
    schema = SCHEMA[kind]
    for k in table:
        if k not in schema:
            errors.append(f"{kind}.{k}: unknown key")
    mode_key = MODE_KEY[kind]
    mode = table.get(mode_key) if mode_key else None
    params = {}
    for name, key in schema.items():
        full = f"{kind}.{name}"
        if name in table:
            val, err = _coerce(full, key, table[name])
            if err:
                errors.append(err)
                continue
            if key.choices and val not in key.choices:
                errors.append(f"{full}: must be one of {', '.join(key.choices)}")
                continue
            if key.check is not None:
                msg = key.check(val)
                if msg:
                    errors.append(f"{full}: {msg}")
                    continue
            params[name] = val
        elif key.default is REQUIRED:
            if not key.modes or mode in key.modes:
                errors.append(f"{full}: required key missing")
        else:
            params[name] = key.default
    errors += _cross_checks(kind, params)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(kind, params, seed, out, source, doc)


def _cross_checks(kind, p):
    errs = []
    if kind == "ode" and p.get("mode") == "run" and "eps" in p and "x0" in p:
        if p.get("threshold", 1e9) <= p["eps"] * p["x0"]:
            errs.append("ode.threshold: must exceed the initial value eps*x0")
    if kind == "sim" and "system" in p:
        system = p["system"]
        for k, v in SIM_DEFAULTS[system].items():
            if p.get(k) is None:
                p[k] = v
        if system in ("slab-euler", "mhd2d", "euler2d") and p["rho_amp"] > 0:
            errs.append("sim.rho_amp: must be <= 0")
        if system == "lifespan":
            if any(e * max(p["rho_amp"], 0.0) > 1.0 for e in p.get("eps_list", [])):
                errs.append("sim.eps_list: eps*rho_amp must be <= 1")
            if p["rho_amp"] <= 0:
                errs.append("sim.rho_amp: lifespan runs need rho_amp > 0 (set e.g. 1.0)")
    return errs


def load_config(path):
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError([f"{path}: no such file"]) from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: parse error: {exc}"]) from None
    return validate(doc, str(path))
