"""Command line entry point ``blowup-lab``.

Flags build the same document a TOML config would; with ``--config`` the
file is loaded first and flags given on the command line override its keys.
"""

import argparse
import io
import os
import sys

import tomli

from .config import ConfigError, validate
from .orchestrate import EXIT_CONTRACT, EXIT_OK, EXIT_USAGE, orchestrate, weightfn_table
from .output import fmt


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _common(p):
    p.add_argument("--config", help="TOML experiment config; flags override its keys")
    p.add_argument("--out", help="output directory (weightfn: output CSV path)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="blowup-lab", description="Blow-up experiments for compressible flows.")
    kinds = parser.add_subparsers(dest="kind", required=True)

    w = kinds.add_parser("weightfn", help="evaluate the radial weight F_n").add_subparsers(dest="mode", required=True)
    for mode, extra in (("eval", ["--r"]), ("ball", ["--R"]), ("envelope", ["--rmax", "--steps"])):
        p = w.add_parser(mode)
        p.add_argument("--n", type=int)
        for flag in extra:
            p.add_argument(flag, type=int if flag == "--steps" else float)
        _common(p)

    o = kinds.add_parser("ode", help="comparison ODE runs and lifespan sweeps").add_subparsers(dest="mode", required=True)
    run = o.add_parser("run")
    sweep = o.add_parser("sweep")
    for p in (run, sweep):
        p.add_argument("--n", type=int)
        p.add_argument("--C", type=float)
        p.add_argument("--R0", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--x0", type=float)
        p.add_argument("--omega-factor", dest="domain_factor", type=float)
        p.add_argument("--horizon", type=float)
        p.add_argument("--threshold", type=float)
        p.add_argument("--no-plot", dest="plot", action="store_const", const=False)
        _common(p)
    run.add_argument("--eps", type=float)
    sweep.add_argument("--eps-list", dest="eps_list", type=_floats, help="comma or space separated")
    sweep.add_argument("--fit", choices=("auto", "power", "exp"))

    v = kinds.add_parser("verify", help="integral identity audit").add_subparsers(dest="mode", required=True)
    p = v.add_parser("identities")
    p.add_argument("--suite", choices=("euler", "elastic", "all"))
    p.add_argument("--resolution", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--lam", type=float)
    _common(p)

    s = kinds.add_parser("sim", help="finite-volume simulations").add_subparsers(dest="system", required=True)
    for system in ("slab-euler", "mhd2d", "euler2d", "lifespan"):
        p = s.add_parser(system)
        if system == "lifespan":
            p.add_argument("--eps-list", dest="eps_list", type=_floats)
            p.add_argument("--cells-per-unit", dest="cells_per_unit", type=int)
        else:
            p.add_argument("--eps", type=float)
            p.add_argument("--cells", type=int)
            p.add_argument("--tmax", type=float)
            p.add_argument("--samples", type=int)
            p.add_argument("--vel-amp", dest="vel_amp", type=float)
            p.add_argument("--snapshots", type=_floats, help="snapshot times")
        if system == "slab-euler":
            p.add_argument("--n", type=int)
        if system == "mhd2d":
            p.add_argument("--b0", type=float)
            p.add_argument("--h-amp", dest="h_amp", type=float)
            p.add_argument("--locked", action="store_const", const=True)
        p.add_argument("--rho-amp", dest="rho_amp", type=float)
        p.add_argument("--no-plot", dest="plot", action="store_const", const=False)
        _common(p)
    return parser


TABLE_KEYS = {"kind", "config", "out", "jobs", "seed"}


def _document(args):
    doc = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomli.load(fh)
        except FileNotFoundError:
            raise ConfigError([f"{args.config}: no such file"]) from None
        except tomli.TOMLDecodeError as exc:
            raise ConfigError([f"{args.config}: parse error: {exc}"]) from None
        if doc.get("kind", args.kind) != args.kind:
            raise ConfigError([f"kind: config is for {doc.get('kind')!r} but the command is {args.kind!r}"])
    doc["kind"] = args.kind
    table = dict(doc.get(args.kind, {}))
    for key, val in vars(args).items():
        if key in TABLE_KEYS or val is None or (args.kind == "verify" and key == "mode"):
            continue
        table[key] = val
    doc[args.kind] = table
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None and args.kind != "weightfn":
        doc["out"] = args.out
    return doc


def _weightfn(config, out):
    header, rows = weightfn_table(config.params)
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK if all(row[1] > 0 for row in rows) else EXIT_CONTRACT


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = validate(_document(args), args.config)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if args.kind == "weightfn" and not args.config:
        try:
            return _weightfn(config, args.out)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    out = args.out if args.kind != "weightfn" else None
    manifest = orchestrate(config, out=out, jobs=args.jobs)
    run = manifest.runs[-1]
    failed = [k for k, ok in manifest.contracts.items() if not ok]
    print(f"{run['name']}: {run['status']} ({run['wall_seconds']:.1f} s)")
    if manifest.diagnostic:
        print(f"diagnostic: {manifest.diagnostic}", file=sys.stderr)
    if failed:
        print(f"failed contracts: {', '.join(failed)}", file=sys.stderr)
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
