"""Command line interface: ``catbranch {simulate,classical,verify,presets}``.

Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import PRESET_NOTES, PRESETS, format_config, load_config, preset_config
from .errors import NumericalError, ParseError, ValidationError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _load(args):
    if args.config and args.preset:
        raise ParseError("give either --config or --preset, not both")
    if args.config:
        return load_config(args.config)
    if args.preset:
        if args.preset not in PRESETS:
            raise ParseError(f"unknown preset {args.preset!r}")
        return preset_config(args.preset)
    raise ParseError("--config <path> (or --preset <name>) is required")


def cmd_simulate(args) -> int:
    from .runner import run

    rc = _load(args)
    start = time.perf_counter()
    res = run(rc, args.out)
    out = args.out or rc.out_dir
    print(f"wrote {out}/ in {time.perf_counter() - start:.2f} s")
    print(f"mean i_max {res.correlation.mean_i_max:.6g}  retention vs decoupled {res.retention:.4g}")
    print(f"mean B {res.correlation.mean_B:.6g}  crossings {len(res.correlation.at_crossings)}")
    return EXIT_OK


def cmd_classical(args) -> int:
    from .runner import run_classical

    rc = _load(args)
    rep = run_classical(rc, args.out)
    print(f"wrote {args.out or rc.out_dir}/: mean B {rep.mean_B:.6g}, {rep.crossing_count} crossings")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .runner import verify

    rc = _load(args)
    checks = verify(rc, grid3d=args.grid3d, report=lambda c: print(c.line(), flush=True))
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_presets(args) -> int:
    for name in PRESETS:
        print(f"{name}: {PRESET_NOTES[name]}")
        if args.verbose:
            print(format_config(preset_config(name)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catbranch", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def config_args(sp, out=True):
        sp.add_argument("--config", help="run configuration file (key = value with [sections])")
        sp.add_argument("--preset", help="use a built-in preset instead of a config file")
        if out:
            sp.add_argument("--out", help="output directory (overrides [output] dir)")

    sp = sub.add_parser("simulate", help="full quantum + classical run, writes CSV files")
    config_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("classical", help="classical trajectories, branching and crossings only")
    config_args(sp)
    sp.set_defaults(func=cmd_classical)

    sp = sub.add_parser("verify", help="oracle cross-checks, one PASS/FAIL line each")
    config_args(sp, out=False)
    sp.add_argument("--grid3d", action="store_true", help="include the slow 3-D split-operator check")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("presets", help="list built-in presets")
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
