"""Command line: ``helfrich-ch run|check-energy|check-geometry|check-contdep|check-separation|selftest``."""

from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _pin_threads() -> None:
    # must run before numpy is imported; one thread keeps results bitwise reproducible
    n = os.environ.get("HELFRICH_CH_THREADS", "1")
    for var in _THREAD_VARS:
        os.environ[var] = n


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="helfrich-ch", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="integrate a configuration and write diagnostics")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--resume", help="checkpoint to continue from")
    for name, text in (("check-energy", "energy identity refinement and monotone decay"),
                       ("check-geometry", "variation formulas and the Lagrangian expansion"),
                       ("check-contdep", "twin-run continuous dependence"),
                       ("check-separation", "constraint conservation and empirical separation"),
                       ("selftest", "table-driven examples and property suites")):
        c = sub.add_parser(name, help=text)
        c.add_argument("--config", required=True)
    return ap


def _report(verdicts) -> int:
    from .checks import all_passed

    for v in verdicts:
        print(v.line(), flush=True)
    ok = all_passed(verdicts)
    print(f"verdict overall {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    _pin_threads()
    args = _parser().parse_args(argv)

    from .config import ConfigError, load_config

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    from . import checks

    if args.command == "run":
        from .dynamics import SolverBreakdownError
        from .io import CheckpointError
        from .run import run

        try:
            run(cfg, args.out, args.resume)
        except CheckpointError as exc:
            print(f"checkpoint error: {exc}", file=sys.stderr)
            return 2
        except SolverBreakdownError as exc:
            print(f"solver breakdown: {exc}", file=sys.stderr)
            return 1
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return 1
        return 0
    if args.command == "check-energy":
        lr = checks.long_run(cfg)
        return _report([checks.check_energy_refinement(cfg), checks.check_energy_decay(lr)])
    if args.command == "check-geometry":
        return _report(checks.check_geometry(cfg))
    if args.command == "check-contdep":
        return _report(checks.check_contdep(cfg))
    if args.command == "check-separation":
        lr = checks.long_run(cfg)
        return _report(checks.check_constraints(lr) + checks.check_separation(lr))
    return _report(checks.run_selftest(cfg))


if __name__ == "__main__":
    sys.exit(main())
