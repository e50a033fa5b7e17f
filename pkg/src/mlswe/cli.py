"""Command line entry point.

Subcommands:
  run            advance one configured scenario and write artifacts
  sweep          rerun a scenario over a parameter range (degree sweeps)
  check          built-in verification suites
  list-scenarios show available scenarios

Exit codes: 0 on success, 2 when a check suite fails, 1 on any
runtime or configuration error (malformed command lines included, so
code 2 stays unambiguous).
"""

import argparse
import sys

import numpy as np

from . import __version__
from .checks import SUITES, run_suite
from .config import ConfigError, load_config, parse_sweep_spec
from .driver import run_scenario, run_sweep
from .equations import ModelError
from .fv import SolverError
from .scenarios import list_scenarios


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="mlswe",
                description="multilayer shallow water solver driver")
    p.add_argument("--version", action="version",
                   version=f"mlswe {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scenario from a config file")
    run.add_argument("--config", required=True, help="key = value file")
    run.add_argument("--out", help="output directory (overrides config)")

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("--config", required=True, help="key = value file")
    sweep.add_argument("--param", required=True,
                       help="range spec like N=3..15 or N=3,5,7")
    sweep.add_argument("--out", help="output directory (overrides config)")

    chk = sub.add_parser("check", help="run a verification suite")
    chk.add_argument("--suite", required=True, choices=sorted(SUITES),
                     help="which property family to verify")

    sub.add_parser("list-scenarios", help="show available scenarios")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        from dataclasses import replace

        cfg = replace(cfg, output_dir=args.out)
    res = run_scenario(cfg)
    rec = res.final_record
    print(f"scenario {res.setup.name} ({res.solver}), "
          f"{res.steps} steps to t = {res.t:g} "
          f"in {res.wall_time:.2f} s")
    print(f"  entropy {rec.entropy:.12e}, worst relative rise "
          f"{res.worst_entropy_rise:.3e}")
    print(f"  max lake-at-rest error {float(np.max(rec.lar_linf)):.3e}, "
          f"min stage height {res.min_stage_h:.3e}")
    if res.output_dir is not None:
        print(f"  artifacts in {res.output_dir}")
    if res.aborted:
        print(f"aborted: {res.error}", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        from dataclasses import replace

        cfg = replace(cfg, output_dir=args.out)
    key, values = parse_sweep_spec(args.param)
    sw = run_sweep(cfg, key, values)
    M = len(sw.errors[0])
    head = " ".join(f"{f'l2_h{m + 1}':>12}" for m in range(M))
    print(f"{key:>6} {head}")
    for val, err in zip(sw.values, sw.errors):
        cells = " ".join(f"{e:12.4e}" for e in err)
        print(f"{val:>6} {cells}")
    if cfg.output_dir:
        print(f"artifacts in {cfg.output_dir}")
    return 0


def _cmd_check(args) -> int:
    ok, items = run_suite(args.suite)
    for it in items:
        print(it.line())
    if not ok:
        print(f"suite {args.suite}: FAIL", file=sys.stderr)
        return 2
    print(f"suite {args.suite}: all passed")
    return 0


def _cmd_list(_args) -> int:
    for name, summary in list_scenarios():
        print(f"{name:20} {summary}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "check": _cmd_check,
        "list-scenarios": _cmd_list,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ModelError, SolverError, OSError, KeyError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
