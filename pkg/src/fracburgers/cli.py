"""Command-line entry point: ``fracburgers run|verify|report|list-generators``."""

from __future__ import annotations

import argparse
import os
import sys


def _cmd_run(args) -> int:
    from .config import SpecError, load_spec
    from .experiment import EXIT_SCHEMA, resolve_output, run_spec

    try:
        spec = load_spec(args.spec)
    except SpecError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    out = resolve_output(spec, args.out)
    try:
        code, traj = run_spec(spec, out)
    except FileExistsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    if traj.halt:
        h = traj.halt
        print(f"halted at t={h['t']:.6g}: {h['reason']} ({h['value']:.4g} > {h['threshold']:.4g}); "
              f"state dumped to {out}", file=sys.stderr)
    else:
        print(f"{spec.name}: {len(traj.snapshots)} snapshots, {len(traj.diagnostics)} diagnostic rows -> {out}")
    return code


def _cmd_verify(args) -> int:
    from .acceptance import run_tier

    only = None
    if args.only:
        only = [int(x) for x in args.only.split(",") if x.strip()]
    results = run_tier(args.tier, only=only, stream=sys.stdout)
    return 0 if all(r.passed for r in results) else 1


def _cmd_report(args) -> int:
    from .experiment import MixedHashError, report

    try:
        print(report(args.dirs, force=args.force), end="")
    except MixedHashError as e:
        print(f"error: {e} (use --force to override)", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def _cmd_list(args) -> int:
    from .generators import GENERATORS

    for name, gen in sorted(GENERATORS.items()):
        params = ", ".join(f"{k}={v!r}" for k, v in gen.params().items())
        print(f"{name} ({gen.dim}D): {gen.summary}\n    params: {params}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracburgers", description=__doc__)
    p.add_argument("--threads", type=int, default=None,
                   help="cap FFT worker threads (same as FRACBURGERS_NUM_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment spec file")
    r.add_argument("spec", help="TOML experiment spec")
    r.add_argument("--out", default=None, help="output directory (default: spec 'output' or runs/<name>)")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--tier", choices=["fast", "full"], default="fast")
    v.add_argument("--only", default=None, help="comma-separated criterion numbers")
    v.set_defaults(func=_cmd_verify)

    rep = sub.add_parser("report", help="summarize finished run directories")
    rep.add_argument("dirs", nargs="+")
    rep.add_argument("--force", action="store_true", help="accept directories with mixed spec hashes")
    rep.set_defaults(func=_cmd_report)

    lg = sub.add_parser("list-generators", help="list initial-data generators")
    lg.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        # read when the spectral module is first imported
        os.environ["FRACBURGERS_NUM_THREADS"] = str(max(1, args.threads))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
