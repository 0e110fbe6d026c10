"""Command-line entry point: run experiment grids, ingest PrefLib profiles,
and re-verify dumped traces."""

from __future__ import annotations

import argparse
import sys

from .batch import ConfigError, load_config, run_experiment, run_preflib, verify_trace_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ldvote",
        description="Iterative Plurality voting under local dominance: batch simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment grid from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=1)

    p_pre = sub.add_parser("preflib", help="run the configured sweep on a PrefLib profile")
    p_pre.add_argument("config")
    p_pre.add_argument("profile")
    p_pre.add_argument("--workers", type=int, default=1)

    p_ver = sub.add_parser("verify", help="re-run the invariant audit on dumped traces")
    p_ver.add_argument("trace_dir")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            out = run_experiment(cfg, workers=args.workers)
            print(f"wrote {out}")
        elif args.command == "preflib":
            cfg = load_config(args.config, for_preflib=True)
            out = run_preflib(cfg, args.profile, workers=args.workers)
            print(f"wrote {out}")
        else:
            files, checked, violations = verify_trace_dir(args.trace_dir)
            print(f"{files} file(s), {checked} checked, {violations} violation(s)")
            return 1 if violations else 0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
