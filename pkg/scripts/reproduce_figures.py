"""Run every named figure preset through the command-line interface.

Usage: python scripts/reproduce_figures.py [--out DIR] [--t-final T] [--workers N] [ids ...]
"""

import argparse
import sys
import time

from dwlattice.cli import main
from dwlattice.presets import PRESET_IDS


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("ids", nargs="*", default=list(PRESET_IDS), help="preset ids (default: all)")
    p.add_argument("--out", default="figures_out")
    p.add_argument("--t-final", type=float, help="shorten every run, for smoke tests")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int)
    return p.parse_args(argv)


def run(args) -> int:
    failed = []
    for pid in args.ids:
        argv = ["preset", "--preset", pid, "--out", args.out, "--workers", str(args.workers)]
        if args.t_final is not None:
            argv += ["--t-final", str(args.t_final)]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        start = time.perf_counter()
        code = main(argv)
        print(f"{pid}: exit {code} in {time.perf_counter() - start:.1f} s", flush=True)
        if code:
            failed.append(pid)
    if failed:
        print("failed: " + " ".join(failed), file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
