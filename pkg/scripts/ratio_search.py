"""Worst ``WFA cost - k * OPT`` over request sequences on small spaces.

Exhaustive up to ``--length`` by default; ``--random`` samples sequences instead.
"""

import argparse
import json
import sys

import numpy as np

from kserver import formats
from kserver.suites import random_tree_space
from kserver.wfa import ratio_report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--space", help="metric description file (default: random 5-node tree)")
    ap.add_argument("--start", required=True, help="initial configuration, e.g. a,c")
    ap.add_argument("--length", type=int, default=6)
    ap.add_argument("--random", type=int, metavar="SAMPLES", help="sample this many sequences")
    ap.add_argument("--budget", type=int, help="stop after this many sequences")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if args.space:
        space = formats.load_space(args.space)
    else:
        space = random_tree_space(np.random.default_rng(args.seed), 5)
    C0 = [space.point(p.strip()) for p in args.start.split(",")]
    rep = ratio_report(space, C0, mode="random" if args.random else "exhaustive", length=args.length,
                       samples=args.random or 0, seed=args.seed, budget=args.budget)
    rep["worst_sequence"] = [space.label(p) for p in rep["worst_sequence"] or []]
    print(json.dumps(rep, indent=2))
    if not rep["within_bound"]:
        return 3
    return 4 if rep["partial"] else 0


if __name__ == "__main__":
    sys.exit(main())
