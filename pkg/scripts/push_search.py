"""Random search for a reachable work function where the last request cannot be pushed last.

For k = 3 the property always holds; this looks for k >= 4 failures.  Prints a
JSON summary and dumps the first failing work function, if any.
"""

import argparse
import json
import sys
import time

import numpy as np

from kserver import metric as M
from kserver.potential import search_push_failure
from kserver.workfn import dump


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--circle", type=int, default=8, help="number of points on the circle")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the failing work function here")
    args = ap.parse_args(argv)

    space = M.build_circle(args.circle, args.circle)
    start = time.time()
    found = search_push_failure(space, args.k, np.random.default_rng(args.seed), args.trials)
    summary = {
        "space": f"circle({args.circle})",
        "k": args.k,
        "trials": args.trials,
        "seed": args.seed,
        "failure": None,
        "elapsed_seconds": round(time.time() - start, 1),
    }
    if found:
        summary["failure"] = {"trial": found["trial"], "set": [int(p) for p in found["set"]],
                              "last_request": found["work_function"].last_request}
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(dump(found["work_function"]), fh)
    print(json.dumps(summary, indent=2))
    return 3 if found else 0


if __name__ == "__main__":
    sys.exit(main())
