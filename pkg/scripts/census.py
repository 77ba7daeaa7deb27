"""Full closure of reachable 3-server work functions on the circle of circumference 8.

Resumable: rerun with the same --checkpoint to continue.  Writes a JSON summary.
"""

import argparse
import json
import sys
import time

from kserver.taxi import enumerate_reachable


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--checkpoint", default="census_ckpt.npz")
    ap.add_argument("--out", default="census.json")
    ap.add_argument("--max-states", type=int)
    ap.add_argument("--max-seconds", type=float)
    ap.add_argument("--server-only", action="store_true")
    ap.add_argument("--midpoint-requests", action="store_true")
    args = ap.parse_args(argv)

    def log(msg):
        print(time.strftime("%H:%M:%S"), msg, flush=True)

    census = enumerate_reachable(
        taxi=not args.server_only,
        max_states=args.max_states,
        max_seconds=args.max_seconds,
        checkpoint=args.checkpoint,
        resume=True,
        midpoint_requests=args.midpoint_requests,
        log=log,
    )
    summary = census.as_dict()
    summary["violation_classes_list"] = [[k[0].hex(), k[1]] for k in census.violation_classes]
    with open(args.out, "w") as fh:
        json.dump(summary, fh, indent=2)
    log(f"states={census.states} processed={census.processed} complete={census.complete} "
        f"violations={len(census.violations)} classes={len(census.violation_classes)}")
    return 0 if census.complete else 4


if __name__ == "__main__":
    sys.exit(main())
