"""Command-line entry point: ``kserver <subcommand> ...``.

Exit codes: 0 success, 2 parse/usage error, 3 invariant violation or replay
mismatch, 4 budget exhausted (partial result).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import formats
from . import metric as M
from . import potential as pot
from . import suites
from . import taxi as tx
from .wfa import TieBreak, check_trajectory, extended_cost_ledger, run_wfa
from .workfn import cone, load as load_wf, update

EXIT_OK, EXIT_PARSE, EXIT_VIOLATION, EXIT_PARTIAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    space: Optional[str] = None
    sequence: Optional[str] = None
    start: Optional[str] = None
    tie: str = "lexicographic"
    scale: Optional[int] = None
    seed: int = 0
    cases: Optional[int] = None
    max_states: Optional[int] = None
    max_seconds: Optional[float] = None
    max_steps: Optional[int] = None
    workers: int = 1
    output: str = "text"

    def __post_init__(self):
        for name in ("cases", "max_states", "max_seconds", "max_steps", "workers"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise formats.ParseError(f"--{name.replace('_', '-')} must be positive")


def _emit(cfg, data: dict, text: str) -> None:
    if cfg.output == "json":
        print(json.dumps(data, indent=2, default=str))
    else:
        print(text)


def parse_tie(spec: str, space: M.MetricSpace) -> TieBreak:
    policy, _, arg = spec.partition(":")
    if policy == "prefer_server":
        if not arg:
            raise formats.ParseError("prefer_server needs a point, e.g. prefer_server:6")
        return TieBreak("prefer_server", space.point(arg))
    if arg:
        raise formats.ParseError(f"tie policy {policy!r} takes no argument")
    try:
        return TieBreak(policy)
    except ValueError as e:
        raise formats.ParseError(str(e)) from None


def _start(cfg, space) -> list:
    if not cfg.start:
        raise formats.ParseError("--start is required (comma-separated points)")
    return [space.point(p.strip()) for p in cfg.start.split(",") if p.strip()]


def _expand(space: M.MetricSpace, events, refine: int):
    """Server requests for ``run_wfa``; taxi legs become every point of a refined circle along the arc."""
    if not any(ev.is_taxi for ev in events):
        return space, lambda p: p, [ev.points[0] for ev in events]
    if space.kind != "circle":
        raise formats.ParseError("taxi events are only supported on circle spaces")
    n = space.n
    circ = space.value(n * int(space.dist[0, 1]))
    fine = M.build_circle(n * refine, circ, scale=space.scale * refine)
    lift = lambda p: fine.point(space.label(p))  # noqa: E731
    step = int(fine.dist[0, 1])
    requests = []
    for ev in events:
        if not ev.is_taxi:
            requests.append(lift(ev.points[0]))
            continue
        s, t = lift(ev.points[0]), lift(ev.points[1])
        if s == t:
            requests.append(t)
            continue
        positions, _, _ = tx.circle_path(fine, s, t, fine.d(s, t) // step + 1)
        requests.extend(p // step for p in positions)
    return fine, lift, requests


def cmd_simulate(cfg, refine: int = 2) -> int:
    space = formats.load_space(cfg.space)
    events = formats.parse_sequence(cfg.sequence, space) if cfg.sequence else []
    C0 = _start(cfg, space)
    run_space, lift, requests = _expand(space, events, refine)
    tie = parse_tie(cfg.tie, run_space)
    traj = run_wfa(run_space, [lift(p) for p in C0], requests, tie)
    ledger = extended_cost_ledger(traj)
    data = formats.trajectory_to_dict(traj, run_space, ledger)
    if tie.server is not None:
        data["tie_server"] = run_space.label(tie.server)
    ok, why = check_trajectory(traj)
    k = len(C0)
    slack = k * k * run_space.diameter
    bound_ok = ledger["total"] + slack >= ledger["wfa_cost"] + ledger["opt"]
    data["valid"] = ok and bound_ok
    data["problem"] = why if not ok else (None if bound_ok else "extended-cost ledger bound fails")
    text = formats.format_trajectory(data)
    if not data["valid"]:
        text += f"\nINVARIANT VIOLATION: {data['problem']}"
    _emit(cfg, data, text)
    return EXIT_OK if data["valid"] else EXIT_VIOLATION


def cmd_verify(cfg, suite: str, table: Optional[str] = None) -> int:
    if suite not in suites.SUITES:
        raise formats.ParseError(f"unknown suite {suite!r}; choose from {', '.join(suites.SUITES)}")
    if table:
        if not cfg.space:
            raise formats.ParseError("--table needs --space")
        space = formats.load_space(cfg.space)
        with open(table) as fh:
            w = load_wf(json.load(fh), space)
        ok, witness = suites.check_table(w, suite)
        data = {"suite": suite, "passed": int(ok), "failed": int(not ok), "witness": None if ok else repr(witness)}
        _emit(cfg, data, f"{suite}: {'pass' if ok else 'FAIL'}" + ("" if ok else f"\nwitness: {witness!r}"))
        return EXIT_OK if ok else EXIT_VIOLATION
    cases = cfg.cases or suites.DEFAULT_CASES[suite]
    res = suites.SUITES[suite](cases, cfg.seed)
    data = res.as_dict()
    lines = [f"{suite}: {res.passed} passed, {res.failed} failed ({res.elapsed:.1f}s, seed {cfg.seed})"]
    for where, (p, f) in res.by_space.items():
        lines.append(f"  {where}: {p} passed, {f} failed")
    if res.witness:
        lines.append("first witness: " + json.dumps({k: v for k, v in res.witness.items() if k != "work_function"}))
    _emit(cfg, data, "\n".join(lines))
    return EXIT_OK if res.ok else EXIT_VIOLATION


def cmd_potential(cfg, formulation: str, table: Optional[str], extend: bool) -> int:
    space = formats.load_space(cfg.space)
    if extend:
        space = M.antipodal_extension(space)
    if table:
        with open(table) as fh:
            w = load_wf(json.load(fh), space)
    else:
        C0 = _start(cfg, space)
        w = cone(C0, space, len(C0))
        if cfg.sequence:
            for ev in formats.parse_sequence(cfg.sequence, space):
                if ev.is_taxi:
                    w = tx.taxi_update_closed(w, *ev.points)
                else:
                    w = update(w, ev.points[0])
    if formulation == "server":
        rep = pot.server_potential(w)
    elif formulation == "evader":
        rep = pot.evader_potential(w)
    elif formulation == "lazy_k3":
        rep = pot.lazy_potential_k3(w)
    else:
        rep = pot.mst_evader_potential(w)
    data = rep.as_dict()
    data["value_units"] = str(space.value(rep.value))
    lines = [f"scale {space.scale}; {formulation} potential = {space.value(rep.value)}"]
    if formulation == "server":
        lines.append(pot.format_terms(w, rep.achiever))
        shown = ", ".join("(" + ",".join(space.label(p) for p in a) + ")" for a in rep.achievers[:8])
        lines.append(f"achievers: {shown}" + (" ..." if len(rep.achievers) > 8 else ""))
    _emit(cfg, data, "\n".join(lines))
    return EXIT_OK


def cmd_counterexample(cfg, refine: int = 2) -> int:
    scale = cfg.scale or 2
    if scale % 2:
        raise formats.ParseError(f"scale {scale} cannot represent the half-integer points; use an even scale")
    space = tx.counterexample_space(scale)
    fine_scale_space = M.build_circle(space.n * refine, 8, scale=scale * refine)
    tie = None if cfg.tie in ("prefer_server", "prefer_server:6") else parse_tie(cfg.tie, fine_scale_space)
    rep = tx.replay_counterexample(tie=tie, refine=refine, scale=scale)
    data = {
        "ok": rep.ok,
        "C_t": list(rep.C_t),
        "w_t(C_t)": str(rep.w_t_at_C_t),
        "w_t+1(C_t)": str(rep.w_t1_at_C_t),
        "phi_t": str(rep.phi_t),
        "phi_t_achievers": [list(a) for a in rep.phi_t_achievers],
        "phi_t+1": str(rep.phi_t1),
        "phi_572_terms": [str(v) for v in rep.phi_572_terms],
        "bound_terms": [[str(v) for v in g] for g in rep.bound_terms],
        "extended_cost": str(rep.extended_cost),
        "laziness_gap": str(rep.gap),
        "supports": [{",".join(c): str(v) for c, v in s.items()} for s in rep.stages],
        "mismatches": rep.mismatches,
    }
    _emit(cfg, data, tx.format_replay(rep))
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_enumerate(cfg, checkpoint: Optional[str], resume: bool, server_only: bool, midpoints: bool) -> int:
    log = (lambda m: print(m, file=sys.stderr, flush=True)) if cfg.output == "text" else None
    census = tx.enumerate_reachable(
        taxi=not server_only,
        max_states=cfg.max_states,
        max_seconds=cfg.max_seconds,
        checkpoint=checkpoint,
        resume=resume,
        midpoint_requests=midpoints,
        log=log,
    )
    data = census.as_dict()
    text = (f"states {census.states}, processed {census.processed}, complete {census.complete}\n"
            f"violations {len(census.violations)} in {len(census.violation_classes)} class(es)")
    for v in census.violations[:10]:
        text += f"\n  {v['fingerprint']} request {v['request']} extended cost {v['extended_cost']} gap {v['gap']}"
    if not census.complete:
        text += "\npartial result (budget exhausted)" + (f"; checkpoint {checkpoint}" if checkpoint else "")
    _emit(cfg, data, text)
    return EXIT_OK if census.complete else EXIT_PARTIAL


def cmd_reconstruct_tree(cfg) -> int:
    space = formats.load_space(cfg.space)
    ok, witness = M.is_quasiconcave(space)
    if not ok:
        labels = [space.label(p) for p in witness]
        _emit(cfg, {"quasiconcave": False, "witness": labels}, f"not quasiconcave; witness {labels}")
        return EXIT_VIOLATION
    tree = M.tree_from_quasiconcave(space)
    name = lambda v: space.label(v) if v < space.n else f"v{v}"  # noqa: E731
    edges = [[name(u), name(v), str(wt / space.scale)] for u, v, wt in tree.edges]
    _emit(cfg, {"quasiconcave": True, "edges": edges},
          "\n".join(f"{u} -- {v}  {wt}" for u, v, wt in edges))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1, help="accepted for scripting; runs are single-worker")

    ap = argparse.ArgumentParser(prog="kserver", description="Work function algorithm workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run WFA on a request sequence")
    p.add_argument("--space", required=True)
    p.add_argument("--sequence")
    p.add_argument("--start", required=True, help="initial configuration, e.g. 1,6,7")
    p.add_argument("--tie", default="lexicographic", help="lexicographic | first_found | prefer_server:<point>")
    p.add_argument("--refine", type=int, default=2, help="circle refinement for taxi legs")

    p = sub.add_parser("verify", parents=[common], help="run a property suite")
    p.add_argument("suite", choices=sorted(suites.SUITES))
    p.add_argument("--cases", type=int)
    p.add_argument("--space", help="space file for --table")
    p.add_argument("--table", help="work-function dump to check instead of random cases")

    p = sub.add_parser("potential", parents=[common], help="evaluate a potential")
    p.add_argument("--space", required=True)
    p.add_argument("--start")
    p.add_argument("--sequence")
    p.add_argument("--table")
    p.add_argument("--formulation", choices=pot.FORMULATIONS, default="server")
    p.add_argument("--extend", action="store_true", help="apply the antipodal extension first")

    p = sub.add_parser("counterexample", parents=[common], help="replay the non-laziness example")
    p.add_argument("--tie", default="prefer_server", help="prefer_server (default) or another policy")
    p.add_argument("--scale", type=int, default=2)
    p.add_argument("--refine", type=int, default=2)

    p = sub.add_parser("enumerate", parents=[common], help="census of reachable work functions")
    p.add_argument("--max-states", type=int)
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--checkpoint")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--server-only", action="store_true")
    p.add_argument("--midpoint-requests", action="store_true")

    p = sub.add_parser("reconstruct-tree", parents=[common], help="tree realising a quasiconcave metric")
    p.add_argument("--space", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            space=getattr(args, "space", None),
            sequence=getattr(args, "sequence", None),
            start=getattr(args, "start", None),
            tie=getattr(args, "tie", "lexicographic"),
            scale=getattr(args, "scale", None),
            seed=args.seed,
            cases=getattr(args, "cases", None),
            max_states=getattr(args, "max_states", None),
            max_seconds=getattr(args, "max_seconds", None),
            workers=args.workers,
            output=args.output,
        )
        if args.command == "simulate":
            return cmd_simulate(cfg, args.refine)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite, args.table)
        if args.command == "potential":
            return cmd_potential(cfg, args.formulation, args.table, args.extend)
        if args.command == "counterexample":
            return cmd_counterexample(cfg, args.refine)
        if args.command == "enumerate":
            return cmd_enumerate(cfg, args.checkpoint, args.resume, args.server_only, args.midpoint_requests)
        return cmd_reconstruct_tree(cfg)
    except ValueError as e:  # parse, metric and size-limit errors all derive from it
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
