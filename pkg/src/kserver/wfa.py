"""The work function algorithm, offline optimum and competitive-ratio harness."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .metric import MetricSpace, canon, matching_distance
from .workfn import WorkFunction, cone, update

POLICIES = ("lexicographic", "prefer_server", "first_found")


@dataclass(frozen=True)
class TieBreak:
    policy: str = "lexicographic"
    server: Optional[int] = None  # initial position of the preferred server

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown tie-break policy {self.policy!r}")
        if self.policy == "prefer_server" and self.server is None:
            raise ValueError("prefer_server needs a server (its initial point)")


@dataclass
class Trajectory:
    configs: list
    requests: list
    costs: list
    works: list
    extended: list
    movers: list  # initial position of the server that served each request (None if no move)
    tie: TieBreak = field(default_factory=TieBreak)

    @property
    def total_cost(self) -> int:
        return sum(self.costs)

    @property
    def final(self) -> WorkFunction:
        return self.works[-1]


def wfa_step(w_new: WorkFunction, positions: list, r: int, labels: list, tie: TieBreak):
    """Choose the serving move; returns ``(new_positions, cost, mover_label, best_value)``.

    The minimum of ``d(C, D) + w(D)`` over all ``D`` containing ``r`` is always
    attained by moving a single server, so ties are resolved among those moves.
    """
    space = w_new.space
    if r in positions:
        return list(positions), 0, None, w_new(positions)
    options = []
    for j, x in enumerate(positions):
        D = positions[:j] + [r] + positions[j + 1:]
        options.append((space.d(x, r) + w_new(D), j))
    best = min(v for v, _ in options)
    tied = [j for v, j in options if v == best]
    if tie.policy == "prefer_server" and any(labels[j] == tie.server for j in tied):
        j = next(j for j in tied if labels[j] == tie.server)
    elif tie.policy == "first_found":
        j = tied[0]
    else:
        j = min(tied, key=lambda i: (positions[i], labels[i]))
    new = list(positions)
    new[j] = r
    return new, space.d(positions[j], r), labels[j], best


def run_wfa(space: MetricSpace, C0, requests, tie: Optional[TieBreak] = None, w0: Optional[WorkFunction] = None) -> Trajectory:
    tie = tie or TieBreak()
    positions = [int(p) for p in C0]
    labels = list(positions)
    k = len(positions)
    w = w0 if w0 is not None else cone(positions, space, k)
    traj = Trajectory([canon(positions)], [], [], [w], [], [], tie)
    for r in requests:
        if not isinstance(r, (int, np.integer)) or not 0 <= int(r) < space.n:
            raise ValueError(f"request {r!r} is not a point of the space")
        r = int(r)
        w2 = update(w, r)
        positions, cost, mover, _ = wfa_step(w2, positions, r, labels, tie)
        traj.configs.append(canon(positions))
        traj.requests.append(r)
        traj.costs.append(cost)
        traj.works.append(w2)
        traj.extended.append(int((w2.values - w.values).max()))
        traj.movers.append(mover)
        w = w2
    return traj


def check_trajectory(traj: Trajectory) -> tuple:
    """Recompute each step against all configurations containing the request."""
    for t, r in enumerate(traj.requests, start=1):
        prev, cur, w = traj.configs[t - 1], traj.configs[t], traj.works[t]
        space = w.space
        if r not in cur:
            return False, f"step {t}: request not covered"
        if traj.costs[t - 1] != matching_distance(space, prev, cur):
            return False, f"step {t}: cost is not the matching distance"
        tb = w.table
        rows = np.flatnonzero(tb.contains(r))
        scores = tb.matching_to_all(prev)[rows] + w.values[rows]
        if matching_distance(space, prev, cur) + w(cur) != scores.min():
            return False, f"step {t}: configuration does not attain the WFA minimum"
    return True, None


def offline_opt(w: WorkFunction) -> int:
    return int(w.values.min())


def extended_cost_ledger(traj: Trajectory) -> dict:
    """Per-step extended cost, the version pinned at the WFA configuration, and running sums."""
    pinned = []
    for t in range(1, len(traj.works)):
        C = traj.configs[t - 1]
        pinned.append(traj.works[t](C) - traj.works[t - 1](C))
    return {
        "extended": list(traj.extended),
        "pinned": pinned,
        "cumulative": list(itertools.accumulate(traj.extended)),
        "total": sum(traj.extended),
        "wfa_cost": traj.total_cost,
        "opt": offline_opt(traj.final),
    }


def ratio_report(space: MetricSpace, C0, mode: str = "exhaustive", length: int = 6, samples: int = 1000,
                 seed: int = 0, requests=None, budget: Optional[int] = None) -> dict:
    """Worst ``WFA cost - k * OPT`` over generated request sequences.

    ``mode="exhaustive"`` walks every sequence up to ``length`` (sharing prefixes);
    ``mode="random"`` draws ``samples`` sequences of exactly ``length``.
    """
    k = len(C0)
    pts = list(requests) if requests is not None else list(space.original)
    slack = k * k * space.diameter
    worst = {"excess": None, "sequence": None, "cost": None, "opt": None}
    seen = [0]
    partial = [False]
    labels = [int(p) for p in C0]
    tie = TieBreak()

    def consider(seq, cost, w):
        opt = offline_opt(w)
        excess = cost - k * opt
        if worst["excess"] is None or excess > worst["excess"]:
            worst.update(excess=excess, sequence=list(seq), cost=cost, opt=opt)

    w0 = cone(C0, space, k)
    if mode == "exhaustive":
        stack = [([], [int(p) for p in C0], w0, 0)]
        while stack:
            seq, pos, w, cost = stack.pop()
            consider(seq, cost, w)
            seen[0] += 1
            if budget is not None and seen[0] >= budget:
                partial[0] = True
                break
            if len(seq) == length:
                continue
            for r in pts:
                w2 = update(w, r)
                new, c, _, _ = wfa_step(w2, pos, r, labels, tie)
                stack.append((seq + [r], new, w2, cost + c))
    elif mode == "random":
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            seq = [int(r) for r in rng.choice(pts, size=length)]
            traj = run_wfa(space, C0, seq, tie)
            consider(seq, traj.total_cost, traj.final)
            seen[0] += 1
            if budget is not None and seen[0] >= budget:
                partial[0] = True
                break
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return {
        "k": k,
        "sequences": seen[0],
        "worst_excess": worst["excess"],
        "worst_sequence": worst["sequence"],
        "worst_cost": worst["cost"],
        "worst_opt": worst["opt"],
        "slack": slack,
        "within_bound": worst["excess"] <= slack,
        "partial": partial[0],
    }
