"""k-taxi requests on the circle, the non-laziness counterexample and the census.

A taxi request ``(s, t)`` is simulated by dense server requests along the
shortest ``s -> t`` arc.  In the limit the result is

    w ^ (s,t) (C) = min over S in supp(w ^ s) of w(S) + d(s,t) + d(S - s + t, C)

which on the dense table collapses to ``min over x in C of w(C - x + s) + d(s,t) + d(x,t)``.
"""

from __future__ import annotations

import hashlib
import json
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import potential as pot
from .configs import table
from .metric import MetricSpace, build_circle, canon
from .workfn import WorkFunction, cone, extended_cost, reconstruct, support, update


class ReplayMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class TaxiRequest:
    start: int
    dest: int
    clockwise: bool = True


def _require_circle(space: MetricSpace) -> None:
    if space.kind != "circle":
        raise ValueError("closed-form taxi update is only available on circle spaces")


def taxi_support_image(w: WorkFunction, s: int, t: int) -> dict:
    """``{S - s + t: w(S) + d(s,t)}`` for ``S`` in the support of ``w ^ s``."""
    ws = update(w, s)
    dst = w.space.d(s, t)
    out = {}
    for S, val in support(ws).items():
        S = list(S)
        S.remove(s)
        key = canon(S + [t])
        out[key] = min(out.get(key, val + dst), val + dst)
    return out


def taxi_update_closed(w: WorkFunction, s: int, t: int) -> WorkFunction:
    """Taxi update rebuilt from the transported support of ``w ^ s``."""
    _require_circle(w.space)
    members = taxi_support_image(w, s, t)
    vals = reconstruct(members, w.space, w.k)
    return WorkFunction(w.space, w.k, vals, last_request=t, origin="reachable" if w.reachable else "ingested")


def taxi_update_fast(w: WorkFunction, s: int, t: int) -> WorkFunction:
    """Same table as :func:`taxi_update_closed` from a single vectorised pass."""
    tb = w.table
    dst = w.space.dist
    new = (w.values[tb.replace(s)] + dst[tb.configs, t]).min(axis=1) + dst[s, t]
    return WorkFunction(w.space, w.k, new, last_request=t, origin="reachable" if w.reachable else "ingested")


# -- simulated limit -------------------------------------------------------------


def _circle_geometry(space: MetricSpace):
    n = space.n
    step = int(space.dist[0, 1])
    return n, step, n * step


def circle_path(space: MetricSpace, s: int, t: int, m: int, clockwise: bool = True):
    """Positions (in units of ``1/(scale*f)``) of ``m`` equally spaced points from ``s`` to ``t``.

    Returns ``(positions, f, length)`` where ``f`` is the grid refinement factor
    and ``length`` the circumference at the refined scale.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    n, step, circ = _circle_geometry(space)
    D = space.d(s, t)
    f = (m - 1) // math.gcd(D, m - 1) if D else 1
    L = circ * f
    ps, pt = s * step * f, t * step * f
    forward = (pt - ps) % L
    if forward * 2 < L or (forward * 2 == L and clockwise):
        direction = 1
    else:
        direction = -1
    inc = D * f // (m - 1)
    positions = [(ps + direction * j * inc) % L for j in range(m)]
    assert positions[-1] == pt
    return positions, f, L


def _circ_dist(a, b, L):
    g = np.abs(a - b) % L
    return np.minimum(g, L - g)


def _matching(A: np.ndarray, B: np.ndarray, L: int) -> np.ndarray:
    """Pairwise matching distances between rows of ``A`` and rows of ``B`` on a circle of length ``L``."""
    k = A.shape[1]
    best = None
    for perm in itertools.permutations(range(k)):
        cost = sum(_circ_dist(A[:, i][:, None], B[:, p][None, :], L) for i, p in enumerate(perm))
        best = cost if best is None else np.minimum(best, cost)
    return best


def sparse_update(members: dict, r: int, L: int) -> dict:
    """Server request on a support-only work function over circle positions."""
    cand = {}
    for S, val in members.items():
        for j, x in enumerate(S):
            key = tuple(sorted(S[:j] + S[j + 1:] + (r,)))
            v = val + int(_circ_dist(np.int64(x), np.int64(r), L))
            if key not in cand or v < cand[key]:
                cand[key] = v
    keys = list(cand)
    arr = np.array(keys, dtype=np.int64)
    vals = np.array([cand[c] for c in keys], dtype=np.int64)
    dm = _matching(arr, arr, L)
    through = vals[:, None] + dm
    np.fill_diagonal(through, np.iinfo(np.int64).max)
    dominated = (through <= vals[None, :]).any(axis=0)
    return {keys[i]: int(vals[i]) for i in np.flatnonzero(~dominated)}


def _rescaled(space: MetricSpace, f: int) -> MetricSpace:
    if f == 1:
        return space
    return MetricSpace(
        space.dist * f, scale=space.scale * f, kind=space.kind, labels=space.labels, antipode=space.antipode
    )


def taxi_update_simulated(w: WorkFunction, s: int, t: int, m: int, clockwise: bool = True) -> WorkFunction:
    """``w ^ r_1 ^ ... ^ r_m`` for ``m`` equally spaced requests from ``s`` to ``t``.

    Intermediate requests live on a refined circle; the work function is kept
    as its support there and evaluated back on the original grid.  The result
    is bound to a copy of the space whose scale is multiplied by the
    refinement factor, so all values stay integral.
    """
    _require_circle(w.space)
    n, step, _ = _circle_geometry(w.space)
    positions, f, L = circle_path(w.space, s, t, m, clockwise)
    members = {tuple(int(p) * step * f for p in S): v * f for S, v in support(w).items()}
    for r in positions:
        members = sparse_update(members, r, L)
    fine = _rescaled(w.space, f)
    tb = table(fine, w.k)
    grid_pos = tb.configs * step * f
    S_arr = np.array(list(members), dtype=np.int64)
    S_val = np.array(list(members.values()), dtype=np.int64)
    vals = (S_val[None, :] + _matching(grid_pos, S_arr, L)).min(axis=1)
    return WorkFunction(fine, w.k, vals, last_request=t, origin="reachable" if w.reachable else "ingested")


def simulated_deviation(w: WorkFunction, s: int, t: int, m: int) -> tuple:
    """``(max |closed - simulated|, allowed 2k*eps)`` both as exact fractions of a length unit."""
    sim = taxi_update_simulated(w, s, t, m)
    f = sim.space.scale // w.space.scale
    closed = taxi_update_fast(w, s, t).values * f
    dev = int(np.abs(closed - sim.values).max())
    scale = sim.space.scale
    eps = Fraction(w.space.d(s, t), w.space.scale * (m - 1))
    return Fraction(dev, scale), 2 * w.k * eps


# -- the counterexample ------------------------------------------------------------

REPLAY_START = ("1", "6", "7")
REPLAY_EVENTS = (("6.5", "6"), ("4",), ("2.5", "2"), ("3",), ("4",), ("3.5", "5"))
REPLAY_FINAL = "4"


def counterexample_space(scale: int = 2) -> MetricSpace:
    return build_circle(16, 8, scale=scale)


def apply_event(w: WorkFunction, event) -> WorkFunction:
    if len(event) == 1:
        return update(w, event[0])
    return taxi_update_closed(w, event[0], event[1])


def replay_stages(space: Optional[MetricSpace] = None) -> list:
    """Work functions of the eight stages: start, six events, one more request."""
    space = space or counterexample_space()
    pid = space.point
    w = cone([pid(x) for x in REPLAY_START], space, 3)
    w = WorkFunction(space, 3, w.values, last_request=pid("6"), origin="cone")
    stages = [w]
    for ev in REPLAY_EVENTS + ((REPLAY_FINAL,),):
        w = apply_event(w, tuple(pid(x) for x in ev))
        stages.append(w)
    return stages


def expanded_server_sequence(space: MetricSpace, refine: int = 2) -> tuple:
    """The replay as plain server requests on a circle refined ``refine`` times.

    Taxi legs become every refined grid point along the arc.  Returns
    ``(fine_space, start_configuration, requests)``.
    """
    fine = build_circle(space.n * refine, 8, scale=space.scale * refine)
    pid = fine.point
    requests = []
    for ev in REPLAY_EVENTS:
        if len(ev) == 1:
            requests.append(pid(ev[0]))
            continue
        s, t = pid(ev[0]), pid(ev[1])
        D = fine.d(s, t) // int(fine.dist[0, 1])
        positions, _, _ = circle_path(fine, s, t, D + 1)
        step = int(fine.dist[0, 1])
        requests.extend(p // step for p in positions)
    return fine, [pid(x) for x in REPLAY_START], requests


@dataclass
class ReplayReport:
    stages: list
    C_t: tuple
    wfa_server_fixed: bool
    w_t_at_C_t: Optional[Fraction]
    w_t1_at_C_t: Optional[Fraction]
    phi_t: Fraction
    phi_t_achievers: list
    phi_t1: Fraction
    phi_572_terms: list
    bound_terms: list
    bound_total: Fraction
    extended_cost: Fraction
    gap: Fraction
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _stage_supports(stages) -> list:
    out = []
    for w in stages:
        sp = w.space
        out.append({tuple(sp.label(p) for p in S): sp.value(v) for S, v in support(w).items()})
    return out


def replay_counterexample(tie=None, refine: int = 2, scale: int = 2) -> ReplayReport:
    """Recompute every number of the non-laziness example and collect mismatches.

    ``tie`` defaults to preferring the server that starts at 6 on the refined circle.
    """
    from .wfa import TieBreak, run_wfa

    space = counterexample_space(scale)
    pid, val, lab = space.point, space.value, space.label
    stages = replay_stages(space)
    w_t, w_t1 = stages[-2], stages[-1]

    fine, C0, requests = expanded_server_sequence(space, refine)
    tie = tie or TieBreak("prefer_server", fine.point("6"))
    traj = run_wfa(fine, C0, requests, tie)
    C_t_labels = tuple(fine.label(p) for p in traj.configs[-1])
    movers = set(traj.movers) - {None}
    fixed = movers <= {fine.point("6")}
    try:
        C_t = canon(space.point(lab) for lab in C_t_labels)
    except ValueError:
        C_t = None  # WFA left the coarse grid under this tie policy

    r = pid(REPLAY_FINAL)
    phi_t = pot.server_potential(w_t)
    phi_t1 = pot.server_potential(w_t1)
    x572 = [pid("5"), pid("7"), pid("2")]
    terms = pot.server_potential_terms(w_t1, x572)
    d = space.d
    bound = [
        [w_t1([pid("5"), pid("7"), pid("4")]), d(pid("2"), pid("4"))],
        [w_t1([pid("1"), pid("7"), pid("4")]), d(pid("2"), pid("4"))],
        [w_t1([pid("4"), pid("3"), pid("2")]), d(pid("3"), pid("4"))],
        [w_t1([pid("6"), pid("5"), pid("4")]), d(pid("5"), pid("6")), d(pid("4"), pid("6"))],
    ]
    nabla = extended_cost(w_t, r, updated=w_t1)
    report = ReplayReport(
        stages=_stage_supports(stages),
        C_t=C_t_labels,
        wfa_server_fixed=fixed,
        w_t_at_C_t=val(w_t(C_t)) if C_t else None,
        w_t1_at_C_t=val(w_t1(C_t)) if C_t else None,
        phi_t=val(phi_t.value),
        phi_t_achievers=[tuple(lab(p) for p in a) for a in phi_t.achievers],
        phi_t1=val(phi_t1.value),
        phi_572_terms=[val(v) for v in terms],
        bound_terms=[[val(v) for v in group] for group in bound],
        bound_total=val(sum(sum(g) for g in bound)),
        extended_cost=val(nabla),
        gap=val(phi_t1.value - phi_t.value - nabla),
    )
    expect = [
        ("C_t", report.C_t, ("1", "5", "7")),
        ("WFA uses only the server from 6", report.wfa_server_fixed, True),
        ("w_t(C_t)", report.w_t_at_C_t, 9),
        ("w_t+1(C_t)", report.w_t1_at_C_t, 11),
        ("Phi(w_t)", report.phi_t, 44),
        ("(4,5,6) attains Phi(w_t)", ("4", "5", "6") in report.phi_t_achievers, True),
        ("bound terms", report.bound_terms, [[8, 2], [10, 2], [11, 1], [8, 1, 2]]),
        ("bound total", report.bound_total, 45),
        ("Phi_572(w_t+1) <= 45", sum(report.phi_572_terms) <= 45, True),
        ("Phi(w_t+1) <= 45", report.phi_t1 <= 45, True),
        ("laziness gap <= -1", report.gap <= -1, True),
        ("w_t+1(C_t) - w_t(C_t) - (Phi(w_t+1) - Phi(w_t)) >= 1",
         C_t is not None and report.w_t1_at_C_t - report.w_t_at_C_t - (report.phi_t1 - report.phi_t) >= 1, True),
    ]
    for name, got, want in expect:
        if got != want:
            report.mismatches.append(f"{name}: expected {want}, got {got}")
    return report


def format_replay(rep: ReplayReport) -> str:
    lines = ["scale: values in original circle units (circumference 8)"]
    names = ["start", "(a) (6.5,6)", "(b) 4", "(c) (2.5,2)", "(d) 3", "(e) 4", "(f) (3.5,5) = w_t", "4 = w_t+1"]
    for name, sup in zip(names, rep.stages):
        body = ", ".join(f"{{{','.join(c)}}}:{v}" for c, v in sorted(sup.items()))
        lines.append(f"{name:>20}: {body}")
    lines += [
        f"C_t = {{{','.join(rep.C_t)}}}  (single server moved: {rep.wfa_server_fixed})",
        (f"w_t+1(C_t) - w_t(C_t) = {rep.w_t1_at_C_t} - {rep.w_t_at_C_t} = {rep.w_t1_at_C_t - rep.w_t_at_C_t}"
         if rep.w_t_at_C_t is not None else "C_t is off the circle grid; w_t(C_t) not evaluated"),
        f"Phi(w_t) = {rep.phi_t}, attained by {len(rep.phi_t_achievers)} tuples"
        + (" including (4,5,6)" if ("4", "5", "6") in rep.phi_t_achievers else ""),
        "Phi_572(w_t+1) = " + " + ".join(str(v) for v in rep.phi_572_terms) + f" = {sum(rep.phi_572_terms)}",
        "  <= " + " + ".join("[" + "+".join(str(v) for v in g) + "]" for g in rep.bound_terms) + f" = {rep.bound_total}",
        f"Phi(w_t+1) = {rep.phi_t1}",
        f"extended cost = {rep.extended_cost}, laziness gap = {rep.gap}",
    ]
    lines.append("OK" if rep.ok else "MISMATCH:\n  " + "\n  ".join(rep.mismatches))
    return "\n".join(lines)


# -- symmetry and the census -------------------------------------------------------


class CircleSymmetry:
    """Dihedral symmetries of a circle that preserve a sub-grid of every ``stride``-th point."""

    def __init__(self, space: MetricSpace, k: int, stride: int = 2):
        _require_circle(space)
        n = space.n
        self.space, self.k, self.stride = space, k, stride
        tb = table(space, k)
        self.maps, flips = [], []
        for shift in range(0, n, stride):
            for flip in (False, True):
                pts = (np.arange(n) * (-1 if flip else 1) + shift) % n
                self.maps.append(pts)
                flips.append(flip)
        self.maps = np.array(self.maps, dtype=np.int64)
        self.flips = np.array(flips)
        # perms[g][i] = index of g^-1(configs[i]), so (g.w)[i] = w[perms[g][i]]
        self.perms = []
        for pts in self.maps:
            inv = np.empty(n, dtype=np.int64)
            inv[pts] = np.arange(n)
            self.perms.append(tb.rank(np.sort(inv[tb.configs], axis=1)))
        self.perms = np.array(self.perms, dtype=np.int64)

    def __len__(self):
        return len(self.maps)

    def images(self, values: np.ndarray) -> np.ndarray:
        return values[..., self.perms]

    def canonical(self, values: np.ndarray) -> np.ndarray:
        """Lexicographically smallest normalised image (works on a batch of rows)."""
        vals = np.asarray(values)
        single = vals.ndim == 1
        if single:
            vals = vals[None, :]
        vals = vals - vals.min(axis=1, keepdims=True)
        if vals.max(initial=0) <= 255:
            out = self._canonical_bytes(vals.astype(np.uint8))
        else:
            out = _lexmin_images(vals[:, self.perms])
        return out[0] if single else out

    def _canonical_bytes(self, vals: np.ndarray) -> np.ndarray:
        # for uint8 rows, lexicographic order is byte-string order
        imgs = np.ascontiguousarray(vals[:, self.perms])
        B, G, N = imgs.shape
        flat = imgs.reshape(B * G, N)
        keys = [row.tobytes() for row in flat]
        best = [min(range(G), key=lambda g: keys[b * G + g]) for b in range(B)]
        return imgs[np.arange(B), best]


def _lexmin_images(imgs: np.ndarray) -> np.ndarray:
    B, G, N = imgs.shape
    alive = np.ones((B, G), dtype=bool)
    big = np.iinfo(imgs.dtype).max
    for j in range(N):
        col = np.where(alive, imgs[:, :, j], big)
        alive &= col == col.min(axis=1, keepdims=True)
    return imgs[np.arange(B), alive.argmax(axis=1)]


def canonicalize(w: WorkFunction, sym: Optional[CircleSymmetry] = None) -> bytes:
    """Fingerprint invariant under the symmetry group and additive shifts."""
    sym = sym or CircleSymmetry(w.space, w.k)
    return sym.canonical(w.values).astype(np.uint8).tobytes()


def _digest(row: np.ndarray) -> bytes:
    return hashlib.blake2b(row.tobytes(), digest_size=16).digest()


@dataclass
class Census:
    states: int
    processed: int
    violations: list
    violation_classes: list
    complete: bool
    elapsed: float
    checkpoint: Optional[str] = None
    orbit_counts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "states": self.states,
            "states_by_symmetry": dict(self.orbit_counts),
            "processed": self.processed,
            "complete": self.complete,
            "violations": self.violations,
            "violation_classes": len(self.violation_classes),
            "elapsed_seconds": round(self.elapsed, 2),
            "checkpoint": self.checkpoint,
        }


class Enumerator:
    """Breadth-first closure of normalised work functions under a request alphabet.

    Default alphabet: taxi requests with starts on all 16 half-grid points and
    destinations on the 8 integer points of a circle of circumference 8
    (a server request ``r`` is the taxi request ``(r, r)``).  Every processed
    state is tested for a negative laziness gap against server requests at the
    integer points.
    """

    def __init__(self, k: int = 3, taxi: bool = True, midpoint_requests: bool = False, space=None):
        self.space = space or counterexample_space()
        self.k = k
        n = self.space.n
        self.dest = list(range(0, n, 2))
        self.starts = list(range(n)) if taxi else list(self.dest)
        self.pairs = [(s, t) for s in self.starts for t in self.dest if taxi or s == t]
        self.check_points = list(range(n)) if midpoint_requests else list(self.dest)
        self.sym = CircleSymmetry(self.space, k, stride=2)
        self.tb = table(self.space, k)
        dist = self.space.dist
        self._rep = {s: self.tb.replace(s) for s in self.starts}
        self._to = {t: dist[self.tb.configs, t] for t in self.dest}
        for r in self.check_points:
            self._rep.setdefault(r, self.tb.replace(r))
        self.seen: set = set()
        self.frontier: list = []
        self.violations: list = []
        self.classes: dict = {}
        self.processed = 0
        # processed states counted under weaker equivalences: rotations only, shift only
        self.orbit_counts = {"dihedral": 0, "rotation": 0, "none": 0}

    def children(self, vals: np.ndarray) -> np.ndarray:
        d = self.space.dist
        out = np.empty((len(self.pairs), self.tb.size), dtype=np.int64)
        cache = {}
        for i, (s, t) in enumerate(self.pairs):
            base = cache.get(s)
            if base is None:
                base = cache[s] = vals[self._rep[s]]
            out[i] = (base + self._to[t]).min(axis=1) + d[s, t]
        return out

    def add(self, rows: np.ndarray) -> int:
        canon_rows = self.sym.canonical(rows).astype(np.uint8)
        added = 0
        for row in canon_rows:
            key = _digest(row)
            if key not in self.seen:
                self.seen.add(key)
                self.frontier.append(row)
                added += 1
        return added

    def seed_cones(self) -> None:
        rows = [cone(C, self.space, self.k).values for C in itertools.combinations_with_replacement(self.dest, self.k)]
        self.add(np.array(rows))

    def seed(self, works) -> None:
        self.add(np.array([w.values for w in works]))

    def check(self, vals: np.ndarray) -> list:
        """``(r, gap, extended cost)`` for every check point with a negative laziness gap."""
        tuples, idx = pot.tuple_term_index(self.space, self.k, self.space.original)
        rows = [vals] + [(vals[self._rep[r]] + self.tb.move_cost(r)).min(axis=1) for r in self.check_points]
        rows = np.array(rows)
        phis = rows[:, idx].sum(axis=2).min(axis=1)
        out = []
        for j, r in enumerate(self.check_points, start=1):
            nabla = int((rows[j] - vals).max())
            if nabla == 0:
                continue
            gap = int(phis[j] - phis[0]) - nabla
            if gap < 0:
                out.append((r, gap, nabla))
        return out

    def count_orbit(self, row: np.ndarray) -> None:
        imgs = row[self.sym.perms]
        whole = len({img.tobytes() for img in imgs})
        rotations = len({img.tobytes() for img in imgs[~self.sym.flips]})
        self.orbit_counts["dihedral"] += 1
        self.orbit_counts["rotation"] += whole // rotations
        self.orbit_counts["none"] += whole

    def violation_key(self, row: np.ndarray, r: int) -> tuple:
        imgs = row[self.sym.perms]
        best = None
        for g in range(len(self.sym)):
            key = (imgs[g].tobytes(), int(self.sym.maps[g][r]))
            if best is None or key < best:
                best = key
        return best

    def run(self, max_states: Optional[int] = None, max_seconds: Optional[float] = None,
            checkpoint: Optional[str] = None, checkpoint_every: int = 20000, log=None) -> Census:
        start = time.time()
        head = 0
        classes = self.classes
        while head < len(self.frontier):
            if max_states is not None and self.processed >= max_states:
                break
            if max_seconds is not None and time.time() - start > max_seconds:
                break
            row = self.frontier[head]
            self.frontier[head] = None
            head += 1
            vals = row.astype(np.int64)
            for r, gap, nabla in self.check(vals):
                key = self.violation_key(row, r)
                self.violations.append({
                    "fingerprint": _digest(row).hex(),
                    "request": self.space.label(r),
                    "extended_cost": str(self.space.value(nabla)),
                    "gap": str(self.space.value(gap)),
                })
                classes.setdefault(key, len(classes))
            self.add(self.children(vals))
            self.count_orbit(row)
            self.processed += 1
            if log and self.processed % 5000 == 0:
                log(f"processed {self.processed} states, {len(self.seen)} seen, {len(classes)} violation classes")
            if checkpoint and self.processed % checkpoint_every == 0:
                self.save(checkpoint, head)
        self.frontier = [r for r in self.frontier[head:] if r is not None]
        complete = not self.frontier
        if checkpoint:
            self.save(checkpoint, 0)
        return Census(
            states=len(self.seen),
            processed=self.processed,
            violations=self.violations,
            violation_classes=list(classes),
            complete=complete,
            elapsed=time.time() - start,
            checkpoint=checkpoint,
            orbit_counts=dict(self.orbit_counts),
        )

    def save(self, path: str, head: int = 0) -> None:
        front = [r for r in self.frontier[head:] if r is not None]
        np.savez_compressed(
            path,
            seen=np.frombuffer(b"".join(sorted(self.seen)), dtype=np.uint8).reshape(-1, 16),
            frontier=np.array(front, dtype=np.uint8).reshape(-1, self.tb.size),
            processed=np.array([self.processed]),
            violations=np.array(json.dumps({
                "violations": self.violations,
                "classes": [[key.hex(), r] for key, r in self.classes],
                "orbit_counts": self.orbit_counts,
            })),
            pairs=np.array(self.pairs, dtype=np.int64).reshape(-1, 2),
        )

    def load(self, path: str) -> None:
        data = np.load(path if str(path).endswith(".npz") else str(path) + ".npz")
        if data["frontier"].shape[1:] not in ((self.tb.size,), (0,)) and len(data["frontier"]):
            raise ValueError("checkpoint was written for a different configuration space")
        if not np.array_equal(data["pairs"], np.array(self.pairs, dtype=np.int64).reshape(-1, 2)):
            raise ValueError("checkpoint was written for a different request alphabet")
        self.seen = {bytes(row) for row in data["seen"]}
        self.frontier = list(data["frontier"])
        self.processed = int(data["processed"][0])
        found = json.loads(str(data["violations"]))
        self.violations = found["violations"]
        self.classes = {(bytes.fromhex(key), r): i for i, (key, r) in enumerate(found["classes"])}
        self.orbit_counts = found.get("orbit_counts", self.orbit_counts)


def enumerate_reachable(taxi: bool = True, max_states: Optional[int] = None, max_seconds: Optional[float] = None,
                        checkpoint: Optional[str] = None, resume: bool = False, seeds=None,
                        midpoint_requests: bool = False, log=None) -> Census:
    en = Enumerator(taxi=taxi, midpoint_requests=midpoint_requests)
    if resume and checkpoint and Path(str(checkpoint) + ("" if str(checkpoint).endswith(".npz") else ".npz")).exists():
        en.load(checkpoint)
    elif seeds is not None:
        en.seed(seeds)
    else:
        en.seed_cones()
    return en.run(max_states=max_states, max_seconds=max_seconds, checkpoint=checkpoint, log=log)
