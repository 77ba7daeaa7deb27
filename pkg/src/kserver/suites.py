"""Randomised property suites over reachable work functions.

Each suite draws ``cases`` instances from a seeded generator and returns a
:class:`SuiteResult`; the first failure is kept as a serialisable witness.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import metric as M
from . import potential as pot
from .workfn import (
    UnsupportedError,
    check_duality,
    dump,
    is_lipschitz,
    is_quasiconvex,
    random_reachable,
    update,
)


@dataclass
class SuiteResult:
    suite: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    witness: Optional[dict] = None
    elapsed: float = 0.0
    by_space: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, where: str, witness: Optional[Callable[[], dict]] = None) -> None:
        tally = self.by_space.setdefault(where, [0, 0])
        if ok:
            self.passed += 1
            tally[0] += 1
        else:
            self.failed += 1
            tally[1] += 1
            if self.witness is None and witness is not None:
                self.witness = {"space": where, **witness()}

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "elapsed_seconds": round(self.elapsed, 2),
            "by_space": {k: {"passed": v[0], "failed": v[1]} for k, v in self.by_space.items()},
            "witness": self.witness,
        }


# -- spaces ------------------------------------------------------------------------


def random_tree_space(rng: np.random.Generator, n_nodes: int, max_weight: int = 4) -> M.MetricSpace:
    """Random attachment tree on ``n_nodes`` vertices with integer weights."""
    edges = [(int(rng.integers(i)), i, int(rng.integers(1, max_weight + 1))) for i in range(1, n_nodes)]
    return M.build_tree(edges)


def core_spaces(rng: np.random.Generator) -> list:
    """``(name, space factory)`` pairs used by the duality/quasiconvexity/Lipschitz suites."""
    circle = M.build_circle(8, 8)
    multiray = M.build_multiray([2, 2, 2], 1)
    return [
        ("circle(8)", lambda: circle),
        ("tree(5)", lambda: random_tree_space(rng, 5)),
        ("multiray(2,2,2)", lambda: multiray),
    ]


def last_request_settings(rng: np.random.Generator) -> list:
    """``(name, k, factory)`` for the spaces where the last request attains the tuple minimum."""
    line = M.build_line(9)
    star = M.build_star([1, 2, 3, 2])
    multiray = M.build_multiray([3, 3, 3], 1)
    out = []
    for k in (2, 3):
        out.append((f"line(9) k={k}", k, lambda: line))
        out.append((f"star(1,2,3,2) k={k}", k, lambda: star))
        out.append((f"multiray(3,3,3) k={k}", k, lambda: multiray))
    out.append(("tree(6) k=3", 3, lambda: random_tree_space(rng, 6)))
    out.append(("general(5) k=n-1", 4, lambda: M.random_metric(rng, 5)))
    out.append(("general(5) k=n-2", 3, lambda: M.random_metric(rng, 5)))
    return out


def _extended(space: M.MetricSpace) -> M.MetricSpace:
    key = ("extended",)
    ext = space._cache.get(key)
    if ext is None:
        ext = space._cache[key] = M.antipodal_extension(space)
    return ext


def _wdump(w) -> dict:
    return dump(w)


# -- suites ----------------------------------------------------------------------------


def duality_suite(cases: int, seed: int = 0, with_structure: bool = False, name: str = "duality") -> SuiteResult:
    """``check_duality(w, r)`` for random reachable ``w`` and request ``r``.

    With ``with_structure`` the updated table is also checked for Lipschitzness
    and quasiconvexity.
    """
    rng = np.random.default_rng(seed)
    res = SuiteResult(name)
    start = time.time()
    spaces = core_spaces(rng)
    for i in range(cases):
        where, factory = spaces[i % len(spaces)]
        space = factory()
        k = 2 + (i // len(spaces)) % 2
        w = random_reachable(space, k, rng)
        r = int(rng.integers(space.n))
        ok = check_duality(w, r)
        what = "duality"
        if ok and with_structure:
            w2 = update(w, r)
            ok, wit = is_lipschitz(w2)
            what = "lipschitz"
            if ok:
                ok, wit = is_quasiconvex(w2)
                what = "quasiconvex"
        res.record(ok, f"{where} k={k}", lambda: {"check": what, "request": r, "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def table_suite(check, name: str, cases: int, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult(name)
    start = time.time()
    spaces = core_spaces(rng)
    for i in range(cases):
        where, factory = spaces[i % len(spaces)]
        space = factory()
        k = 2 + (i // len(spaces)) % 2
        w = random_reachable(space, k, rng)
        ok, wit = check(w)
        res.record(ok, f"{where} k={k}", lambda: {"detail": repr(wit), "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def check_table(w, suite: str) -> tuple:
    """Run a single-table check on an ingested work function."""
    if suite == "lipschitz":
        return is_lipschitz(w)
    if suite == "quasiconvex":
        try:
            return is_quasiconvex(w)
        except UnsupportedError as e:
            return False, str(e)
    raise ValueError(f"suite {suite!r} does not take a table")


def perm_intuition_suite(cases: int, seed: int = 0, k: int = 3) -> SuiteResult:
    """Random reachable ``w`` on circle(8) with a random tuple of distinct points."""
    rng = np.random.default_rng(seed)
    space = M.build_circle(8, 8)
    res = SuiteResult("perm_intuition")
    start = time.time()
    for _ in range(cases):
        w = random_reachable(space, k, rng)
        xs = [int(x) for x in rng.choice(space.n, size=k, replace=False)]
        ok = pot.verify_perm_intuition(w, xs)
        res.record(ok, f"circle(8) k={k}", lambda: {"tuple": xs, "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def lazy_k3_suite(cases: int, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    space = M.build_circle(8, 8)
    res = SuiteResult("lazy_k3")
    start = time.time()
    for _ in range(cases):
        w = random_reachable(space, 3, rng)
        a, b = pot.lazy_potential_k3(w).value, pot.server_potential(w).value
        res.record(a == b, "circle(8) k=3", lambda: {"lazy_k3": a, "server": b, "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def push3_suite(cases: int, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    space = M.build_circle(8, 8)
    res = SuiteResult("push3")
    start = time.time()
    for _ in range(cases):
        w = random_reachable(space, 3, rng)
        ok, X = pot.check_push_last(w)
        res.record(ok, "circle(8) k=3", lambda: {"set": list(X or ()), "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def equivalence_suite(cases: int, seed: int = 0) -> SuiteResult:
    """Server and evader potentials on random spaces with at most 8 points (after extension)."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("equivalence")
    start = time.time()
    circle = M.build_circle(8, 8)
    for i in range(cases):
        if i % 2 == 0:
            space, where = M.antipodal_extension(M.random_metric(rng, 4)), "general(4) extended"
            k = 2
        else:
            space, where = circle, "circle(8)"
            k = 2 + (i // 2) % 2
        w = random_reachable(space, k, rng)
        ok, detail = pot.check_equivalence(w, rng, samples=3)
        res.record(ok, f"{where} k={k}", lambda: {**detail, "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def all_reachable(space: M.MetricSpace, k: int, depth: Optional[int] = None, limit: int = 200_000, points=None):
    """Work functions reachable from a cone, up to an additive shift, each with its last request.

    Cones and requests use ``points`` (default: the original points).  Runs to
    closure unless ``depth`` bounds the number of requests; ``limit`` guards
    against runaway growth.
    """
    from .workfn import cone

    seen = {}
    frontier = []
    pts = list(space.original if points is None else points)
    for C in itertools.combinations_with_replacement(pts, k):
        w = cone(C, space, k)
        key = w.values.tobytes()
        if key not in seen:
            seen[key] = w
            frontier.append(w)
    steps = 0
    while frontier and (depth is None or steps < depth):
        steps += 1
        nxt = []
        for w in frontier:
            for r in pts:
                w2 = update(w, r)
                key = (w2.values - w2.values.min()).tobytes() + bytes([r])
                if key not in seen:
                    seen[key] = w2
                    nxt.append(w2)
                    if len(seen) > limit:
                        raise RuntimeError(f"more than {limit} reachable work functions")
        frontier = nxt
    return [w for w in seen.values() if w.last_request is not None]


def mst_suite(seed: int = 0, depth: Optional[int] = None, metrics: int = 1) -> SuiteResult:
    """MST potential against the evader potential, and the leaf property, on every
    work function reachable (to closure by default) on random 4-point metrics (k=2)."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("mst_leaf")
    start = time.time()
    for m in range(metrics):
        space = M.random_metric(rng, 4)
        for w in all_reachable(space, 2, depth):
            rep = pot.mst_evader_potential(w)
            ev = pot.evader_potential(w).value
            ok = rep.value == ev and rep.extra.get("r_is_leaf", True)
            res.record(ok, f"general(4) #{m}", lambda: {"mst": rep.value, "evader": ev,
                                                        "r_is_leaf": rep.extra.get("r_is_leaf"),
                                                        "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


def last_request_suite(cases: int, seed: int = 0, settings=None) -> SuiteResult:
    """The tuple minimum of the potential is attained with the last request last.

    ``cases`` work functions per setting; the potential is evaluated on the
    antipodal extension with tuples drawn from the original points.
    """
    rng = np.random.default_rng(seed)
    res = SuiteResult("last_request_last")
    start = time.time()
    for where, k, factory in settings or last_request_settings(rng):
        for _ in range(cases):
            ext = _extended(factory())
            w = random_reachable(ext, k, rng)
            ok = pot.last_request_attains_min(w)
            res.record(ok, where, lambda: {"last_request": w.last_request, "work_function": _wdump(w)})
    res.elapsed = time.time() - start
    return res


SUITES = {
    "duality": lambda n, seed: duality_suite(n, seed),
    "quasiconvex": lambda n, seed: table_suite(is_quasiconvex, "quasiconvex", n, seed),
    "lipschitz": lambda n, seed: table_suite(is_lipschitz, "lipschitz", n, seed),
    "perm_intuition": lambda n, seed: perm_intuition_suite(n, seed),
    "lazy_k3": lambda n, seed: lazy_k3_suite(n, seed),
    "push3": lambda n, seed: push3_suite(n, seed),
    "equivalence": lambda n, seed: equivalence_suite(n, seed),
    "mst_leaf": lambda n, seed: mst_suite(seed, metrics=max(1, n // 100)),
    "last_request_last": lambda n, seed: last_request_suite(n, seed),
}
DEFAULT_CASES = {
    "duality": 1000, "quasiconvex": 200, "lipschitz": 200, "perm_intuition": 300, "lazy_k3": 100,
    "push3": 100, "equivalence": 200, "mst_leaf": 100, "last_request_last": 500,
}
