"""Work functions as dense integer tables over all k-point configurations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .configs import table
from .metric import MetricSpace, canon

ORIGINS = ("cone", "reachable", "ingested")


class UnsupportedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WorkFunction:
    space: MetricSpace
    k: int
    values: np.ndarray
    last_request: Optional[int] = None
    origin: str = "ingested"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        if v.shape != (self.table.size,):
            raise ValueError(f"expected {self.table.size} values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def table(self):
        return table(self.space, self.k)

    def __call__(self, config) -> int:
        return int(self.values[self.table.index(config)])

    def __eq__(self, other):
        if not isinstance(other, WorkFunction):
            return NotImplemented
        return self.space is other.space and self.k == other.k and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def reachable(self) -> bool:
        return self.origin != "ingested"

    def shifted(self) -> np.ndarray:
        return self.values - self.values.min()

    def support(self) -> "SupportSet":
        s = self._cache.get("support")
        if s is None:
            s = support(self)
            self._cache["support"] = s
        return s


@dataclass(frozen=True)
class SupportSet:
    members: dict  # canonical configuration -> value

    def __contains__(self, config) -> bool:
        return canon(config) in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def items(self):
        return sorted(self.members.items())


def cone(C0, space: MetricSpace, k: Optional[int] = None) -> WorkFunction:
    """Initial work function ``w(X) = d(C0, X)``."""
    C0 = canon(C0)
    k = len(C0) if k is None else k
    if len(C0) != k:
        raise ValueError(f"initial configuration {C0} does not have {k} points")
    t = table(space, k)
    t.index(C0)
    return WorkFunction(space, k, t.matching_to_all(C0), last_request=None, origin="cone")


def _check_point(space: MetricSpace, r) -> int:
    if not isinstance(r, (int, np.integer)) or not 0 <= int(r) < space.n:
        raise ValueError(f"request {r!r} is not a point of the space")
    return int(r)


def update(w: WorkFunction, r: int) -> WorkFunction:
    """``(w ^ r)(C) = min over x in C of w(C - x + r) + d(x, r)``."""
    r = _check_point(w.space, r)
    t = w.table
    new = (w.values[t.replace(r)] + t.move_cost(r)).min(axis=1)
    return WorkFunction(w.space, w.k, new, last_request=r, origin="reachable" if w.reachable else "ingested")


def update_literal(w: WorkFunction, r: int) -> WorkFunction:
    """``(w ^ r)(C) = min over X containing r of w(X) + d(X, C)``; quadratic, for cross-checks."""
    r = _check_point(w.space, r)
    t = w.table
    rows = np.flatnonzero(t.contains(r))
    dm = t.matching_matrix(rows)
    new = (w.values[rows][:, None] + dm).min(axis=0)
    return WorkFunction(w.space, w.k, new, last_request=r, origin="reachable" if w.reachable else "ingested")


def run_requests(w: WorkFunction, requests) -> WorkFunction:
    for r in requests:
        w = update(w, r)
    return w


def _supported_mask(w: WorkFunction) -> np.ndarray:
    """True where some single-point move ``C - c + y`` (y != c) supports ``C``.

    If any ``Y`` supports ``C`` then so does the configuration obtained by moving
    one matched point of ``C`` toward ``Y``, so single moves are enough.
    """
    t = w.table
    vals = w.values
    hit = np.zeros(t.size, dtype=bool)
    for y in range(t.n):
        rep = t.replace(y)
        cost = t.move_cost(y)
        moved = t.configs != y
        hit |= ((vals[rep] + cost == vals[:, None]) & moved).any(axis=1)
    return hit


def support(w: WorkFunction) -> SupportSet:
    t = w.table
    idx = np.flatnonzero(~_supported_mask(w))
    return SupportSet({t.config(i): int(w.values[i]) for i in idx})


def support_bruteforce(w: WorkFunction) -> SupportSet:
    """Support straight from the definition, comparing against every other configuration."""
    t = w.table
    keep = {}
    for i in range(t.size):
        dm = t.matching_to_all(t.configs[i])
        sup = w.values + dm == w.values[i]
        sup[i] = False
        if not sup.any():
            keep[t.config(i)] = int(w.values[i])
    return SupportSet(keep)


def reconstruct(members: dict, space: MetricSpace, k: int) -> np.ndarray:
    """``w(X) = min over support S of w(S) + d(S, X)``."""
    t = table(space, k)
    out = None
    for S, val in members.items():
        cand = val + t.matching_to_all(S)
        out = cand if out is None else np.minimum(out, cand)
    return out


def is_lipschitz(w: WorkFunction, chunk: int = 256):
    """Exhaustive check of ``w(X) - w(Y) <= d(X, Y)``; returns ``(ok, (X, Y) or None)``."""
    t = w.table
    for start in range(0, t.size, chunk):
        rows = np.arange(start, min(start + chunk, t.size))
        dm = t.matching_matrix(rows)
        bad = np.argwhere(w.values[rows][:, None] - w.values[None, :] > dm)
        if len(bad):
            i, j = bad[0]
            return False, (t.config(rows[i]), t.config(j))
    return True, None


def is_quasiconvex(w: WorkFunction, max_cells: int = 1 << 21):
    """Exchange property over every pair of configurations.

    For each pair ``(X, Y)`` some bijection ``mu`` must satisfy
    ``w(X) + w(Y) >= w(A + mu(X - A)) + w(mu(A) + X - A)`` for every ``A``.
    All ``k!`` bijections are tried, so a failure is a genuine counterexample.
    Returns ``(ok, (X, Y) or None)``.
    """
    k = w.k
    if k > 5:
        raise UnsupportedError("quasiconvexity check is limited to k <= 5")
    t = w.table
    if k == 1:
        return True, None
    vals = w.values
    C = t.configs
    full = (1 << k) - 1
    bits = lambda m: [i for i in range(k) if m >> i & 1]  # noqa: E731
    chunk = max(1, max_cells // (t.size * k))
    for start in range(0, t.size, chunk):
        rows = np.arange(start, min(start + chunk, t.size))
        X = C[rows][:, None, :]
        base = vals[rows][:, None] + vals[None, :]
        ok = np.zeros((len(rows), t.size), dtype=bool)
        # w(X_A + Y_B) depends only on the kept index sets, not on the bijection
        zval = {}

        def z(a, b):
            if (a, b) not in zval:
                xa, yb = bits(a), bits(b)
                Z = np.concatenate([np.broadcast_to(X[:, :, xa], (len(rows), t.size, len(xa))),
                                    np.broadcast_to(C[None, :, yb], (len(rows), t.size, len(yb)))], axis=-1)
                zval[a, b] = vals[t.rank(np.sort(Z, axis=-1))]
            return zval[a, b]

        for perm in t.perms():
            image = lambda m: sum(1 << perm[i] for i in bits(m))  # noqa: E731
            good = np.ones_like(ok)
            for m in range(1, full):
                if m < full ^ m:
                    good &= base >= z(m, image(full ^ m)) + z(full ^ m, image(m))
            ok |= good
            if ok.all():
                break
        if not ok.all():
            i, j = np.argwhere(~ok)[0]
            return False, (t.config(rows[i]), t.config(j))
    return True, None


def offset_to(w: WorkFunction, y: int) -> np.ndarray:
    """``d(y^k, X)`` for every configuration."""
    return w.space.dist[w.table.configs, y].sum(axis=1)


def minimizer(w: WorkFunction, y: int) -> list:
    """All ``X`` minimising ``w(X) - d(y^k, X)``."""
    score = w.values - offset_to(w, y)
    idx = np.flatnonzero(score == score.min())
    return [w.table.config(i) for i in idx]


def extended_cost(w: WorkFunction, r: int, updated: Optional[WorkFunction] = None) -> int:
    """``max over A of (w ^ r)(A) - w(A)``."""
    w2 = update(w, r) if updated is None else updated
    return int((w2.values - w.values).max())


def check_duality(w: WorkFunction, r: int) -> bool:
    """Minimisers of ``w - d(r^k, .)`` equal the configurations that maximise the
    increase ``w' - w`` and also minimise ``w' - d(r^k, .)``."""
    w2 = update(w, r)
    off = offset_to(w, r)
    a = w.values - off
    lhs = a == a.min()
    inc = w2.values - w.values
    b = w2.values - off
    rhs = (inc == inc.max()) & (b == b.min())
    return bool(np.array_equal(lhs, rhs))


def _minus(X, x) -> list:
    X = list(X)
    X.remove(x)
    return X


def resolves_from(w: WorkFunction, X, x: int, y: Optional[int] = None) -> bool:
    """``w(X) = w(X - x + y) + d(x, y)``; ``y`` defaults to the last request."""
    if y is None:
        if w.last_request is None:
            raise ValueError("work function has no last request")
        y = w.last_request
    if x not in X:
        raise ValueError(f"{x} is not in {tuple(X)}")
    return w(X) == w(_minus(X, x) + [y]) + w.space.d(x, y)


# -- quasiconvexity consequences, checked by brute force ---------------------


def _argmin_where(w: WorkFunction, mask: np.ndarray) -> set:
    vals = np.where(mask, w.values, np.iinfo(np.int64).max)
    best = vals.min()
    return {w.table.config(i) for i in np.flatnonzero(vals == best)}


def _multiset_le(A, B) -> bool:
    """Multiset inclusion ``A <= B``."""
    B = list(B)
    for a in A:
        if a not in B:
            return False
        B.remove(a)
    return True


def _multiset_minus(A, B) -> list:
    A = list(A)
    for b in B:
        A.remove(b)
    return A


def check_quasi_min(w: WorkFunction):
    """For a global minimiser ``X`` and ``x`` in ``X`` (once), some minimiser
    among configurations avoiding ``x`` contains ``X - x``.  Returns ``(ok, witness)``."""
    t = w.table
    if w.k == 1:
        return True, None
    for X in _argmin_where(w, np.ones(t.size, dtype=bool)):
        for x in set(X):
            if X.count(x) > 1:
                continue
            best = _argmin_where(w, ~t.contains(x))
            rest = _minus(X, x)
            if not any(_multiset_le(rest, Y) for Y in best):
                return False, (X, x)
    return True, None


def check_quasi_sub(w: WorkFunction):
    """For a global minimiser ``X`` and ``|A| < k``, some minimiser among
    configurations containing ``A`` has ``Y - A <= X - A``."""
    t = w.table
    if w.k == 1:
        return True, None
    counts = np.stack([(t.configs == p).sum(axis=1) for p in range(t.n)], axis=1)
    argmins = _argmin_where(w, np.ones(t.size, dtype=bool))
    for size in range(w.k):
        for A in itertools.combinations_with_replacement(range(t.n), size):
            need = np.bincount(np.array(A, dtype=np.int64), minlength=t.n) if A else np.zeros(t.n, dtype=np.int64)
            best = _argmin_where(w, (counts >= need).all(axis=1))
            for X in argmins:
                xa = _multiset_minus(X, A) if _multiset_le(A, X) else None
                if xa is None:
                    # X - A as a multiset difference: drop what is shared
                    xa = list(X)
                    for a in A:
                        if a in xa:
                            xa.remove(a)
                if not any(_multiset_le(_multiset_minus(Y, A), xa) for Y in best):
                    return False, (X, A)
    return True, None


def greedy_minimize(w: WorkFunction, start) -> tuple:
    """One pass over ``start``, replacing each point by the best single substitute."""
    X = list(canon(start))
    for pos in range(w.k):
        x = X[pos]
        rest = X[:pos] + X[pos + 1:]
        best = min(range(w.space.n), key=lambda y: (w(rest + [y]), y != x, y))
        X[pos] = best
    return canon(X)


def check_resolve_monotone(w: WorkFunction):
    """If ``X`` resolves from ``x`` (towards the last request) then so does ``X - y + x``."""
    r = w.last_request
    if r is None:
        raise ValueError("work function has no last request")
    t = w.table
    for i in range(t.size):
        X = t.config(i)
        for x in set(X):
            if not resolves_from(w, X, x):
                continue
            for y in set(X):
                if y == x and X.count(x) < 2:
                    continue
                Z = _minus(X, y) + [x]
                if not resolves_from(w, Z, x):
                    return False, (X, x, y)
    return True, None


def random_reachable(space: MetricSpace, k: int, rng: np.random.Generator, steps=(1, 12), points=None) -> WorkFunction:
    """Cone at a random configuration followed by random requests (at least one)."""
    pts = np.asarray(points if points is not None else space.original)
    C0 = rng.choice(pts, size=k, replace=True)
    w = cone(C0, space, k)
    lo, hi = steps
    for r in rng.choice(pts, size=int(rng.integers(lo, hi + 1))):
        w = update(w, int(r))
    return w


# -- dump/load ----------------------------------------------------------------


def dump(w: WorkFunction, space_ref: str = "") -> dict:
    t = w.table
    return {
        "space": space_ref,
        "k": w.k,
        "scale": w.space.scale,
        "last_request": w.last_request,
        "origin": w.origin,
        "values": [[list(t.config(i)), int(v)] for i, v in enumerate(w.values)],
    }


def load(data: dict, space: MetricSpace) -> WorkFunction:
    k = int(data["k"])
    if int(data.get("scale", space.scale)) != space.scale:
        raise ValueError("work function scale does not match the space")
    t = table(space, k)
    vals = np.empty(t.size, dtype=np.int64)
    seen = np.zeros(t.size, dtype=bool)
    for config, value in data["values"]:
        i = t.index(config)
        vals[i] = int(value)
        seen[i] = True
    if not seen.all():
        raise ValueError("work function table is incomplete")
    origin = data.get("origin", "ingested")
    return WorkFunction(space, k, vals, last_request=data.get("last_request"), origin=origin)
