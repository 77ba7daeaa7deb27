"""The antipodal potential in its server and evader forms, and the lazy adversary.

Server form, for a tuple ``x_1..x_k`` on a space where every point has an
antipode ``~p``::

    Phi_x(w) = sum_{i=0..k} w(~x_i^i  x_{i+1} .. x_k)

Evader form, for a permutation ``y`` of all ``n`` points and ``w^(C) = w(M - C)``::

    Phi^_y(w^) = cl(y_1..y_{n-k-1}) + sum_{i=n-k..n} min_{C <= {y_1..y_i}, |C|=n-k} w^(C) + d(C, y_i^{n-k})
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .configs import table
from .metric import MetricSpace, pairwise_sum, replicate_points
from .workfn import WorkFunction, extended_cost, update

FORMULATIONS = ("server", "evader", "lazy_k3", "mst")


class AntipodeError(ValueError):
    pass


class NonTermination(RuntimeError):
    pass


@dataclass
class PotentialReport:
    value: int
    achiever: tuple
    terms: list
    formulation: str
    achievers: list = field(default_factory=list)
    scale: int = 1
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "formulation": self.formulation,
            "value": self.value,
            "scale": self.scale,
            "achiever": list(self.achiever),
            "achievers": [list(a) for a in self.achievers],
            "terms": self.terms,
            **self.extra,
        }


def _require_antipodes(space: MetricSpace) -> np.ndarray:
    if space.antipode is None:
        raise AntipodeError("space has points without antipodes; apply antipodal_extension first")
    return space.antipode


def term_configs(space: MetricSpace, xs: Sequence[int]) -> list:
    """The ``k+1`` configurations ``~x_i^i x_{i+1}..x_k`` for ``i = 0..k``."""
    ap = _require_antipodes(space)
    xs = [int(x) for x in xs]
    k = len(xs)
    out = [tuple(sorted(xs))]
    for i in range(1, k + 1):
        out.append(tuple(sorted([int(ap[xs[i - 1]])] * i + xs[i:])))
    return out


def server_potential_terms(w: WorkFunction, xs: Sequence[int]) -> list:
    if len(xs) != w.k:
        raise ValueError(f"tuple {tuple(xs)} does not have {w.k} entries")
    return [w(c) for c in term_configs(w.space, xs)]


def server_potential_at(w: WorkFunction, xs: Sequence[int]) -> int:
    return sum(server_potential_terms(w, xs))


def _candidate_points(w: WorkFunction, points, include_extended: bool):
    if points is not None:
        return np.asarray(list(points), dtype=np.int64)
    if include_extended:
        return np.arange(w.space.n)
    return np.asarray(w.space.original, dtype=np.int64)


def tuple_term_index(space: MetricSpace, k: int, pts) -> tuple:
    """``(tuples, idx)`` with ``idx[j, i]`` the table index of term ``i`` of ``tuples[j]``; cached per space."""
    pts = np.asarray(pts, dtype=np.int64)
    key = ("tuple_terms", k, pts.tobytes())
    hit = space._cache.get(key)
    if hit is not None:
        return hit
    ap = _require_antipodes(space)
    t = table(space, k)
    tuples = np.array(list(itertools.product(pts, repeat=k)), dtype=np.int64).reshape(-1, k)
    idx = np.empty((len(tuples), k + 1), dtype=np.int64)
    idx[:, 0] = t.rank(np.sort(tuples, axis=1))
    for i in range(1, k + 1):
        anti = np.repeat(ap[tuples[:, i - 1]][:, None], i, axis=1)
        idx[:, i] = t.rank(np.sort(np.concatenate([anti, tuples[:, i:]], axis=1), axis=1))
    tuples.setflags(write=False)
    idx.setflags(write=False)
    space._cache[key] = (tuples, idx)
    return tuples, idx


def tuple_values(w: WorkFunction, points=None, include_extended: bool = False):
    """``Phi_x(w)`` for every tuple over the candidate points; returns ``(tuples, values)``."""
    tuples, idx = tuple_term_index(w.space, w.k, _candidate_points(w, points, include_extended))
    return tuples, w.values[idx].sum(axis=1)


def server_potential(w: WorkFunction, points=None, include_extended: bool = False) -> PotentialReport:
    """Minimum of ``Phi_x(w)`` over tuples of original points (or ``points``).

    Ties are broken lexicographically; every minimising tuple is listed.
    """
    tuples, vals = tuple_values(w, points, include_extended)
    best = int(vals.min())
    idx = np.flatnonzero(vals == best)
    achievers = sorted(map(tuple, tuples[idx].tolist()))
    return PotentialReport(
        value=best,
        achiever=achievers[0],
        terms=server_potential_terms(w, achievers[0]),
        formulation="server",
        achievers=achievers,
        scale=w.space.scale,
    )


def min_with_last(w: WorkFunction, r: Optional[int] = None, points=None) -> int:
    """Minimum of ``Phi_x(w)`` over tuples whose last entry is ``r`` (default: last request)."""
    r = w.last_request if r is None else r
    if r is None:
        raise ValueError("work function has no last request")
    tuples, vals = tuple_values(w, points)
    sel = tuples[:, -1] == r
    if not sel.any():
        raise ValueError(f"request {r} is not among the candidate points")
    return int(vals[sel].min())


def last_request_attains_min(w: WorkFunction, points=None) -> bool:
    """Whether the tuple minimum of ``Phi`` is attained with ``x_k`` equal to the last request."""
    return min_with_last(w, points=points) == server_potential(w, points).value


def cone_closed_form(w: WorkFunction, xs: Sequence[int]) -> int:
    """``(k+1) w(X) + k(k+1)/2 * D - cl(X)``: the value of ``Phi_x`` on a cone at ``X``."""
    k = w.k
    return (k + 1) * w(xs) + k * (k + 1) // 2 * w.space.diameter - pairwise_sum(w.space, xs)


# -- evader form ----------------------------------------------------------------


class _SetTable:
    """k-subsets of the space with their work-function values."""

    def __init__(self, w: WorkFunction):
        n, k = w.space.n, w.k
        if k >= n:
            raise ValueError("evader view needs k < n")
        sets = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)
        self.sets = sets
        self.wvals = w.values[w.table.rank(sets)]
        self.member = np.zeros((len(sets), n), dtype=bool)
        self.member[np.arange(len(sets))[:, None], sets] = True
        self.masks = (1 << sets).sum(axis=1)
        self.dist = w.space.dist
        self.rowsum = self.dist.sum(axis=1)
        self.n, self.k = n, k

    def term(self, tail_mask: int, y: int) -> int:
        """``min over C <= Y, |C|=n-k of w^(C) + d(C, y^{n-k})`` with ``Y`` the complement of ``tail_mask``.

        ``C`` is represented by its complement ``S``; ``S`` must contain the tail.
        """
        ok = (self.masks & tail_mask) == tail_mask
        offs = self.dist[self.sets[ok], y].sum(axis=1)
        return int((self.wvals[ok] + self.rowsum[y] - offs).min())


def evader_potential_at(w: WorkFunction, y: Sequence[int], sets: Optional[_SetTable] = None) -> int:
    n, k = w.space.n, w.k
    y = [int(p) for p in y]
    if sorted(y) != list(range(n)):
        raise ValueError("y must be a permutation of all points")
    st = sets or _SetTable(w)
    total = pairwise_sum(w.space, y[: n - k - 1])
    for i in range(n - k, n + 1):
        tail = sum(1 << p for p in y[i:])
        total += st.term(tail, y[i - 1])
    return total


def evader_potential_literal(w: WorkFunction, y: Sequence[int]) -> int:
    """Direct transcription with explicit evader sets; slow, for small spaces."""
    n, k = w.space.n, w.k
    y = [int(p) for p in y]
    everything = set(range(n))
    total = pairwise_sum(w.space, y[: n - k - 1])
    for i in range(n - k, n + 1):
        best = None
        for C in itertools.combinations(y[:i], n - k):
            val = w(sorted(everything - set(C))) + sum(w.space.d(c, y[i - 1]) for c in C)
            best = val if best is None else min(best, val)
        total += best
    return total


def evader_potential(w: WorkFunction, y: Optional[Sequence[int]] = None, max_points: int = 9) -> PotentialReport:
    """``Phi^_y`` for a given permutation, else its minimum over all permutations.

    The minimum is found by dynamic programming over the prefix sets
    ``{y_1..y_i}``: every term depends only on that set and on ``y_i``.
    """
    n, k = w.space.n, w.k
    st = _SetTable(w)
    if y is not None:
        return PotentialReport(evader_potential_at(w, y, st), tuple(y), [], "evader", [tuple(y)], w.space.scale)
    if n > max_points:
        raise ValueError(f"full permutation minimum is limited to n <= {max_points}")
    best, last = _evader_dp(w, st)
    full = (1 << n) - 1
    value = best[full]
    perm = _unwind(best, last, full, w, st)
    ends = sorted(y_ for y_ in range(n) if _dp_end_value(best, st, full, y_) == value)
    return PotentialReport(value, tuple(perm), [], "evader", [tuple(perm)], w.space.scale, {"last_points": ends})


def _dp_end_value(best, st, mask, y):
    return best[mask & ~(1 << y)] + st.term(((1 << st.n) - 1) & ~mask, y)


def _evader_dp(w: WorkFunction, st: _SetTable):
    n, k = st.n, st.k
    best = {}
    last = {}
    full = (1 << n) - 1
    for size in range(n - k - 1, n + 1):
        for combo in itertools.combinations(range(n), size):
            mask = sum(1 << p for p in combo)
            if size == n - k - 1:
                best[mask] = pairwise_sum(w.space, combo)
                last[mask] = None
                continue
            tail = full & ~mask
            choice = None
            for y in combo:
                val = best[mask & ~(1 << y)] + st.term(tail, y)
                if choice is None or val < choice[0]:
                    choice = (val, y)
            best[mask], last[mask] = choice
    return best, last


def _unwind(best, last, mask, w, st):
    tail = []
    while last.get(mask) is not None:
        y = last[mask]
        tail.append(y)
        mask &= ~(1 << y)
    head = [p for p in range(st.n) if mask >> p & 1]
    return head + tail[::-1]


def evader_min_with_last(w: WorkFunction, r: Optional[int] = None) -> tuple:
    """``(min over all y, min over y with y_n = r)`` of the evader potential."""
    r = w.last_request if r is None else r
    st = _SetTable(w)
    best, _ = _evader_dp(w, st)
    full = (1 << st.n) - 1
    return best[full], _dp_end_value(best, st, full, r)


def evader_potential_bruteforce(w: WorkFunction) -> int:
    st = _SetTable(w)
    return min(evader_potential_at(w, y, st) for y in itertools.permutations(range(w.space.n)))


def equivalence_shift(space: MetricSpace, k: int) -> int:
    """``-cl(M) + k(k+1)/2 * D``: server form = evader form + this constant."""
    return -pairwise_sum(space, range(space.n)) + k * (k + 1) // 2 * space.diameter


def lift_to_copies(w: WorkFunction):
    """The same work function on the pseudo-metric with ``k`` copies of every point."""
    rep, proj = replicate_points(w.space, w.k)
    t = table(rep, w.k)
    vals = w.values[w.table.rank(np.sort(proj[t.configs], axis=1))]
    lr = None if w.last_request is None else int(w.last_request) * w.k
    return WorkFunction(rep, w.k, vals, last_request=lr, origin=w.origin), proj


def check_equivalence(w: WorkFunction, rng: Optional[np.random.Generator] = None, samples: int = 5):
    """Server and evader potentials differ by the constant ``equivalence_shift``.

    Checked on the pseudo-metric with ``k`` copies of every point, both for
    random permutations (term by term) and for the minima.  The evader value
    depends on ``y`` only through its last ``k`` entries, so the evader minimum
    is taken over all such tails.  Returns ``(ok, details)``.
    """
    lifted, proj = lift_to_copies(w)
    rep = lifted.space
    k = w.k
    shift = equivalence_shift(rep, k)
    st = _SetTable(lifted)
    rng = rng or np.random.default_rng(0)
    for _ in range(samples):
        y = [int(p) for p in rng.permutation(rep.n)]
        lhs = server_potential_at(w, [int(proj[p]) for p in y[-k:]])
        rhs = evader_potential_at(lifted, y, st) + shift
        if lhs != rhs:
            return False, {"permutation": y, "server": lhs, "evader_shifted": rhs}
    best_evader = None
    for base in itertools.product(range(w.space.n), repeat=k):
        used = {}
        tail = []
        for p in base:
            c = used.get(p, 0)
            used[p] = c + 1
            tail.append(p * k + c)
        head = [p for p in range(rep.n) if p not in tail]
        val = evader_potential_at(lifted, head + tail, st)
        best_evader = val if best_evader is None else min(best_evader, val)
    server = server_potential(w, include_extended=True).value
    ok = server == best_evader + shift
    return ok, {"server": server, "evader_shifted": best_evader + shift}


# -- lazy adversary -------------------------------------------------------------


def default_step_bound(w: WorkFunction) -> int:
    return 10 * w.k * w.space.n * max(1, w.space.diameter)


def lazy_sequence(w: WorkFunction, xs: Sequence[int], max_steps: Optional[int] = None):
    """Request ``x_i`` for the largest ``i`` that still changes the work function.

    Returns ``(requests, extended_costs, final_work_function)``.
    """
    bound = default_step_bound(w) if max_steps is None else max_steps
    xs = [int(x) for x in xs]
    if len(set(xs)) != len(xs):
        raise ValueError("lazy sequences need distinct points (a multiset target never becomes a cone)")
    requests, costs = [], []
    cur = w
    while True:
        for x in reversed(xs):
            nxt = update(cur, x)
            if not np.array_equal(nxt.values, cur.values):
                break
        else:
            return requests, costs, cur
        if len(requests) >= bound:
            raise NonTermination(f"lazy sequence exceeded {bound} steps")
        costs.append(int((nxt.values - cur.values).max()))
        requests.append(x)
        cur = nxt


def is_cone_at(w: WorkFunction, X) -> bool:
    X = tuple(sorted(int(p) for p in X))
    return list(w.support()) == [X]


def verify_perm_intuition(w: WorkFunction, xs: Sequence[int], max_steps: Optional[int] = None) -> bool:
    """``Phi_x(w) = k(k+1)/2 D - cl(x) + (k+1) w(x) - total extended cost of the lazy sequence``."""
    _, costs, _ = lazy_sequence(w, xs, max_steps)
    k = w.k
    rhs = k * (k + 1) // 2 * w.space.diameter - pairwise_sum(w.space, xs) + (k + 1) * w(xs) - sum(costs)
    return server_potential_at(w, xs) == rhs


def _max_total_cost(w: WorkFunction, X: Sequence[int], memo: dict, budget: list) -> int:
    key = w.values.tobytes()
    if key in memo:
        return memo[key]
    best = 0
    for x in sorted(set(X)):
        nxt = update(w, x)
        inc = nxt.values - w.values
        if inc.any():
            budget[0] -= 1
            if budget[0] < 0:
                raise NonTermination("exhaustive lazy search exceeded its state budget")
            best = max(best, int(inc.max()) + _max_total_cost(nxt, X, memo, budget))
    memo[key] = best
    return best


def lazy_potential_k3(w: WorkFunction, points=None, exhaustive: bool = False, budget: int = 200_000) -> PotentialReport:
    """``6D + min over X of 4 w(X) - cl(X) - (extended cost of a sequence in X)``.

    By default the sequences are the lazy ones for each ordering of ``X``.
    With ``exhaustive=True`` the largest total extended cost over *all*
    sequences inside ``X`` is found by memoised search.
    """
    if w.k != 3:
        raise ValueError("lazy_potential_k3 requires k = 3")
    pts = _candidate_points(w, points, False)
    delta = w.space.diameter
    best = None
    for X in itertools.combinations(sorted(set(int(p) for p in pts)), 3):
        base = 4 * w(X) - pairwise_sum(w.space, X)
        if exhaustive:
            spent = _max_total_cost(w, X, {}, [budget])
            cand = [(base - spent, X)]
        else:
            cand = []
            for order in set(itertools.permutations(X)):
                _, costs, _ = lazy_sequence(w, order)
                cand.append((base - sum(costs), order))
        for val, order in cand:
            if best is None or (val, order) < best:
                best = (val, order)
    value = 6 * delta + best[0]
    return PotentialReport(value, tuple(best[1]), [], "lazy_k3", [tuple(best[1])], w.space.scale)


def check_push_last(w: WorkFunction, points=None) -> tuple:
    """For every k-set ``X`` containing the last request ``r``, the minimum of
    ``Phi_pi`` over orderings of ``X`` is attained with ``r`` last."""
    r = w.last_request
    if r is None:
        raise ValueError("work function has no last request")
    pts = sorted(set(int(p) for p in _candidate_points(w, points, False)) - {r})
    for rest in itertools.combinations(pts, w.k - 1):
        X = rest + (r,)
        vals = {pi: server_potential_at(w, pi) for pi in itertools.permutations(X)}
        if min(vals.values()) != min(v for pi, v in vals.items() if pi[-1] == r):
            return False, X
    return True, None


def check_push3(w: WorkFunction, points=None) -> bool:
    if w.k != 3:
        raise ValueError("check_push3 requires k = 3")
    return check_push_last(w, points)[0]


def search_push_failure(space: MetricSpace, k: int, rng: np.random.Generator, trials: int, steps=(1, 12)):
    """Random search for a reachable work function where ``check_push_last`` fails."""
    from .workfn import random_reachable

    for trial in range(trials):
        w = random_reachable(space, k, rng, steps)
        ok, X = check_push_last(w)
        if not ok:
            return {"trial": trial, "set": X, "work_function": w}
    return None


def laziness_gap(w: WorkFunction, r: int, points=None) -> int:
    """``Phi(w ^ r) - Phi(w) - extended cost``; negative means the potential fails to pay."""
    w2 = update(w, r)
    return (
        server_potential(w2, points).value
        - server_potential(w, points).value
        - extended_cost(w, r, updated=w2)
    )


# -- k = n - 2: minimum spanning tree form --------------------------------------


def _prim(n: int, weight) -> tuple:
    if n == 0:
        return 0, []
    inside = {0}
    total = 0
    edges = []
    while len(inside) < n:
        val, u, v = min((weight(u, v), u, v) for u in inside for v in range(n) if v not in inside)
        total += val
        edges.append((u, v))
        inside.add(v)
    return total, edges


def mst_evader_potential(w: WorkFunction) -> PotentialReport:
    """MST weight under edge weights ``w(M - {x, y}) + d(x, y)`` (two evaders, ``k = n - 2``).

    Equals the evader potential exactly.  ``extra['r_is_leaf']`` records
    whether some minimum spanning tree has the last request as a leaf.
    """
    n = w.space.n
    if w.k != n - 2:
        raise ValueError("MST potential requires k = n - 2")
    everything = set(range(n))

    def weight(x, y):
        return w(sorted(everything - {x, y})) + w.space.d(x, y)

    total, edges = _prim(n, weight)
    extra = {"edges": edges}
    r = w.last_request
    if r is not None:
        others = [p for p in range(n) if p != r]
        sub, _ = _prim(n - 1, lambda a, b: weight(others[a], others[b]))
        hang = min(weight(r, x) for x in others)
        extra["r_is_leaf"] = sub + hang == total
    return PotentialReport(total, tuple(edges), [], "mst", [], w.space.scale, extra)


def spanning_trees(n: int):
    """All labelled spanning trees of ``K_n`` via Pruefer sequences."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = min(u for u in range(n) if degree[u] == 1)
            edges.append((leaf, v))
            degree[leaf] -= 1
            degree[v] -= 1
        u, v = [x for x in range(n) if degree[x] == 1]
        edges.append((u, v))
        yield edges


# -- reporting --------------------------------------------------------------------


def format_terms(w: WorkFunction, xs: Sequence[int]) -> str:
    """Per-term breakdown of ``Phi_x(w)`` in original units."""
    space = w.space
    cfgs = term_configs(space, xs)
    vals = [w(c) for c in cfgs]
    name = "".join(space.label(x) for x in xs) if all(len(space.label(x)) == 1 for x in xs) else ",".join(space.label(x) for x in xs)
    lines = [f"Phi_{name}(w)"]
    for c, v in zip(cfgs, vals):
        lines.append(f"  w({' '.join(space.label(p) for p in c)}) = {space.value(v)}")
    lines.append("  = " + " + ".join(str(space.value(v)) for v in vals) + f" = {space.value(sum(vals))}")
    return "\n".join(lines)
