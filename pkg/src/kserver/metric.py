"""Finite metric spaces with exact integer distances.

Distances are stored as integers in units of ``1/scale``; a circle of
circumference 8 with 16 points uses ``scale=2`` so the half-integer positions
are exact.  Everything downstream (work functions, potentials) works on these
scaled integers and divides the scale back out only when reporting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

KINDS = ("circle", "tree", "multiray", "star", "line", "general", "extended", "copies")


class MetricError(ValueError):
    """Raised when a space description violates the metric axioms or grid constraints."""


@dataclass(frozen=True, eq=False)
class MetricSpace:
    dist: np.ndarray
    scale: int = 1
    kind: str = "general"
    labels: tuple = ()
    antipode: Optional[np.ndarray] = None
    original: Optional[tuple] = None
    pseudo: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=np.int64)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(d))))
        if self.original is None:
            object.__setattr__(self, "original", tuple(range(len(d))))
        if self.antipode is not None:
            ap = np.asarray(self.antipode, dtype=np.int64)
            ap.setflags(write=False)
            object.__setattr__(self, "antipode", ap)
        validate(self)

    @property
    def n(self) -> int:
        return len(self.dist)

    @property
    def points(self) -> range:
        return range(self.n)

    @property
    def diameter(self) -> int:
        return int(self.dist.max()) if self.n else 0

    def d(self, x: int, y: int) -> int:
        return int(self.dist[x, y])

    def value(self, scaled) -> Fraction:
        """Convert a scaled integer back to original units."""
        return Fraction(int(scaled), self.scale)

    def point(self, label) -> int:
        """Resolve a label (string, int or numeric position) to a point id."""
        lookup = self._cache.get("labels")
        if lookup is None:
            lookup = {}
            for i, lab in enumerate(self.labels):
                lookup[str(lab)] = i
                try:
                    lookup[Fraction(str(lab))] = i
                except ValueError:
                    pass
            self._cache["labels"] = lookup
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            key = Fraction(int(label))
            if key in lookup:
                return lookup[key]
        if label in lookup:
            return lookup[label]
        try:
            key = Fraction(str(label))
        except ValueError:
            key = None
        if key is not None and key in lookup:
            return lookup[key]
        raise MetricError(f"unknown point {label!r} (not on the space grid)")

    def label(self, p: int) -> str:
        return str(self.labels[p])

    @property
    def has_antipodes(self) -> bool:
        return self.antipode is not None


def validate(space: MetricSpace) -> None:
    d = space.dist
    n = len(d)
    if d.ndim != 2 or d.shape != (n, n):
        raise MetricError("distance table must be square")
    if space.scale <= 0:
        raise MetricError("scale must be positive")
    if (d < 0).any():
        raise MetricError("negative distance")
    if (np.diag(d) != 0).any():
        raise MetricError("nonzero self-distance")
    if (d != d.T).any():
        raise MetricError("distance table is not symmetric")
    if not space.pseudo:
        off = d + np.eye(n, dtype=np.int64)
        if n and (off == 0).any():
            raise MetricError("distinct points at distance 0 (pass pseudo=True for a pseudo-metric)")
    bad = triangle_violation(d)
    if bad is not None:
        raise MetricError(f"triangle inequality fails for points {bad}")
    if space.antipode is not None:
        ap = space.antipode
        delta = space.diameter
        if (d[np.arange(n), ap] != delta).any() or (d + d[:, ap].T != delta).any():
            raise MetricError("antipode map does not satisfy px + x~p = p~p = diameter")
    if len(space.labels) != n:
        raise MetricError("label count does not match point count")


def triangle_violation(d: np.ndarray):
    """Return a violating triple (x, y, z) with d(x,z) > d(x,y) + d(y,z), or None."""
    n = len(d)
    for y in range(n):
        via = d[:, y][:, None] + d[y, :][None, :]
        bad = np.argwhere(d > via)
        if len(bad):
            x, z = bad[0]
            return int(x), y, int(z)
    return None


def find_antipodes(d: np.ndarray) -> Optional[np.ndarray]:
    """Antipode of every point if each point has one, else None."""
    n = len(d)
    if n == 0:
        return None
    delta = d.max()
    if delta == 0:
        return None
    ap = np.full(n, -1, dtype=np.int64)
    for p in range(n):
        for q in np.flatnonzero(d[p] == delta):
            if (d[p] + d[q] == delta).all():
                ap[p] = q
                break
        if ap[p] < 0:
            return None
    return ap


def _scaled(length, scale: int, what: str) -> int:
    v = Fraction(str(length)) * scale
    if v.denominator != 1:
        need = Fraction(str(length)).denominator
        raise MetricError(f"{what} {length} is not an integer at scale {scale}; try scale {scale * need}")
    return int(v)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else str(float(x)) if x.denominator in (2, 4, 5, 8, 10) else str(x)


def build_circle(num_points: int, circumference=None, scale: Optional[int] = None) -> MetricSpace:
    """Equally spaced points on a circle.  Labels are the positions along ``[0, circumference)``."""
    if num_points < 3:
        raise MetricError("a circle needs at least 3 points")
    circ = Fraction(str(circumference if circumference is not None else num_points))
    spacing = circ / num_points
    if scale is None:
        scale = spacing.denominator
    step = spacing * scale
    if step.denominator != 1:
        raise MetricError(
            f"spacing {spacing} is not an integer at scale {scale}; try scale {scale * step.denominator}"
        )
    step = int(step)
    i = np.arange(num_points)
    gap = np.abs(i[:, None] - i[None, :])
    dist = np.minimum(gap, num_points - gap) * step
    labels = tuple(_fmt(spacing * j) for j in range(num_points))
    ap = (i + num_points // 2) % num_points if num_points % 2 == 0 else None
    return MetricSpace(dist, scale=scale, kind="circle", labels=labels, antipode=ap)


def _tree_distances(nodes: list, edges: Sequence[tuple]) -> np.ndarray:
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    if len(edges) != n - 1:
        raise MetricError(f"{len(edges)} edges on {n} nodes cannot form a tree")
    adj = [[] for _ in range(n)]
    for u, v, w in edges:
        if w < 0:
            raise MetricError("negative edge weight")
        adj[index[u]].append((index[v], w))
        adj[index[v]].append((index[u], w))
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v, w in adj[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + w
                    stack.append(v)
        if (dist[s] < 0).any():
            raise MetricError("edges do not connect all nodes (tree is disconnected or has a cycle)")
    return dist


def build_tree(edges: Sequence[tuple], scale: int = 1) -> MetricSpace:
    """Tree metric on the vertices named in ``edges`` (triples ``(u, v, weight)``)."""
    nodes = []
    for u, v, _ in edges:
        for x in (u, v):
            if x not in nodes:
                nodes.append(x)
    if not nodes:
        raise MetricError("empty edge list")
    scaled = [(u, v, _scaled(w, scale, "edge weight")) for u, v, w in edges]
    dist = _tree_distances(nodes, scaled)
    return MetricSpace(dist, scale=scale, kind="tree", labels=tuple(str(x) for x in nodes))


def build_line(num_points: int, step=1, scale: int = 1) -> MetricSpace:
    """Points ``0, step, 2*step, ...`` on the real line."""
    s = _scaled(step, scale, "step")
    i = np.arange(num_points)
    dist = np.abs(i[:, None] - i[None, :]) * s
    labels = tuple(_fmt(Fraction(str(step)) * j) for j in range(num_points))
    return MetricSpace(dist, scale=scale, kind="line", labels=labels)


def build_multiray(ray_lengths: Sequence, step=1, scale: int = 1) -> MetricSpace:
    """Center ``c`` plus grid points along each ray.  Labels are ``c`` and ``<ray>:<position>``."""
    if len(ray_lengths) < 2:
        raise MetricError("a multiray space needs at least 2 rays")
    st = Fraction(str(step))
    edges = []
    for r, length in enumerate(ray_lengths):
        cells = Fraction(str(length)) / st
        if cells.denominator != 1 or cells <= 0:
            raise MetricError(f"ray length {length} is not a positive multiple of step {step}")
        prev = "c"
        for j in range(1, int(cells) + 1):
            name = f"{r}:{_fmt(st * j)}"
            edges.append((prev, name, st))
            prev = name
    space = build_tree(edges, scale=scale)
    return MetricSpace(space.dist, scale=scale, kind="multiray", labels=space.labels)


def build_star(leaf_weights: Sequence, scale: int = 1) -> MetricSpace:
    """Weighted star with the center included; leaves are named ``l0, l1, ...``."""
    edges = [("c", f"l{i}", w) for i, w in enumerate(leaf_weights)]
    space = build_tree(edges, scale=scale)
    return MetricSpace(space.dist, scale=scale, kind="star", labels=space.labels)


def build_general(matrix, scale: int = 1, labels: Sequence = ()) -> MetricSpace:
    rows = [[_scaled(v, scale, "distance") for v in row] for row in matrix]
    return MetricSpace(np.array(rows, dtype=np.int64), scale=scale, kind="general", labels=tuple(labels))


def antipodal_extension(space: MetricSpace) -> MetricSpace:
    """Add a mirror copy ``~p`` of every point with ``~p~q = pq`` and ``~pq = 2D - pq``.

    A space in which every point already has an antipode is returned unchanged.
    """
    if space.has_antipodes:
        return space
    delta = space.diameter
    if delta <= 0:
        raise MetricError("antipodal extension needs positive diameter")
    d = space.dist
    n = space.n
    ext = np.empty((2 * n, 2 * n), dtype=np.int64)
    ext[:n, :n] = d
    ext[n:, n:] = d
    ext[:n, n:] = 2 * delta - d
    ext[n:, :n] = 2 * delta - d
    ap = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
    labels = tuple(space.labels) + tuple("~" + str(lab) for lab in space.labels)
    return MetricSpace(
        ext,
        scale=space.scale,
        kind="extended",
        labels=labels,
        antipode=ap,
        original=tuple(space.original),
        pseudo=space.pseudo,
    )


def replicate_points(space: MetricSpace, copies: int) -> tuple[MetricSpace, np.ndarray]:
    """Pseudo-metric with ``copies`` zero-distance copies of each point.

    Returns the new space and the projection array (new point -> old point).
    Copy ``c`` of point ``p`` has id ``p * copies + c``.
    """
    proj = np.repeat(np.arange(space.n), copies)
    d = space.dist[np.ix_(proj, proj)]
    ap = None
    if space.antipode is not None:
        ap = space.antipode[proj] * copies + np.tile(np.arange(copies), space.n)
    labels = tuple(f"{space.labels[p]}#{c}" for p in range(space.n) for c in range(copies))
    rep = MetricSpace(d, scale=space.scale, kind="copies", labels=labels, antipode=ap, pseudo=True)
    return rep, proj


# -- configurations ---------------------------------------------------------


def canon(points) -> tuple:
    """Canonical (sorted) form of a configuration."""
    return tuple(sorted(int(p) for p in points))


def pairwise_sum(space: MetricSpace, points) -> int:
    pts = list(points)
    return sum(space.d(a, b) for a, b in itertools.combinations(pts, 2))


def matching_distance(space: MetricSpace, X, Y, method: str = "auto") -> int:
    """Minimum-cost perfect matching between two configurations of equal size."""
    X, Y = list(X), list(Y)
    if len(X) != len(Y):
        raise ValueError(f"configurations have different sizes {len(X)} and {len(Y)}")
    if not X:
        return 0
    if method == "auto":
        method = "brute" if len(X) <= 5 else "assignment"
    d = space.dist
    if method == "brute":
        return int(min(sum(d[x, y] for x, y in zip(X, perm)) for perm in itertools.permutations(Y)))
    cost = d[np.ix_(X, Y)]
    rows, cols = linear_sum_assignment(cost)
    return int(cost[rows, cols].sum())


# -- quasiconcavity and trees -----------------------------------------------


def _three_sums(d, a, b, c, e):
    return (d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c])


def is_quasiconcave(space_or_dist) -> tuple[bool, Optional[tuple]]:
    """Four-point test: the largest of the three pair-sums must be attained twice."""
    d = np.asarray(getattr(space_or_dist, "dist", space_or_dist))
    n = len(d)
    if n < 4:
        return True, None
    quads = np.array(list(itertools.combinations(range(n), 4)))
    a, b, c, e = quads.T
    sums = np.stack([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]], axis=1)
    top = sums.max(axis=1)
    ties = (sums == top[:, None]).sum(axis=1)
    bad = np.flatnonzero(ties < 2)
    if len(bad):
        return False, tuple(int(v) for v in quads[bad[0]])
    return True, None


def is_quasiconcave_scan(space_or_dist) -> tuple[bool, Optional[tuple]]:
    """Loop version of :func:`is_quasiconcave`; kept as an independent cross-check."""
    d = np.asarray(getattr(space_or_dist, "dist", space_or_dist))
    for quad in itertools.combinations(range(len(d)), 4):
        s = sorted(_three_sums(d, *quad), reverse=True)
        if s[0] != s[1]:
            return False, quad
    return True, None


@dataclass
class WeightedTree:
    """Tree whose nodes ``0..n_leaves-1`` are the metric points; higher ids are internal."""

    n_leaves: int
    adj: dict = field(default_factory=dict)

    def add_node(self) -> int:
        v = max(self.adj, default=-1) + 1
        v = max(v, self.n_leaves)
        self.adj[v] = {}
        return v

    def add_edge(self, u: int, v: int, w) -> None:
        self.adj.setdefault(u, {})[v] = Fraction(w)
        self.adj.setdefault(v, {})[u] = Fraction(w)

    def remove_edge(self, u: int, v: int) -> None:
        del self.adj[u][v]
        del self.adj[v][u]

    @property
    def edges(self) -> list:
        return sorted((u, v, w) for u in self.adj for v, w in self.adj[u].items() if u < v)

    def path(self, s: int, t: int) -> list:
        prev = {s: None}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in prev:
                    prev[v] = u
                    stack.append(v)
        out = [t]
        while out[-1] != s:
            out.append(prev[out[-1]])
        return out[::-1]

    def distances_from(self, s: int) -> dict:
        dist = {s: Fraction(0)}
        stack = [s]
        while stack:
            u = stack.pop()
            for v, w in self.adj[u].items():
                if v not in dist:
                    dist[v] = dist[u] + w
                    stack.append(v)
        return dist

    def leaf_distance(self) -> np.ndarray:
        n = self.n_leaves
        out = np.zeros((n, n), dtype=object)
        for s in range(n):
            ds = self.distances_from(s)
            for t in range(n):
                out[s, t] = ds[t]
        return out

    def is_tree(self) -> bool:
        nodes = list(self.adj)
        if not nodes:
            return False
        return len(self.edges) == len(nodes) - 1 and len(self.distances_from(nodes[0])) == len(nodes)


def tree_from_quasiconcave(space_or_dist) -> WeightedTree:
    """Weighted tree whose leaf-distance reproduces a quasiconcave metric.

    Points are inserted one at a time.  The new point ``z`` hangs off the path
    between the pair ``x, y`` minimising ``v(x,z) + v(y,z) - v(x,y)``, at the
    position fixed by the three half-sums of the triangle ``x, y, z``.
    """
    v = np.asarray(getattr(space_or_dist, "dist", space_or_dist))
    ok, witness = is_quasiconcave(v)
    if not ok:
        raise MetricError(f"metric is not quasiconcave; violating quadruple {witness}")
    n = len(v)
    tree = WeightedTree(n)
    tree.adj[0] = {}
    if n == 1:
        return tree
    tree.add_edge(0, 1, int(v[0, 1]))
    for z in range(2, n):
        x, y = min(
            itertools.combinations(range(z), 2),
            key=lambda p: (int(v[p[0], z] + v[p[1], z] - v[p[0], p[1]]), p),
        )
        from_x = Fraction(int(v[x, y] + v[x, z] - v[y, z]), 2)
        hang = Fraction(int(v[x, z] + v[y, z] - v[x, y]), 2)
        a = _point_on_path(tree, x, y, from_x)
        tree.add_edge(a, z, hang)
    return tree


def _point_on_path(tree: WeightedTree, x: int, y: int, offset: Fraction) -> int:
    """Node at distance ``offset`` from ``x`` on the x-y path, splitting an edge if needed."""
    path = tree.path(x, y)
    pos = Fraction(0)
    for u, w in zip(path, path[1:]):
        if pos == offset:
            return u
        length = tree.adj[u][w]
        if pos + length > offset:
            mid = tree.add_node()
            tree.remove_edge(u, w)
            tree.add_edge(u, mid, offset - pos)
            tree.add_edge(mid, w, pos + length - offset)
            return mid
        pos += length
    return path[-1]


def leaf_metric(tree: WeightedTree) -> np.ndarray:
    """Leaf-distance as an integer table (raises if any distance is fractional)."""
    ld = tree.leaf_distance()
    out = np.zeros(ld.shape, dtype=np.int64)
    for idx, val in np.ndenumerate(ld):
        if Fraction(val).denominator != 1:
            raise MetricError("leaf distance is not integral")
        out[idx] = int(val)
    return out


def random_tree_metric(rng: np.random.Generator, n_leaves: int, max_weight: int = 6, extra_internal: int = 3):
    """Random weighted tree and the integer leaf-distance of its first ``n_leaves`` nodes."""
    total = n_leaves + extra_internal
    order = rng.permutation(total)
    edges = []
    for i in range(1, total):
        parent = order[rng.integers(0, i)]
        edges.append((int(order[i]), int(parent), int(rng.integers(1, max_weight + 1))))
    nodes = list(range(total))
    d = _tree_distances(nodes, edges)
    return edges, d[:n_leaves, :n_leaves]


def random_metric(rng: np.random.Generator, n: int, low: int = 1, high: int = 6) -> MetricSpace:
    """Random integer metric: shortest-path closure of random positive weights."""
    w = rng.integers(low, high + 1, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    for m in range(n):
        w = np.minimum(w, w[:, m][:, None] + w[m, :][None, :])
    return MetricSpace(w, kind="general")

