"""Dense indexing of k-point multisets.

A configuration ``a_0 <= ... <= a_{k-1}`` maps to the strictly increasing
``b_i = a_i + i`` and is ranked colexicographically by ``sum C(b_i, i+1)``.
The rank is a bijection onto ``0 .. C(n+k-1, k) - 1`` and is cheap to compute
for whole arrays of configurations at once.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np


class ConfigTable:
    def __init__(self, space, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.space = space
        self.k = k
        n = space.n
        self.n = n
        self.size = comb(n + k - 1, k)
        top = n + k
        self._binom = np.array([[comb(b, i) for i in range(k + 1)] for b in range(top + 1)], dtype=np.int64)
        configs = np.array(list(itertools.combinations_with_replacement(range(n), k)), dtype=np.int64)
        configs = configs[np.argsort(self.rank(configs))]
        configs.setflags(write=False)
        self.configs = configs
        self._replace = {}
        self._perm_cache = None

    def rank(self, arr) -> np.ndarray:
        """Ranks of configurations; rows must already be sorted."""
        arr = np.asarray(arr, dtype=np.int64)
        shift = np.arange(self.k)
        return self._binom[arr + shift, shift + 1].sum(axis=-1)

    def index(self, config) -> int:
        c = np.sort(np.asarray(config, dtype=np.int64))
        if c.shape != (self.k,):
            raise ValueError(f"configuration {tuple(config)} does not have {self.k} points")
        if c.min() < 0 or c.max() >= self.n:
            raise ValueError(f"configuration {tuple(config)} has points outside the space")
        return int(self.rank(c))

    def config(self, i: int) -> tuple:
        return tuple(int(p) for p in self.configs[i])

    def replace(self, r: int) -> np.ndarray:
        """``out[i, j]`` = index of ``configs[i]`` with its ``j``-th point replaced by ``r``."""
        out = self._replace.get(r)
        if out is None:
            out = np.empty((self.size, self.k), dtype=np.int64)
            k, B = self.k, self._binom
            for j in range(k):
                # rows stay sorted without column j; r lands at slot p and later points shift up one
                rest = np.delete(self.configs, j, axis=1)
                p = (rest < r).sum(axis=1)
                slot = np.arange(k - 1)[None, :]
                slot = slot + (slot >= p[:, None])
                out[:, j] = B[rest + slot, slot + 1].sum(axis=1) + B[r + p, p + 1]
            out.setflags(write=False)
            self._replace[r] = out
        return out

    def move_cost(self, r: int) -> np.ndarray:
        return self.space.dist[self.configs, r]

    def contains(self, r: int) -> np.ndarray:
        return (self.configs == r).any(axis=1)

    def matching_to_all(self, X) -> np.ndarray:
        """Matching distance from ``X`` to every configuration."""
        X = np.asarray(X, dtype=np.int64)
        d = self.space.dist
        best = None
        for perm in self.perms():
            cost = d[X[list(perm)][None, :], self.configs].sum(axis=1)
            best = cost if best is None else np.minimum(best, cost)
        return best

    def matching_matrix(self, rows=None) -> np.ndarray:
        """Matching distances between ``configs[rows]`` and all configurations."""
        d = self.space.dist
        A = self.configs if rows is None else self.configs[rows]
        best = None
        for perm in self.perms():
            cost = np.zeros((len(A), self.size), dtype=np.int64)
            for j, pj in enumerate(perm):
                cost += d[A[:, pj][:, None], self.configs[:, j][None, :]]
            best = cost if best is None else np.minimum(best, cost)
        return best

    def perms(self):
        if self._perm_cache is None:
            if self.k > 6:
                raise ValueError("brute-force matching is limited to k <= 6")
            self._perm_cache = list(itertools.permutations(range(self.k)))
        return self._perm_cache


def table(space, k: int) -> ConfigTable:
    """Shared :class:`ConfigTable` for ``(space, k)``."""
    key = ("configs", k)
    t = space._cache.get(key)
    if t is None:
        t = ConfigTable(space, k)
        space._cache[key] = t
    return t
