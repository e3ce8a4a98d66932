"""Graded lexicographic enumeration of multi-indices.

The ordering is graded by the sup norm and refined lexicographically, so the
first M^d indices are exactly the discrete hypercube {0..M-1}^d and index
layers fill one hypercube shell at a time.
"""

from __future__ import annotations

import itertools
import threading

import numpy as np

MultiIndex = tuple[int, ...]


def _check(mi: MultiIndex) -> MultiIndex:
    mi = tuple(int(v) for v in mi)
    if len(mi) == 0 or any(v < 0 for v in mi):
        raise ValueError(f"multi-index must be nonempty and nonnegative: {mi}")
    return mi


def graded_lex_key(mi: MultiIndex):
    """Sort key realizing the order: sup norm first, then lexicographic."""
    mi = _check(mi)
    return (max(mi), mi)


def graded_lex_less(k: MultiIndex, l: MultiIndex) -> bool:
    """Strict comparison; total order on multi-indices of one dimension."""
    k, l = _check(k), _check(l)
    if len(k) != len(l):
        raise ValueError("comparing multi-indices of different dimensions")
    return graded_lex_key(k) < graded_lex_key(l)


class MultiIndexBasis:
    """Bijection n <-> multi-index for a fixed dimension d.

    The enumeration is cached shell by shell; growth is lock-protected so a
    basis can be shared between threads.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = int(d)
        self._lock = threading.Lock()
        self._flat: list[MultiIndex] = [(0,) * self.d]
        self._rank: dict[MultiIndex, int] = {self._flat[0]: 0}
        self._shells_done = 1  # sup norms < this are fully enumerated

    def _grow_to_shell(self, sup: int) -> None:
        with self._lock:
            while self._shells_done <= sup:
                m = self._shells_done
                shell = sorted(
                    mi
                    for mi in itertools.product(range(m + 1), repeat=self.d)
                    if max(mi) == m
                )
                for mi in shell:
                    self._rank[mi] = len(self._flat)
                    self._flat.append(mi)
                self._shells_done += 1

    def bijection(self, n: int) -> MultiIndex:
        """Multi-index of flat index n."""
        if n < 0:
            raise IndexError("flat index must be >= 0")
        while len(self._flat) <= n:
            self._grow_to_shell(self._shells_done)
        return self._flat[n]

    __getitem__ = bijection

    def bijection_inverse(self, mi: MultiIndex) -> int:
        """Flat index of a multi-index; total, by growing the cache."""
        mi = _check(mi)
        if len(mi) != self.d:
            raise ValueError(f"expected dimension {self.d}, got {len(mi)}")
        self._grow_to_shell(max(mi))
        return self._rank[mi]

    def prefix(self, n: int) -> list[MultiIndex]:
        """The first n multi-indices in order."""
        if n < 1:
            raise IndexError("prefix length must be >= 1")
        self.bijection(n - 1)
        return self._flat[:n]

    def prefix_array(self, n: int) -> np.ndarray:
        """The first n multi-indices as an (n, d) integer array."""
        return np.array(self.prefix(n), dtype=np.int64)

    def hypercube_prefix(self, M: int) -> set[MultiIndex]:
        """The first M^d indices as a set; equals the hypercube {0..M-1}^d."""
        if M < 1:
            raise IndexError("M must be >= 1")
        return set(self.prefix(M**self.d))
