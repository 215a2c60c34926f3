"""Heap-indexed complete full binary tree over canonical-basis supports.

Nodes are numbered 1..2d-1; node m has children 2m and 2m+1 and parent m//2.
Internal nodes are 1..d-1, leaves are d..2d-1, and leaf m carries the
canonical label m - d + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TreeLayout:
    dim: int
    supports: tuple  # supports[m] is a sorted tuple of labels 1..d; index 0 unused

    @property
    def node_count(self) -> int:
        return 2 * self.dim - 1

    @property
    def internal_nodes(self) -> range:
        return range(1, self.dim)

    @property
    def leaves(self) -> range:
        return range(self.dim, 2 * self.dim)

    def is_leaf(self, m: int) -> bool:
        self._check(m)
        return m >= self.dim

    def node_dim(self, m: int) -> int:
        self._check(m)
        return len(self.supports[m])

    def leaf_label(self, m: int) -> int:
        if not self.is_leaf(m):
            raise ValueError(f"node {m} is not a leaf")
        return m - self.dim + 1

    def support_indices(self, m: int) -> np.ndarray:
        """0-based array indices of the node's canonical labels."""
        self._check(m)
        return np.asarray(self.supports[m], dtype=np.intp) - 1

    def _check(self, m: int) -> None:
        if not 1 <= m <= self.node_count:
            raise ValueError(f"node index {m} out of range 1..{self.node_count}")


def build_tree(d: int) -> TreeLayout:
    """Build the heap layout for dimension d (d = 1 gives the trivial one-node tree)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    supports = [None] * (2 * d)
    for m in range(2 * d - 1, d - 1, -1):
        supports[m] = (m - d + 1,)
    for m in range(d - 1, 0, -1):
        supports[m] = tuple(sorted(supports[2 * m] + supports[2 * m + 1]))
    return TreeLayout(dim=d, supports=tuple(supports))


def node_support(t: TreeLayout, m: int):
    """Sorted canonical labels spanning node m's subspace."""
    t._check(m)
    return t.supports[m]
