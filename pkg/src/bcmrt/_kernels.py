"""Compiled inner loops.

These kernels carry the only per-node sequential work in the package; they
are deliberately tiny and operate on plain int64 arrays so that numba can
cache the compiled machine code between runs.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def subtree_sizes_kernel(parent: np.ndarray, root: int) -> np.ndarray:
    """Subtree sizes with the tree hung from ``root`` (0 or 1) via the root edge.

    ``parent`` is a 2n parent array with -1 for both time-1 nodes.  Node ids
    encode time labels, so every node's parent has a smaller id except across
    the root edge, which is re-oriented here.
    """
    m = parent.shape[0]
    other = 1 - root
    size = np.ones(m, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        if i == root:
            continue
        p = root if i == other else parent[i]
        size[p] += size[i]
    return size


@njit(cache=True)
def subtree_counts_kernel(parent: np.ndarray, root: int) -> tuple[np.ndarray, np.ndarray]:
    """Subtree sizes plus per-subtree counts of even-id (type A) nodes."""
    m = parent.shape[0]
    other = 1 - root
    size = np.ones(m, dtype=np.int64)
    count_a = np.empty(m, dtype=np.int64)
    for i in range(m):
        count_a[i] = 1 - (i & 1)
    for i in range(m - 1, -1, -1):
        if i == root:
            continue
        p = root if i == other else parent[i]
        size[p] += size[i]
        count_a[p] += count_a[i]
    return size, count_a


@njit(cache=True)
def sizes_from_edges_kernel(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    """Subtree sizes for an edge list whose rows (parent, child) are emitted
    in BFS order, i.e. every node appears as a parent only after it appeared
    as a child."""
    size = np.ones(num_nodes, dtype=np.int64)
    for r in range(edges.shape[0] - 1, -1, -1):
        size[edges[r, 0]] += size[edges[r, 1]]
    return size
