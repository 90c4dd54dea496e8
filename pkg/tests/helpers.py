"""Independent reference implementations used as oracles by the tests.

Everything here recomputes quantities along a different route than the
package (explicit traversals, BFS distance sums, direct children-list
recursion), so agreement is evidence rather than tautology.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from bcmrt import TimeLabelledTree


def tree_from_parents(parents) -> TimeLabelledTree:
    arr = np.array([-1 if p is None else p for p in parents], dtype=np.int64)
    tree = TimeLabelledTree(n=len(arr) // 2, parent=arr)
    tree.validate()
    return tree


def children_lists(tree: TimeLabelledTree, root: int) -> list[list[int]]:
    """Children lists with the tree hung from time-1 node ``root``."""
    kids: list[list[int]] = [[] for _ in range(2 * tree.n)]
    kids[root].append(1 - root)
    for i in range(2, 2 * tree.n):
        kids[int(tree.parent[i])].append(i)
    return kids


def slow_subtree_sizes(tree: TimeLabelledTree, root: int) -> np.ndarray:
    """Subtree sizes by explicit post-order traversal over children lists."""
    kids = children_lists(tree, root)
    size = np.ones(2 * tree.n, dtype=np.int64)
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            for c in kids[node]:
                size[node] += size[c]
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in kids[node])
    return size


def bfs_distances(adj, source: int) -> np.ndarray:
    dist = np.full(len(adj), -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def pairwise_distance_sum(adj) -> int:
    """Sum of all pairwise distances by all-pairs BFS."""
    total = 0
    for v in range(len(adj)):
        total += int(bfs_distances(adj, v).sum())
    return total // 2


def tree_distance(adj, a: int, b: int) -> int:
    return int(bfs_distances(adj, a)[b])


def swap_pairs(tree: TimeLabelledTree, labels) -> TimeLabelledTree:
    """Relabel within the given time-label pairs (a labelled-setting
    automorphic relabelling; swapping every pair is the global type swap)."""
    perm = np.arange(2 * tree.n, dtype=np.int64)
    for t in labels:
        i = 2 * (t - 1)
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    new_parent = np.full(2 * tree.n, -1, dtype=np.int64)
    for i in range(2, 2 * tree.n):
        new_parent[perm[i]] = perm[int(tree.parent[i])]
    # perm maps old ids to new ids; pairs keep their labels so recursiveness
    # is preserved and the two time-1 slots stay parentless
    new_parent[0] = new_parent[1] = -1
    out = TimeLabelledTree(n=tree.n, parent=new_parent)
    out.validate()
    return out


def permute_adjacency(adj, perm) -> list[list[int]]:
    """Adjacency of the same graph with node i renamed perm[i]."""
    out: list[list[int]] = [[] for _ in range(len(adj))]
    for v, neigh in enumerate(adj):
        for w in neigh:
            out[perm[v]].append(perm[w])
    return out


def nx_adjacency(graph) -> list[list[int]]:
    """Adjacency lists of a networkx graph labelled 0..n-1."""
    return [[int(w) for w in graph.neighbors(v)] for v in sorted(graph.nodes())]
