"""Tree representation and the three observation settings.

A balanced two-community recursive tree on ``2n`` nodes stores one node per
(time label, type) pair.  Node ids encode both coordinates:

    id = 2 * (t - 1) + b      with t in 1..n and b = 0 (type A) or 1 (type B)

so ``id // 2 + 1`` recovers the time label and ``id & 1`` the type.  The two
time-1 nodes are joined by the root edge, which is kept implicit: neither of
them has a parent entry.

Observation settings successively discard information: the labelled setting
keeps time labels but drops types, the rooted setting keeps only the
structure plus the root edge, and the unrooted setting keeps structure only.
Projections are canonical, so two trees that are isomorphic in a setting
project to equal payloads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from ._kernels import subtree_sizes_kernel
from .errors import ParameterError, StructureError

TYPE_A = 0
TYPE_B = 1


def node_id(t: int, kind: int) -> int:
    """Node id of the type-``kind`` node with time label ``t``."""
    return 2 * (t - 1) + kind


def node_time(i: int) -> int:
    return i // 2 + 1


def node_type(i: int) -> int:
    return i & 1


class Setting(str, Enum):
    """The three observation settings, ordered by decreasing information."""

    LABELLED = "labelled"
    ROOTED_UNLABELLED = "rooted"
    UNROOTED_UNLABELLED = "unrooted"


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Canonical byte encoding of an unlabelled (optionally colored) tree.

    Equal codes characterise isomorphic trees within one setting.  The code
    is an AHU-style balanced-parenthesis string with children sorted
    lexicographically, rooted at a centroid for unrooted trees and at a
    virtual node subdividing the root edge for root-edge trees.
    """

    code: bytes

    def hex(self) -> str:
        return self.code.hex()

    @classmethod
    def from_hex(cls, s: str) -> "CanonicalForm":
        return cls(bytes.fromhex(s))


@dataclass(frozen=True)
class TimeLabelledTree:
    """Flat parent-array tree over 2n nodes.

    ``parent[i]`` is the node id of the parent of node ``i``; the two time-1
    nodes carry -1.  Trees are immutable after construction and safe to share
    across threads.
    """

    n: int
    parent: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.parent, dtype=np.int64)
        if arr.shape != (2 * self.n,):
            raise StructureError(
                f"parent array must have length {2 * self.n}, got {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "parent", arr)

    def validate(self) -> None:
        """Check every structural invariant; raise StructureError on failure."""
        if self.n < 1:
            raise StructureError("need at least one time step")
        p = self.parent
        if p[0] != -1 or p[1] != -1:
            raise StructureError("the two time-1 nodes must be parentless")
        if self.n == 1:
            return
        rest = p[2:]
        if rest.min() < 0 or rest.max() >= 2 * self.n:
            raise StructureError("parent id out of range")
        child_times = np.arange(2, 2 * self.n) // 2
        if not np.all(rest // 2 < child_times):
            raise StructureError("a parent must have a strictly smaller time label")

    def adjacency(self) -> list[list[int]]:
        """Neighbour lists including the root edge."""
        adj: list[list[int]] = [[] for _ in range(2 * self.n)]
        adj[0].append(1)
        adj[1].append(0)
        for i in range(2, 2 * self.n):
            p = int(self.parent[i])
            adj[i].append(p)
            adj[p].append(i)
        return adj

    def time_labels(self) -> np.ndarray:
        return np.arange(2 * self.n, dtype=np.int64) // 2 + 1

    def to_json(self) -> str:
        parents = [None if v < 0 else int(v) for v in self.parent]
        return json.dumps({"n": self.n, "parent": parents})

    @classmethod
    def from_json(cls, text: str) -> "TimeLabelledTree":
        obj = json.loads(text)
        parent = np.array(
            [-1 if v is None else int(v) for v in obj["parent"]], dtype=np.int64
        )
        tree = cls(n=int(obj["n"]), parent=parent)
        tree.validate()
        return tree


@dataclass(frozen=True, eq=False)
class ObservedTree:
    """Projection of a tree to one observation setting.

    The canonical ``code`` is the identity of the observation: two trees
    isomorphic in a setting produce equal codes, and equality/hashing use the
    code.  The labelled projection additionally retains the type-erased
    parent array (pairs keep their arbitrary but fixed internal order); the
    rooted/unrooted projections retain a canonically relabelled edge list so
    structural statistics remain computable.  For rooted trees ``edges[0]``
    is the root edge.
    """

    setting: Setting
    n: int
    code: CanonicalForm
    parent: np.ndarray | None = field(default=None, repr=False)
    edges: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.parent is not None:
            arr = np.ascontiguousarray(self.parent, dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, "parent", arr)
        if self.edges is not None:
            arr = np.ascontiguousarray(self.edges, dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, "edges", arr)

    def __eq__(self, other):
        if not isinstance(other, ObservedTree):
            return NotImplemented
        return (
            self.setting == other.setting
            and self.n == other.n
            and self.code == other.code
        )

    def __hash__(self):
        return hash((self.setting, self.n, self.code))


def subtree_sizes(tree: TimeLabelledTree, root: int) -> np.ndarray:
    """Size of the descendant subtree of every node, rooting the tree at the
    chosen time-1 node (0 or 1) via the root edge.  Runs in O(n)."""
    if root not in (0, 1):
        raise ParameterError("root must be one of the two time-1 nodes (id 0 or 1)")
    return subtree_sizes_kernel(tree.parent, root)


# ---------------------------------------------------------------------------
# canonical forms


def _check_adjacency(adj: Sequence[Sequence[int]]) -> None:
    n = len(adj)
    if n == 0:
        raise StructureError("empty graph")
    m = sum(len(a) for a in adj)
    if m != 2 * (n - 1):
        raise StructureError("a tree on n nodes has exactly n-1 edges")
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    if count != n:
        raise StructureError("graph is not connected")


def _ahu_layout(
    adj: Sequence[Sequence[int]],
    roots: Sequence[int],
    labels: Sequence[int] | None = None,
) -> tuple[bytes, np.ndarray]:
    """AHU code and canonically relabelled edge list.

    ``roots`` is either ``[r]`` (root the tree at node r) or ``[a, b]`` (root
    at a virtual node subdividing edge a-b).  Children are ordered by code,
    which makes the BFS relabelling canonical: isomorphic inputs yield both
    the same code and the same (parent, child) edge array.
    """
    n = len(adj)
    parent = [-2] * n
    if len(roots) == 2:
        a, b = roots
        parent[a], parent[b] = b, a  # blocks traversal across the root edge
        order = [a, b]
        is_root_pair = True
    else:
        parent[roots[0]] = -1
        order = [roots[0]]
        is_root_pair = False
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for w in adj[v]:
            if parent[w] == -2:
                parent[w] = v
                order.append(w)
    if len(order) != n:
        raise StructureError("graph is not connected")

    root_set = set(roots)
    codes: list[bytes] = [b""] * n
    children: list[list[int]] = [[] for _ in range(n)]
    for v in reversed(order):
        kids = [
            w
            for w in adj[v]
            if parent[w] == v and not (is_root_pair and v in root_set and w in root_set)
        ]
        kids.sort(key=lambda w: codes[w])
        children[v] = kids
        prefix = (str(labels[v]).encode() + b":") if labels is not None else b""
        codes[v] = b"(" + prefix + b"".join(codes[w] for w in kids) + b")"

    if is_root_pair:
        first, second = sorted(roots, key=lambda r: codes[r])
        top = b"(" + codes[first] + codes[second] + b")"
        queue = [first, second]
    else:
        top = codes[roots[0]]
        queue = [roots[0]]

    new_id = {v: i for i, v in enumerate(queue)}
    out_edges: list[tuple[int, int]] = [(0, 1)] if is_root_pair else []
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for w in children[v]:
            new_id[w] = len(new_id)
            out_edges.append((new_id[v], new_id[w]))
            queue.append(w)
    edges = np.array(out_edges, dtype=np.int64).reshape(-1, 2)
    return top, edges


def _centroids(adj: Sequence[Sequence[int]]) -> list[int]:
    n = len(adj)
    if n == 1:
        return [0]
    parent = [-2] * n
    parent[0] = -1
    order = [0]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for w in adj[v]:
            if parent[w] == -2:
                parent[w] = v
                order.append(w)
    size = [1] * n
    heaviest = [0] * n  # largest child subtree
    for v in reversed(order[1:]):
        p = parent[v]
        size[p] += size[v]
        if size[v] > heaviest[p]:
            heaviest[p] = size[v]
    best = n + 1
    cents: list[int] = []
    for v in range(n):
        worst = max(heaviest[v], n - size[v])
        if worst < best:
            best = worst
            cents = [v]
        elif worst == best:
            cents.append(v)
    return cents


def canonical_rooted(
    adj: Sequence[Sequence[int]],
    root: int,
    labels: Sequence[int] | None = None,
) -> CanonicalForm:
    """Canonical code of the tree rooted at ``root``."""
    _check_adjacency(adj)
    code, _ = _ahu_layout(adj, [root], labels)
    return CanonicalForm(code)


def canonical_unrooted(
    adj: Sequence[Sequence[int]],
    labels: Sequence[int] | None = None,
) -> CanonicalForm:
    """Canonical code of an unrooted tree: root at the centroid, taking the
    lexicographically smaller code when there are two centroids."""
    _check_adjacency(adj)
    code = min(_ahu_layout(adj, [c], labels)[0] for c in _centroids(adj))
    return CanonicalForm(code)


def canonical_root_edge(
    adj: Sequence[Sequence[int]],
    a: int,
    b: int,
    labels: Sequence[int] | None = None,
) -> CanonicalForm:
    """Canonical code of a tree carrying a distinguished edge a-b, rooted at
    a virtual node subdividing that edge."""
    _check_adjacency(adj)
    code, _ = _ahu_layout(adj, [a, b], labels)
    return CanonicalForm(code)


def project(tree: TimeLabelledTree, setting: Setting) -> ObservedTree:
    """Deterministic projection of a tree to an observation setting."""
    setting = Setting(setting)
    adj = tree.adjacency()
    if setting is Setting.LABELLED:
        code, _ = _ahu_layout(adj, [0, 1], labels=tree.time_labels())
        return ObservedTree(setting, tree.n, CanonicalForm(code), parent=tree.parent)
    if setting is Setting.ROOTED_UNLABELLED:
        code, edges = _ahu_layout(adj, [0, 1])
        return ObservedTree(setting, tree.n, CanonicalForm(code), edges=edges)
    best: tuple[bytes, np.ndarray] | None = None
    for c in _centroids(adj):
        cand = _ahu_layout(adj, [c])
        if best is None or cand[0] < best[0]:
            best = cand
    assert best is not None
    return ObservedTree(setting, tree.n, CanonicalForm(best[0]), edges=best[1])
