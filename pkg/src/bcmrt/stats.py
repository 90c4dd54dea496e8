"""Observable statistics of a generated or observed tree.

Every function here is pure and reads immutable inputs.  Statistics that
need information an observation setting hides (types, time labels, the root
edge) raise SettingError instead of silently returning a default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import (
    sizes_from_edges_kernel,
    subtree_counts_kernel,
    subtree_sizes_kernel,
)
from .errors import ParameterError, SettingError
from .tree import ObservedTree, Setting, TimeLabelledTree

_INT64_SAFE = 1 << 62


def _exact_sum(values: np.ndarray, per_element_max: int) -> int:
    """Exact integer sum of an int64 array whose entries are bounded by
    ``per_element_max``; chunks keep partial sums inside int64 while the
    running total is an arbitrary-precision Python int."""
    if values.size == 0:
        return 0
    chunk = max(1, _INT64_SAFE // max(per_element_max, 1))
    if chunk >= values.size:
        return int(values.sum())
    total = 0
    for off in range(0, values.size, chunk):
        total += int(values[off : off + chunk].sum())
    return total


def _labelled_parent(obj) -> tuple[int, np.ndarray]:
    """Parent array of an input that still carries time labels."""
    if isinstance(obj, TimeLabelledTree):
        return obj.n, obj.parent
    if isinstance(obj, ObservedTree):
        if obj.setting is Setting.LABELLED and obj.parent is not None:
            return obj.n, obj.parent
        raise SettingError(
            f"statistic needs time labels, not available in the "
            f"{obj.setting.value} setting"
        )
    raise TypeError(f"expected a tree, got {type(obj).__name__}")


def _typed_tree(obj) -> TimeLabelledTree:
    if isinstance(obj, TimeLabelledTree):
        return obj
    raise SettingError("statistic needs node types, which only generated "
                       "trees carry")


@dataclass(frozen=True)
class DegreeProfile:
    """Degree histogram: counts[k] = number of nodes with degree k."""

    counts: dict[int, int]

    def total_nodes(self) -> int:
        return sum(self.counts.values())

    def total_degree(self) -> int:
        return sum(k * v for k, v in self.counts.items())


@dataclass(frozen=True)
class SplitStatistics:
    """Root-edge split: component size of the first time-1 node, the product
    of the two component sizes, and the cross-type sum (None when types are
    not observable)."""

    size_plus: int
    product: int
    cross_sum: int | None


def degree_counts(obj) -> DegreeProfile:
    """Exact degree histogram of the tree (root edge included).  Degrees are
    observable in every setting."""
    if isinstance(obj, ObservedTree) and obj.edges is not None:
        deg = np.bincount(obj.edges.ravel(), minlength=2 * obj.n)
    else:
        n, parent = _labelled_parent(obj)
        # every node has exactly one upward edge: the parent edge for
        # ordinary nodes, the root edge for the two time-1 nodes
        if n > 1:
            deg = np.bincount(parent[2:], minlength=2 * n) + 1
        else:
            deg = np.ones(2, dtype=np.int64)
    hist = np.bincount(deg)
    return DegreeProfile({int(k): int(c) for k, c in enumerate(hist) if c > 0})


def collision_count(obj) -> int:
    """Number of time steps k >= 2 at which both arriving nodes chose the
    same parent.  Needs time labels."""
    n, parent = _labelled_parent(obj)
    if n == 1:
        return 0
    return int(np.count_nonzero(parent[2::2] == parent[3::2]))


def monochromatic_count(obj, coloring: np.ndarray) -> int:
    """Number of edges whose endpoints receive equal colors under a valid
    coloring (one bit per time label; bit=1 colors the pair (A, B) in stored
    order).  The root edge joins the two differently-colored time-1 nodes and
    is never monochromatic."""
    n, parent = _labelled_parent(obj)
    bits = np.asarray(coloring)
    if bits.shape != (n,):
        raise ParameterError(f"coloring must provide one bit per time label "
                             f"({n}), got shape {bits.shape}")
    if n == 1:
        return 0
    ids = np.arange(2, 2 * n)
    par = parent[2:]
    same_color = (bits[ids // 2] ^ bits[par // 2]) == ((ids ^ par) & 1)
    return int(np.count_nonzero(same_color))


def root_split(obj) -> SplitStatistics:
    """Sizes of the two components separated by the root edge, their product,
    and (when types are observable) the cross-type sum over the root edge."""
    if isinstance(obj, TimeLabelledTree):
        size, count_a = subtree_counts_kernel(obj.parent, 0)
        n = obj.n
        minus = int(size[1])
        a_minus = int(count_a[1])
        b_minus = minus - a_minus
        cross = (n - a_minus) * b_minus + (n - b_minus) * a_minus
        return SplitStatistics(2 * n - minus, (2 * n - minus) * minus, cross)
    if isinstance(obj, ObservedTree):
        if obj.setting is Setting.LABELLED:
            size = subtree_sizes_kernel(obj.parent, 0)
            minus = int(size[1])
            return SplitStatistics(2 * obj.n - minus, (2 * obj.n - minus) * minus, None)
        if obj.setting is Setting.ROOTED_UNLABELLED:
            size = sizes_from_edges_kernel(obj.edges, 2 * obj.n)
            minus = int(size[1])  # edges[0] is the root edge (0, 1)
            return SplitStatistics(2 * obj.n - minus, (2 * obj.n - minus) * minus, None)
        raise SettingError("the root edge is not observable in the unrooted setting")
    raise TypeError(f"expected a tree, got {type(obj).__name__}")


def _below_sizes(obj) -> tuple[int, np.ndarray]:
    """Per-edge below-the-edge component sizes, one entry per edge."""
    if isinstance(obj, ObservedTree) and obj.edges is not None:
        size = sizes_from_edges_kernel(obj.edges, 2 * obj.n)
        return obj.n, size[obj.edges[:, 1]]
    n, parent = _labelled_parent(obj)
    size = subtree_sizes_kernel(parent, 0)
    return n, size[1:]  # every node except the chosen root has one upward edge


def sum_distance(obj) -> int:
    """Sum over all edges of the product of the two component sizes, equal to
    the sum of all pairwise distances.  One O(n) rooted traversal; the sum is
    accumulated exactly (never overflows 64-bit)."""
    n, below = _below_sizes(obj)
    products = below * (2 * n - below)
    return _exact_sum(products, n * n)


def cross_type_K(tree: TimeLabelledTree) -> int:
    """Sum over all edges of the cross-type products |T+_A||T-_B| + |T+_B||T-_A|.
    Needs node types."""
    tree = _typed_tree(tree)
    n = tree.n
    size, count_a = subtree_counts_kernel(tree.parent, 0)
    s = size[1:]
    a = count_a[1:]
    b = s - a
    products = (n - a) * b + (n - b) * a
    return _exact_sum(products, 2 * n * n)


def node_level(obj, node: int) -> int:
    """Distance from ``node`` to the nearer time-1 node (the one reached by
    the ancestor chain)."""
    n, parent = _labelled_parent(obj)
    if not 0 <= node < 2 * n:
        raise ParameterError(f"node id out of range: {node}")
    level = 0
    v = node
    while parent[v] >= 0:
        v = int(parent[v])
        level += 1
    return level


def overlap(sigma: np.ndarray, pi: np.ndarray) -> int:
    """Number of time-label pairs on which two colorings agree."""
    a = np.asarray(sigma)
    b = np.asarray(pi)
    if a.shape != b.shape:
        raise ParameterError(f"colorings differ in length: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a == b))
