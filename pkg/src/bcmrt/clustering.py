"""Threshold-search clustering over valid colorings.

A valid coloring assigns one bit per time label (bit = 1 colors the stored
pair order (A, B), bit = 0 the swap).  The search walks all colorings with
the first bit pinned to 1 (quotienting the global A/B swap), starting from
the all-ones coloring and proceeding in decreasing binary-counter order,
and returns the first one whose monochromatic edge count reaches the
threshold 2(1-q)(n-1) - n^(2/3).

The sweep is evaluated blockwise: an edge between labels t and u is
monochromatic for coloring bits b iff b_t XOR b_u equals the stored
slot parity of the edge, so a whole block of counter values is scored with
a handful of vectorised shifts per edge.  This keeps the 2^(n-1) sweep
feasible up to the configured cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import InfeasibleSizeError, ParameterError
from .stats import monochromatic_count, overlap
from .tree import TimeLabelledTree

SEARCH_CAP = 24
EXHAUSTIVE_F_CAP = 20
_BLOCK = 1 << 16


@dataclass(frozen=True)
class ClusterResult:
    """Outcome of one threshold search.

    ``coloring`` is None when no coloring reaches the threshold, in which
    case ``mono_edges`` reports the best count seen.  ``overlap`` counts the
    labels on which the returned coloring agrees with the generating one.
    """

    coloring: np.ndarray | None
    mono_edges: int
    threshold: int
    overlap: int | None
    searched: int


def threshold_s(n: int, q: float) -> int:
    """Monochromatic-edge threshold ceil(2(1-q)(n-1) - n^(2/3)).  The count
    is integral, so the ceiling is the conservative reading."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 0.0 <= q <= 0.5:
        raise ParameterError(f"q must lie in [0, 1/2], got {q}")
    return math.ceil(2.0 * (1.0 - q) * (n - 1) - n ** (2.0 / 3.0))


def _bits_from_counter(g: int, n: int) -> np.ndarray:
    bits = np.empty(n, dtype=np.uint8)
    bits[0] = 1
    for lab in range(1, n):
        bits[lab] = (g >> (n - 1 - lab)) & 1
    return bits


def search_colorings(
    tree: TimeLabelledTree,
    q: float,
    cap: int = SEARCH_CAP,
    true_coloring: np.ndarray | None = None,
) -> ClusterResult:
    """First coloring (in the sweep order described above) whose
    monochromatic count reaches the threshold, or None if the whole space
    fails.  ``true_coloring`` defaults to all-ones, the generating coloring
    of a sampled tree."""
    n = tree.n
    if n > cap:
        raise InfeasibleSizeError(
            f"coloring search sweeps 2^(n-1) colorings; n = {n} exceeds the "
            f"cap of {cap}"
        )
    s = threshold_s(n, q)
    if true_coloring is None:
        true_coloring = np.ones(n, dtype=np.uint8)

    # per-edge data: time-label indices of both endpoints and slot parity
    ids = np.arange(2, 2 * n, dtype=np.int64)
    par = tree.parent[2:]
    lab_child = ids // 2  # 0-based label index
    lab_parent = par // 2
    parity = ((ids ^ par) & 1).astype(np.uint64)
    # counter bit positions; label index 0 is pinned to bit 1 and only ever
    # appears on the parent side (children arrive at time >= 2)
    shift_child = (n - 1 - lab_child).astype(np.uint64)
    shift_parent = (n - 1 - lab_parent).astype(np.uint64)
    parent_pinned = lab_parent == 0

    total = 1 << (n - 1)
    searched = 0
    best = -1
    hi = total - 1
    while hi >= 0:
        lo = max(hi - _BLOCK + 1, 0)
        g = np.arange(hi, lo - 1, -1, dtype=np.uint64)
        mono = np.zeros(g.shape[0], dtype=np.int64)
        for e in range(ids.shape[0]):
            bc = (g >> shift_child[e]) & np.uint64(1)
            bp = np.uint64(1) if parent_pinned[e] else (g >> shift_parent[e]) & np.uint64(1)
            mono += (bc ^ bp) == parity[e]
        hits = np.nonzero(mono >= s)[0]
        if hits.size:
            first = int(hits[0])
            searched += first + 1
            bits = _bits_from_counter(int(g[first]), n)
            return ClusterResult(
                coloring=bits,
                mono_edges=int(mono[first]),
                threshold=s,
                overlap=overlap(bits, true_coloring),
                searched=searched,
            )
        searched += g.shape[0]
        block_best = int(mono.max()) if mono.size else -1
        best = max(best, block_best)
        hi = lo - 1
    return ClusterResult(
        coloring=None, mono_edges=best, threshold=s, overlap=None, searched=searched
    )


def search_colorings_slow(
    tree: TimeLabelledTree, q: float, cap: int = 16
) -> ClusterResult:
    """Reference implementation of the same sweep, one coloring at a time;
    used to cross-check the blockwise scoring."""
    n = tree.n
    if n > cap:
        raise InfeasibleSizeError(f"slow sweep capped at n = {cap}")
    s = threshold_s(n, q)
    truth = np.ones(n, dtype=np.uint8)
    searched = 0
    best = -1
    for g in range((1 << (n - 1)) - 1, -1, -1):
        bits = _bits_from_counter(g, n)
        m = monochromatic_count(tree, bits)
        searched += 1
        if m >= s:
            return ClusterResult(bits, m, s, overlap(bits, truth), searched)
        best = max(best, m)
    return ClusterResult(None, best, s, None, searched)


def rate_margin(q: float, eps: float) -> float:
    """Exponential-rate margin of the union bound behind the clustering
    guarantee; positive values mean the bound closes.  Defined for
    q in (0, 1/2) and a mean-attachment proxy p in (0, 1)."""
    if not 0.0 < q < 0.5:
        raise ParameterError(f"q must lie in (0, 1/2), got {q}")
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps}")
    ln2 = math.log(2.0)
    p_bar = 1.0 + 2.0 * eps - ln2 / 2.0 - q * (1.0 - ln2)
    if not 0.0 < p_bar < 1.0:
        raise ParameterError(f"mean-attachment proxy {p_bar} outside (0, 1)")
    return (
        (1.0 - q) * math.log((1.0 - p_bar) * (1.0 - q) / (p_bar * q))
        - math.log((1.0 - p_bar) / q)
        - ln2 / 2.0
    )


def feasible_q_limit(eps: float, tol: float = 1e-9) -> float:
    """Largest q in (0, 1/2) with a positive rate margin at this eps, by
    bisection; a diagnostic for how far the guarantee reaches."""
    lo, hi = 1e-12, 0.5 - 1e-12
    if rate_margin(lo, eps) <= 0:
        raise ParameterError("margin nonpositive even at q ~ 0")
    if rate_margin(hi, eps) > 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_margin(mid, eps) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def prefix_alignment(x) -> Fraction:
    """The configuration functional sum_{i>=2} x_i w_{i-1} + (1-x_i)(1-w_{i-1})
    with w_i the prefix mean of x, evaluated exactly."""
    total = Fraction(0)
    prefix = 0
    for i, xi in enumerate(x, start=1):
        if i >= 2:
            w = Fraction(prefix, i - 1)
            total += w if xi else 1 - w
        prefix += int(xi)
    return total


def block_vector(n: int, m: int, ones_first: bool) -> np.ndarray:
    x = np.zeros(n, dtype=np.uint8)
    if ones_first:
        x[:m] = 1
    else:
        x[n - m :] = 1
    return x


def worst_case_alignment(
    n: int, m: int, cap: int = EXHAUSTIVE_F_CAP
) -> tuple[np.ndarray, Fraction]:
    """Maximiser of the prefix-alignment functional over binary vectors with
    exactly m ones, by exhaustive enumeration (ties: first found)."""
    if not 1 <= m <= n:
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    if n > cap:
        raise InfeasibleSizeError(f"exhaustive alignment search capped at n = {cap}")
    best_x: np.ndarray | None = None
    best_v: Fraction | None = None
    for ones in combinations(range(n), m):
        x = np.zeros(n, dtype=np.uint8)
        x[list(ones)] = 1
        v = prefix_alignment(x)
        if best_v is None or v > best_v:
            best_v = v
            best_x = x
    assert best_x is not None and best_v is not None
    return best_x, best_v
