"""Exact expectations, closed forms and brute-force enumeration.

The forward recurrences here are the ground truth for the Monte Carlo side
of the package.  They run in double precision by default; passing
``extended=True`` recomputes them in 80-bit floats, which the test suite
uses to certify numerical stability of the double-precision path.

``brute_force_enumerate`` is the anti-drift oracle: it iterates every
possible record vector of a small tree with its exact probability, so any
statistic's exact finite distribution can be checked against the recursions
with no randomness involved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Mapping

import numpy as np

from .errors import InfeasibleSizeError, ParameterError
from .generator import GenerationHistory, history_to_tree
from .tree import TimeLabelledTree

BRUTE_FORCE_CAP = 4
BRUTE_FORCE_HARD_CAP = 5  # ~147k record vectors, for slow exhaustive runs


@dataclass(frozen=True)
class MomentTable:
    """Tracked expectations for every size up to ``n_max``.

    ``columns[name][m - 1]`` is the value at size m.  Each table satisfies
    its generating recurrence at every index, which is re-checkable by one
    forward pass.
    """

    q: float
    n_max: int
    columns: Mapping[str, np.ndarray]

    def value(self, name: str, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise ParameterError(f"n must lie in [1, {self.n_max}], got {n}")
        return float(self.columns[name][n - 1])


def _check_q(q: float, hi: float = 1.0) -> None:
    if not 0.0 <= q <= hi:
        raise ParameterError(f"q must lie in [0, {hi}], got {q}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")


@lru_cache(maxsize=None)
def harmonic(m: int) -> float:
    """H_m = sum_{j<=m} 1/j, accumulated with compensated summation."""
    if m < 0:
        raise ParameterError(f"harmonic number needs m >= 0, got {m}")
    return math.fsum(1.0 / j for j in range(1, m + 1))


def leaf_expectation(n: int, q: float, extended: bool = False) -> float:
    """Expected number of leaves at size n, by exact forward recursion.

    A leaf at step m survives unless it receives an attachment, which
    happens with probability 1/m - q(1-q)/m^2; two fresh leaves arrive at
    every step, starting from two at m = 1.
    """
    return degree_table(n, 1, q, extended=extended).value("N1", n)


def degree_expectation(n: int, k: int, q: float, extended: bool = False) -> float:
    """Expected number of degree-k nodes at size n."""
    if k < 1:
        raise ParameterError(f"degree must be >= 1, got {k}")
    return degree_table(n, k, q, extended=extended).value(f"N{k}", n)


def degree_table(n: int, k_max: int, q: float, extended: bool = False) -> MomentTable:
    """Joint forward recursion of E[N_1], ..., E[N_k_max] up to size n.

    At each step a node keeps its degree unless it receives one attachment
    (prob 1/m - 2q(1-q)/m^2) or both arrivals at once (prob q(1-q)/m^2).
    """
    _check_n(n)
    _check_q(q)
    if k_max < 1:
        raise ParameterError(f"k_max must be >= 1, got {k_max}")
    dtype = np.longdouble if extended else np.float64
    qq = dtype(q) * (1 - dtype(q))
    cols = np.zeros((k_max, n), dtype=dtype)
    cur = np.zeros(k_max + 1, dtype=dtype)  # cur[0] is N_0, identically 0
    cur[1] = 2.0
    cols[:, 0] = cur[1:]
    for m in range(1, n):
        keep = 1 - dtype(1) / m + qq / (dtype(m) * m)
        gain1 = dtype(1) / m - 2 * qq / (dtype(m) * m)
        gain2 = qq / (dtype(m) * m)
        nxt = np.zeros_like(cur)
        nxt[1] = cur[1] * keep + 2
        for j in range(2, k_max + 1):
            nxt[j] = cur[j] * keep + cur[j - 1] * gain1 + cur[j - 2] * gain2
        cur = nxt
        cols[:, m] = cur[1:]
    columns = {f"N{j + 1}": cols[j].astype(np.float64) for j in range(k_max)}
    return MomentTable(q=q, n_max=n, columns=columns)


def _ab_coefficients(m: int, q: float, dtype):
    qq = dtype(q) * (1 - dtype(q))
    one_minus_2q = 1 - 2 * dtype(q)
    a = 1 + dtype(2) / m + 2 * qq / (dtype(m) * m)
    b = one_minus_2q * one_minus_2q / (dtype(m) * m)
    c = 1 + 2 * one_minus_2q / m + one_minus_2q * one_minus_2q / (dtype(m) * m)
    d = 2 * dtype(q) / m + 2 * qq / (dtype(m) * m)
    return a, b, c, d


def rooted_moments(n: int, q: float, extended: bool = False) -> MomentTable:
    """Exact E[|T+||T-|] (column ``f``) and the cross-type sum expectation
    E[R] (column ``g``) for every size up to n, from the coupled recurrence
    with f(1) = g(1) = 1."""
    _check_n(n)
    _check_q(q, hi=0.5)
    dtype = np.longdouble if extended else np.float64
    f_col = np.empty(n, dtype=dtype)
    g_col = np.empty(n, dtype=dtype)
    f = g = dtype(1.0)
    f_col[0] = g_col[0] = 1.0
    for m in range(1, n):
        a, b, c, d = _ab_coefficients(m, q, dtype)
        f, g = a * f + b * g, c * g + d * f
        f_col[m] = f
        g_col[m] = g
    return MomentTable(
        q=q,
        n_max=n,
        columns={"f": f_col.astype(np.float64), "g": g_col.astype(np.float64)},
    )


def unrooted_moments(n: int, q: float, extended: bool = False) -> MomentTable:
    """Exact E[S] (sum of pairwise distances) and E[K] (cross-type analogue
    over all edges) for every size up to n; S(1) = K(1) = 1 and the linear
    drive adds 2(2m+1) resp. 2(m+1) per step."""
    _check_n(n)
    _check_q(q, hi=0.5)
    dtype = np.longdouble if extended else np.float64
    s_col = np.empty(n, dtype=dtype)
    k_col = np.empty(n, dtype=dtype)
    s = k = dtype(1.0)
    s_col[0] = k_col[0] = 1.0
    for m in range(1, n):
        a, b, c, d = _ab_coefficients(m, q, dtype)
        s, k = a * s + b * k + 2 * (2 * m + 1), c * k + d * s + 2 * (m + 1)
        s_col[m] = s
        k_col[m] = k
    return MomentTable(
        q=q,
        n_max=n,
        columns={"S": s_col.astype(np.float64), "K": k_col.astype(np.float64)},
    )


@lru_cache(maxsize=None)
def expected_split_product(n: int, q: float) -> float:
    """Cached E[|T+||T-|] at a single size, for test thresholds."""
    return rooted_moments(n, q).value("f", n)


@lru_cache(maxsize=None)
def expected_sum_distance(n: int, q: float) -> float:
    """Cached E[S] at a single size, for test thresholds."""
    return unrooted_moments(n, q).value("S", n)


def gamma_product(n: int, q: float) -> float:
    """The product prod_{i=1..n} (1 + 2/i + 2q(1-q)/i^2) via log-Gamma.

    With gamma = sqrt(1 - 2q(1-q)) the product telescopes to
    Gamma(n+2+gamma) Gamma(n+2-gamma) / (Gamma(2+gamma) Gamma(2-gamma)
    Gamma(n+1)^2); log-Gamma keeps it finite far past n ~ 170.
    """
    _check_n(n)
    _check_q(q, hi=0.5)
    gamma = math.sqrt(1.0 - 2.0 * q * (1.0 - q))
    log_value = (
        math.lgamma(n + 2 + gamma)
        + math.lgamma(n + 2 - gamma)
        - math.lgamma(2 + gamma)
        - math.lgamma(2 - gamma)
        - 2.0 * math.lgamma(n + 1)
    )
    return math.exp(log_value)


def delta_lower(q0: float, q1: float) -> float:
    """Lower-bound constant for the expectation gap of the split product:
    2(q1-q0)(1-q1-q0) / (Gamma(3+g0) Gamma(3-g0)) with
    g0 = sqrt(1 - 2 q0 (1-q0))."""
    if not 0.0 <= q0 < q1 <= 0.5:
        raise ParameterError(f"need 0 <= q0 < q1 <= 1/2, got ({q0}, {q1})")
    g0 = math.sqrt(1.0 - 2.0 * q0 * (1.0 - q0))
    return (
        2.0
        * (q1 - q0)
        * (1.0 - q1 - q0)
        / (math.gamma(3.0 + g0) * math.gamma(3.0 - g0))
    )


def level_moments(n: int) -> tuple[float, float]:
    """(E[L], E[L^2]) for the level of a time-n node: H_{n-1} and
    H_{n-1}^2 + H_{n-1} - sum_{j<n} 1/j^2, independent of q."""
    _check_n(n)
    h = harmonic(n - 1)
    sq = math.fsum(1.0 / (j * j) for j in range(1, n))
    return h, h * h + h - sq


def subtree_second_moment_bound(n: int, i: int) -> float:
    """Upper bound 2 n^2 / i^2 on the second moment of the size of the
    subtree hanging below a time-i node."""
    if not 1 <= i <= n:
        raise ParameterError(f"need 1 <= i <= n, got i={i}, n={n}")
    return 2.0 * n * n / (i * i)


def efron_stein_bound(n: int) -> float:
    """Variance bound 64 n^4 sum_{i=2..n} (log(i) + 1)^2 / i^2 for the sum
    of pairwise distances."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    i = np.arange(2, n + 1, dtype=np.float64)
    terms = (np.log(i) + 1.0) ** 2 / i**2
    return 64.0 * float(n) ** 4 * float(np.sum(terms))


# ---------------------------------------------------------------------------
# brute-force enumeration


def _check_enumeration_size(n: int, limit: int) -> None:
    _check_n(n)
    limit = min(limit, BRUTE_FORCE_HARD_CAP)
    if n > limit:
        raise InfeasibleSizeError(
            f"exhaustive enumeration capped at n = {limit}, got n = {n}"
        )


def enumerate_histories(n: int, limit: int = BRUTE_FORCE_CAP) -> Iterator[
    tuple[GenerationHistory, int]
]:
    """Yield every possible record vector of a size-2n tree together with its
    total number of cross-type attachments.  The number of vectors is
    prod_{k=2..n} (2(k-1))^2 (2304 at n = 4)."""
    _check_enumeration_size(n, limit)
    m = 2 * (n - 1)
    per_slot = [
        [(c, u) for c in (0, 1) for u in range(1, t)]
        for t in range(2, n + 1)
        for _ in (0, 1)
    ]
    for combo in itertools.product(*per_slot):
        cross = np.array([r[0] for r in combo], dtype=np.uint8)
        u = np.array([r[1] for r in combo], dtype=np.int64)
        h = GenerationHistory(n=n, q=0.0, seed=0, cross=cross, u=u)
        yield h, int(cross.sum()) if m else 0


def history_log_weight(n: int) -> float:
    """Common uniform-parent factor of every record vector: the probability
    of a vector with c crossings is q^c (1-q)^(2(n-1)-c) times this."""
    return math.prod(1.0 / (t - 1) ** 2 for t in range(2, n + 1))


def brute_force_enumerate(
    n: int,
    q: float,
    statistic: Callable[[TimeLabelledTree], object],
    limit: int = BRUTE_FORCE_CAP,
) -> dict:
    """Exact finite distribution of ``statistic`` over all trees of size 2n.

    Iterates every record vector, weights it by its exact probability and
    evaluates the statistic on the materialised tree.  Returns a dict
    mapping statistic values to probabilities (summing to 1).
    """
    _check_q(q)
    w = history_log_weight(n)
    m = 2 * (n - 1)
    dist: dict = {}
    for h, c in enumerate_histories(n, limit):
        p = q**c * (1.0 - q) ** (m - c) * w
        if p == 0.0:
            continue
        value = statistic(history_to_tree(h))
        dist[value] = dist.get(value, 0.0) + p
    return dist


def brute_force_expectation(
    n: int,
    q: float,
    statistic: Callable[[TimeLabelledTree], float],
    limit: int = BRUTE_FORCE_CAP,
) -> float:
    dist = brute_force_enumerate(n, q, statistic, limit)
    return math.fsum(v * p for v, p in dist.items())
