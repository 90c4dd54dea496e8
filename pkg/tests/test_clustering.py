from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from bcmrt import (
    InfeasibleSizeError,
    ParameterError,
    feasible_q_limit,
    monochromatic_count,
    overlap,
    prefix_alignment,
    rate_margin,
    sample_history,
    sample_tree,
    search_colorings,
    split_seed,
    threshold_s,
    worst_case_alignment,
)
from bcmrt.clustering import block_vector, search_colorings_slow


def test_threshold_values():
    assert threshold_s(2, 0.0) == 1
    assert threshold_s(1000, 1 / 50) == 1859


def test_threshold_monotone_in_q():
    values = [threshold_s(100, q) for q in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_threshold_validation():
    with pytest.raises(ParameterError):
        threshold_s(1, 0.2)
    with pytest.raises(ParameterError):
        threshold_s(10, 0.6)


def test_search_q0_recovers_generating_coloring():
    for n in (2, 5, 10, 16):
        for seed in range(10):
            tree = sample_tree(n, 0.0, split_seed(81, seed))
            result = search_colorings(tree, 0.0)
            assert result.coloring is not None
            assert result.overlap == n
            assert result.mono_edges == 2 * (n - 1)
            assert result.searched == 1  # the sweep starts at the truth
            assert result.mono_edges >= result.threshold


def test_search_found_coloring_satisfies_threshold():
    for seed in range(30):
        tree = sample_tree(14, 0.15, split_seed(82, seed))
        result = search_colorings(tree, 0.15)
        if result.coloring is not None:
            assert result.mono_edges >= result.threshold
            assert monochromatic_count(tree, result.coloring) == result.mono_edges
            assert result.coloring[0] == 1  # first bit pinned


def test_search_matches_slow_reference():
    # mismatched q makes the threshold demanding, driving the sweep deep
    # (or to exhaustion), which exercises every code path
    rng = np.random.default_rng(2)
    for trial in range(60):
        n = int(rng.integers(2, 11))
        gen_q = float(rng.choice([0.0, 0.2, 0.5]))
        search_q = float(rng.choice([0.0, 0.1, 0.3]))
        tree = sample_tree(n, gen_q, split_seed(83, trial))
        fast = search_colorings(tree, search_q)
        slow = search_colorings_slow(tree, search_q)
        assert fast.threshold == slow.threshold
        assert fast.searched == slow.searched
        assert fast.mono_edges == slow.mono_edges
        assert fast.overlap == slow.overlap
        if slow.coloring is None:
            assert fast.coloring is None
        else:
            assert np.array_equal(fast.coloring, slow.coloring)


def test_search_cap():
    with pytest.raises(InfeasibleSizeError):
        search_colorings(sample_tree(25, 0.1, 0), 0.1)
    # the cap is configurable
    search_colorings(sample_tree(5, 0.1, 0), 0.1, cap=5)
    with pytest.raises(InfeasibleSizeError):
        search_colorings(sample_tree(6, 0.1, 0), 0.1, cap=5)


def test_complement_symmetry():
    rng = np.random.default_rng(3)
    for seed in range(20):
        n = 12
        tree = sample_tree(n, 0.3, split_seed(84, seed))
        sigma = rng.integers(0, 2, n).astype(np.uint8)
        flipped = (1 - sigma).astype(np.uint8)
        assert monochromatic_count(tree, sigma) == monochromatic_count(tree, flipped)
        truth = np.ones(n, dtype=np.uint8)
        assert overlap(sigma, truth) + overlap(flipped, truth) == n


def test_true_coloring_concentration():
    # fraction of trees with |M - 2(1-q)(n-1)| >= n^(2/3) stays below 1%
    n, q, reps = 1000, 0.2, 10_000
    cutoff = n ** (2 / 3)
    center = 2 * (1 - q) * (n - 1)
    bad = 0
    for r in range(reps):
        h = sample_history(n, q, split_seed(85, r))
        mono = 2 * (n - 1) - int(h.cross.sum())
        if abs(mono - center) >= cutoff:
            bad += 1
    assert bad / reps < 0.01


def test_mono_from_history_equals_statistic():
    # a cross record is exactly a bichromatic edge under the truth
    for seed in range(10):
        h = sample_history(30, 0.35, split_seed(86, seed))
        from bcmrt import history_to_tree

        tree = history_to_tree(h)
        truth = np.ones(30, dtype=np.uint8)
        assert monochromatic_count(tree, truth) == 2 * 29 - int(h.cross.sum())


# ---------------------------------------------------------------------------
# the union-bound rate margin


def test_rate_margin_positive_at_reference_point():
    assert rate_margin(1 / 50, 1e-4) > 0


def test_rate_margin_decreasing_in_eps():
    assert rate_margin(1 / 50, 2e-4) < rate_margin(1 / 50, 1e-4)


def test_rate_margin_domain_errors():
    with pytest.raises(ParameterError):
        rate_margin(0.0, 1e-4)
    with pytest.raises(ParameterError):
        rate_margin(0.5, 1e-4)
    with pytest.raises(ParameterError):
        rate_margin(0.02, 0.0)
    with pytest.raises(ParameterError):
        rate_margin(0.02, 0.3)  # proxy above 1


def test_feasible_q_limit_covers_reference():
    limit = feasible_q_limit(1e-4)
    assert 1 / 50 <= limit < 0.5
    assert rate_margin(limit - 1e-6, 1e-4) > 0


# ---------------------------------------------------------------------------
# worst-case configuration of the alignment functional


def test_prefix_alignment_by_hand():
    # x = (1,0,1): w = (1, 1/2); F = [0*1 + 1*0] + [1 * 1/2] = 1/2
    assert prefix_alignment([1, 0, 1]) == Fraction(1, 2)
    assert prefix_alignment([1]) == Fraction(0)


def test_worst_case_tie_at_half():
    best_x, best_v = worst_case_alignment(4, 2)
    ones_first = prefix_alignment(block_vector(4, 2, True))
    zeros_first = prefix_alignment(block_vector(4, 2, False))
    assert ones_first == zeros_first == best_v


def test_worst_case_block_direction():
    _, v_majority = worst_case_alignment(10, 7)
    assert prefix_alignment(block_vector(10, 7, True)) == v_majority
    _, v_minority = worst_case_alignment(10, 3)
    assert prefix_alignment(block_vector(10, 3, False)) == v_minority


def test_worst_case_blocks_attain_max_up_to_n10():
    for n in range(1, 11):
        for m in range(1, n + 1):
            _, best = worst_case_alignment(n, m)
            ones_first = prefix_alignment(block_vector(n, m, True))
            zeros_first = prefix_alignment(block_vector(n, m, False))
            if 2 * m >= n:
                assert ones_first == best, (n, m)
            if 2 * m <= n:
                assert zeros_first == best, (n, m)


def test_worst_case_validation():
    with pytest.raises(ParameterError):
        worst_case_alignment(5, 0)
    with pytest.raises(InfeasibleSizeError):
        worst_case_alignment(21, 3)
