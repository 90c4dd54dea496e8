from __future__ import annotations

import math

import numpy as np
import pytest

from bcmrt import (
    InfeasibleSizeError,
    ParameterError,
    brute_force_enumerate,
    brute_force_expectation,
    cross_type_K,
    degree_counts,
    degree_expectation,
    degree_table,
    delta_lower,
    efron_stein_bound,
    gamma_product,
    leaf_expectation,
    level_moments,
    root_split,
    rooted_moments,
    sample_tree,
    split_seed,
    subtree_second_moment_bound,
    subtree_sizes,
    sum_distance,
    unrooted_moments,
)

Q_GRID = (0.0, 0.1, 0.25, 0.4, 0.5)


# ---------------------------------------------------------------------------
# leaves and degrees


def test_leaf_initial_condition():
    for q in Q_GRID:
        assert leaf_expectation(1, q) == 2.0


def test_leaf_one_step():
    for q in Q_GRID:
        assert leaf_expectation(2, q) == pytest.approx(2 + 2 * q * (1 - q), abs=1e-14)


def test_leaf_expectation_bounds():
    # n <= E[N1(n)] <= n + 2 along the whole table
    for q in (0.0, 0.25, 0.5):
        col = degree_table(10**5, 1, q).columns["N1"]
        m = np.arange(1, 10**5 + 1)
        assert np.all(col >= m - 1e-9)
        assert np.all(col <= m + 2 + 1e-9)


def test_degree_two_one_step():
    for q in Q_GRID:
        assert degree_expectation(2, 2, q) == pytest.approx(
            2 * (1 - 2 * q * (1 - q)), abs=1e-14
        )


def test_degree_three_limit():
    for q in (0.0, 0.5):
        value = degree_expectation(10**5, 3, q)
        assert abs(value / (2 * 10**5) - 0.125) < 1e-3


def test_degree_insensitive_to_q():
    ta = degree_table(10**5, 4, 0.0)
    tb = degree_table(10**5, 4, 0.5)
    for k in range(1, 5):
        diff = np.abs(ta.columns[f"N{k}"] - tb.columns[f"N{k}"]).max()
        assert diff <= 3.0


def test_degree_table_validation():
    with pytest.raises(ParameterError):
        degree_expectation(10, 0, 0.3)
    with pytest.raises(ParameterError):
        degree_table(0, 2, 0.3)
    with pytest.raises(ParameterError):
        degree_table(5, 2, 1.5)


# ---------------------------------------------------------------------------
# rooted and unrooted moment tables


def test_rooted_initial_conditions():
    for q in Q_GRID:
        table = rooted_moments(3, q)
        assert table.value("f", 1) == 1.0
        assert table.value("g", 1) == 1.0


def test_rooted_one_step_value_and_gap():
    for q in Q_GRID:
        assert rooted_moments(2, q).value("f", 2) == pytest.approx(
            4 - 2 * q * (1 - q), abs=1e-14
        )
    for q0, q1 in ((0.0, 0.5), (0.1, 0.3)):
        gap = rooted_moments(2, q0).value("f", 2) - rooted_moments(2, q1).value("f", 2)
        assert gap == pytest.approx(2 * (q1 - q0) * (1 - q0 - q1), abs=1e-14)


def test_rooted_product_link_inequality():
    for q in Q_GRID:
        table = rooted_moments(10**5, q)
        assert np.all(table.columns["f"] <= 2 * table.columns["g"] + 1e-9)


def test_rooted_monotone_in_q():
    tables = {q: rooted_moments(10**4, q) for q in Q_GRID}
    for q0, q1 in zip(Q_GRID, Q_GRID[1:]):
        assert np.all(tables[q0].columns["f"] >= tables[q1].columns["f"] - 1e-9)
        assert np.all(tables[q0].columns["g"] >= tables[q1].columns["g"] - 1e-9)


def test_unrooted_initial_conditions():
    for q in Q_GRID:
        table = unrooted_moments(2, q)
        assert table.value("S", 1) == 1.0
        assert table.value("K", 1) == 1.0
        assert table.value("S", 2) == pytest.approx(10 - 2 * q * (1 - q), abs=1e-14)


def test_unrooted_monotone_in_q():
    tables = {q: unrooted_moments(10**4, q) for q in Q_GRID}
    for q0, q1 in zip(Q_GRID, Q_GRID[1:]):
        assert np.all(tables[q0].columns["S"] >= tables[q1].columns["S"] - 1e-9)


def test_unrooted_growth_ratio_at_moderate_size():
    for q in (0.0, 0.5):
        n = 10**4
        ratio = unrooted_moments(n, q).value("S", n) / (4 * n * n * math.log(n))
        assert 0.8 < ratio < 1.2


def test_moment_table_value_range_check():
    table = rooted_moments(5, 0.2)
    with pytest.raises(ParameterError):
        table.value("f", 6)


def test_recursions_stable_under_extended_precision():
    n = 10**5
    for q in (0.25, 0.5):
        for maker, names in (
            (rooted_moments, ("f", "g")),
            (unrooted_moments, ("S", "K")),
        ):
            plain = maker(n, q)
            extended = maker(n, q, extended=True)
            for name in names:
                a, b = plain.columns[name], extended.columns[name]
                assert np.max(np.abs(a - b) / np.abs(b)) < 1e-8
        d_plain = degree_table(n, 4, q)
        d_ext = degree_table(n, 4, q, extended=True)
        for k in range(1, 5):
            a, b = d_plain.columns[f"N{k}"], d_ext.columns[f"N{k}"]
            assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-30)) < 1e-8


# ---------------------------------------------------------------------------
# closed forms


def test_gamma_product_direct_small():
    # q=0, n=2: (1 + 2/1)(1 + 2/4) = 4.5? no: product over i=1..2 of
    # (i^2 + 2i)/i^2 = 3 * 2 = 6, the telescoped (n+1)(n+2)/2
    assert gamma_product(2, 0.0) == pytest.approx(6.0, rel=1e-12)


def test_gamma_product_matches_direct_product():
    for q in Q_GRID:
        qq = 2 * q * (1 - q)
        for n in (1, 7, 100, 1000):
            direct = 1.0
            for i in range(1, n + 1):
                direct *= 1 + 2 / i + qq / (i * i)
            # 12 significant digits of agreement with the running product
            assert gamma_product(n, q) == pytest.approx(direct, rel=5e-12)


def test_gamma_product_asymptotics():
    n = 10**6
    for q in (0.0, 0.25, 0.5):
        g = math.sqrt(1 - 2 * q * (1 - q))
        limit = n * n / (math.gamma(2 + g) * math.gamma(2 - g))
        assert gamma_product(n, q) / limit == pytest.approx(1.0, rel=0.01)


def test_delta_lower_known_value():
    assert delta_lower(0.0, 0.5) == pytest.approx(1 / 12, abs=1e-12)


def test_delta_lower_vanishes_as_pair_merges():
    values = [delta_lower(0.2, 0.2 + eps) for eps in (0.1, 0.01, 0.001)]
    assert values[0] > values[1] > values[2] > 0
    assert values[2] < 0.002


def test_delta_lower_requires_order():
    with pytest.raises(ParameterError):
        delta_lower(0.3, 0.2)
    with pytest.raises(ParameterError):
        delta_lower(0.2, 0.6)


def test_level_moments_small():
    assert level_moments(1) == (0.0, 0.0)
    mean, second = level_moments(3)
    assert mean == pytest.approx(1.5)
    assert second == pytest.approx(2.5)


def test_level_moments_exhaustive_n3():
    # enumerate the parent-label chains of the time-3 node directly: u=1
    # gives level 1, u=2 gives level 2, each with probability 1/2
    assert level_moments(3)[1] == pytest.approx(0.5 * 1 + 0.5 * 4)


def test_subtree_bound_values():
    assert subtree_second_moment_bound(10, 10) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        subtree_second_moment_bound(10, 0)
    with pytest.raises(ParameterError):
        subtree_second_moment_bound(10, 11)


def test_subtree_moments_against_bound_and_symmetry():
    n, reps = 1000, 2000
    for i in (2, 10, 100):
        node = 2 * (i - 1)  # the type-A node with time label i
        vals = np.empty(reps)
        for r in range(reps):
            tree = sample_tree(n, 0.25, split_seed(61, r))
            vals[r] = subtree_sizes(tree, 0)[node]
        # the bound is nearly tight for larger i, so compare the sample mean
        # of X^2 against it within Monte Carlo error
        sq = vals**2
        sq_se = sq.std(ddof=1) / math.sqrt(reps)
        assert sq.mean() <= subtree_second_moment_bound(n, i) + 3 * sq_se
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - n / i) < 3 * se


def test_efron_stein_bound_shape():
    values = [efron_stein_bound(n) for n in (2, 10, 100, 1000)]
    assert all(b > a for a, b in zip(values, values[1:]))
    # the series over (log i + 1)^2 / i^2 converges
    tail_ratio = efron_stein_bound(10**6) / 10**24 / (efron_stein_bound(10**5) / 10**20)
    assert tail_ratio == pytest.approx(1.0, rel=0.01)
    with pytest.raises(ParameterError):
        efron_stein_bound(1)


# ---------------------------------------------------------------------------
# brute force enumeration


def test_brute_force_mass_normalises():
    for n in (1, 2, 3, 4):
        for q in Q_GRID:
            dist = brute_force_enumerate(n, q, lambda t: 0)
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_brute_force_cap():
    with pytest.raises(InfeasibleSizeError):
        brute_force_enumerate(6, 0.2, lambda t: 0)
    with pytest.raises(InfeasibleSizeError):
        brute_force_enumerate(6, 0.2, lambda t: 0, limit=9)  # hard cap is 5


def test_brute_force_leaf_matches_formula():
    for q in Q_GRID:
        value = brute_force_expectation(2, q, lambda t: degree_counts(t).counts.get(1, 0))
        assert value == pytest.approx(2 + 2 * q * (1 - q), abs=1e-12)


def test_recursions_match_enumeration_to_n4():
    # the anti-drift gate at reduced size (acceptance runs the full battery)
    statistics = {
        "N1": lambda t: degree_counts(t).counts.get(1, 0),
        "f": lambda t: root_split(t).product,
        "S": sum_distance,
    }
    oracle = {
        "N1": lambda n, q: degree_table(n, 1, q).value("N1", n),
        "f": lambda n, q: rooted_moments(n, q).value("f", n),
        "S": lambda n, q: unrooted_moments(n, q).value("S", n),
    }
    for n in (1, 2, 3):
        for q in (0.0, 0.25, 0.5):
            for name, stat in statistics.items():
                enumerated = brute_force_expectation(n, q, stat)
                predicted = oracle[name](n, q)
                assert enumerated == pytest.approx(predicted, rel=1e-10, abs=1e-10)


def test_brute_force_cross_type_initial_condition():
    assert brute_force_expectation(1, 0.3, cross_type_K) == pytest.approx(1.0)
