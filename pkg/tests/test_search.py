import numpy as np
import pytest

from conftest import dfs_levels, random_bits
from dactk.codec import CodecParams, advance, encode, initial_state
from dactk.errors import AllPathsEliminated, BudgetExceeded
from dactk.search import (PathSet, SearchConfig, SideInfo, empirical_expansion,
                          enumerate_tree, m_algorithm_decode, path_counts)
from dactk.spectrum import grid_expansion, solve_path_spectrum


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(max_paths_budget=0)
    with pytest.raises(ValueError):
        SearchConfig(m_paths=-1)
    with pytest.raises(ValueError):
        SearchConfig(max_depth=0)


def test_side_info_validation():
    with pytest.raises(ValueError):
        SideInfo(np.array([0, 1], dtype=np.uint8), 0.6)
    with pytest.raises(ValueError):
        SideInfo(np.array([0, 2], dtype=np.uint8), 0.1)


def test_root_level_is_single_path():
    cw = encode(np.array([1, 0], dtype=np.uint8), CodecParams.from_q(0.8))
    levels = enumerate_tree(cw, 0, SearchConfig())
    assert len(levels) == 1
    assert levels[0].count == 1
    assert levels[0].depth == 0


def test_no_overlap_means_single_path():
    rng = np.random.default_rng(31)
    x = random_bits(rng, 100)
    cw = encode(x, CodecParams.from_q(0.5))
    levels = enumerate_tree(cw, 40, SearchConfig(), source=x)
    assert all(lv.count == 1 for lv in levels)
    assert levels[-1].prefix(0) == tuple(x[:40].tolist())


def test_counts_match_recursive_walk_and_grow_monotonically():
    rng = np.random.default_rng(32)
    for q in (0.65, 0.8):
        x = random_bits(rng, 40)
        cw = encode(x, CodecParams.from_q(q))
        depth = 11
        levels = enumerate_tree(cw, depth, SearchConfig(), source=x)
        counts = path_counts(levels)
        want, _ = dfs_levels(cw, depth)
        assert counts.tolist() == want
        assert np.all(np.diff(counts) >= 0)


def test_prefixes_distinct_and_branches_reconstruct():
    rng = np.random.default_rng(33)
    x = random_bits(rng, 24)
    p = CodecParams.from_q(0.8)
    cw = encode(x, p)
    levels = enumerate_tree(cw, 8, SearchConfig(), source=x)
    last = levels[-1]
    seen = set()
    for j in range(last.count):
        br = last.branch(j)
        assert len(br.prefix) == 8
        assert br.prefix not in seen
        seen.add(br.prefix)
        # replay the prefix through the scalar codec: registers must agree
        s = initial_state(cw)
        for sym in br.prefix:
            s = advance(s, sym, cw, p)
        assert (s.low, s.high, s.code, s.bit_cursor) == \
               (br.low, br.high, br.code, br.bit_cursor)
    assert len(last.branches) == last.count


def test_budget_exceeded_carries_partial_levels():
    rng = np.random.default_rng(34)
    x = random_bits(rng, 64)
    cw = encode(x, CodecParams.from_q(0.8))
    full = enumerate_tree(cw, 14, SearchConfig(), source=x)
    budget = full[9].count  # forces failure somewhere past level 9
    with pytest.raises(BudgetExceeded) as info:
        enumerate_tree(cw, 14, SearchConfig(max_paths_budget=budget), source=x)
    err = info.value
    assert err.level is not None and err.level <= 14
    assert err.levels is not None
    got = path_counts(err.levels)
    assert got.tolist() == path_counts(full[:len(got)]).tolist()


def test_depth_validation():
    cw = encode(np.array([0, 1, 0], dtype=np.uint8), CodecParams.from_q(0.6))
    with pytest.raises(ValueError):
        enumerate_tree(cw, 4, SearchConfig())  # deeper than the source
    with pytest.raises(ValueError):
        enumerate_tree(cw, 3, SearchConfig(max_depth=2))


def test_containment_checked_when_source_given():
    rng = np.random.default_rng(35)
    x = random_bits(rng, 30)
    cw = encode(x, CodecParams.from_q(0.7))
    wrong = x.copy()
    wrong[0] ^= 1
    with pytest.raises(AssertionError):
        enumerate_tree(cw, 10, SearchConfig(), source=wrong)


def test_empirical_expansion_constant_tables():
    c = 1.5
    table = [[c ** i for i in range(12)]] * 3
    series = empirical_expansion(table)
    assert np.allclose(series.gamma, c, rtol=0, atol=1e-12)


def test_empirical_expansion_single_trial_no_overlap():
    rng = np.random.default_rng(36)
    x = random_bits(rng, 30)
    cw = encode(x, CodecParams.from_q(0.5))
    counts = path_counts(enumerate_tree(cw, 20, SearchConfig(), source=x))
    series = empirical_expansion(counts)
    assert np.all(series.gamma == 1.0)


def test_empirical_expansion_is_ratio_of_means():
    # mean-of-ratios would give 2.0 for the second step; ratio-of-means 5/3
    table = [[1, 2, 2], [1, 1, 3]]
    series = empirical_expansion(table)
    assert np.isclose(series.gamma[1], 5 / 3)
    assert not np.isclose(series.gamma[1], 2.0)


def test_empirical_expansion_validation():
    with pytest.raises(ValueError):
        empirical_expansion([[1]])
    with pytest.raises(ValueError):
        empirical_expansion([[1, 0]])


def test_first_expansion_factor_matches_grid():
    rng = np.random.default_rng(37)
    p = CodecParams.from_q(0.7)
    theory = grid_expansion(solve_path_spectrum(p, 20000), p)
    tables = []
    for t in range(400):
        x = random_bits(rng, 16)
        cw = encode(x, p)
        tables.append(path_counts(enumerate_tree(cw, 2, SearchConfig(), source=x)))
    series = empirical_expansion(np.array(tables))
    assert abs(series.gamma[0] - theory) < 0.05


def test_m_algorithm_clean_side_info_recovers_exactly():
    rng = np.random.default_rng(38)
    p = CodecParams.from_q(0.8)
    for m in (1, 2, 64):
        for _ in range(10):
            x = random_bits(rng, 120)
            cw = encode(x, p)
            out = m_algorithm_decode(cw, SideInfo(x.copy(), 0.0),
                                     SearchConfig(m_paths=m))
            assert np.array_equal(out, x)


def test_m_algorithm_no_overlap_ignores_side_info():
    rng = np.random.default_rng(39)
    x = random_bits(rng, 80)
    cw = encode(x, CodecParams.from_q(0.5))
    y = x ^ (rng.random(80) < 0.3).astype(np.uint8)
    out = m_algorithm_decode(cw, SideInfo(y, 0.3), SearchConfig(m_paths=8))
    assert np.array_equal(out, x)


def test_m_algorithm_unbounded_list_with_clean_side_info():
    rng = np.random.default_rng(40)
    x = random_bits(rng, 64)
    cw = encode(x, CodecParams.from_q(0.8))
    out = m_algorithm_decode(cw, SideInfo(x.copy(), 0.0),
                             SearchConfig(m_paths=10 ** 6))
    assert np.array_equal(out, x)


def test_m_algorithm_all_paths_eliminated():
    x = np.zeros(10, dtype=np.uint8)
    cw = encode(x, CodecParams.from_q(0.5))
    y = np.ones(10, dtype=np.uint8)
    with pytest.raises(AllPathsEliminated):
        m_algorithm_decode(cw, SideInfo(y, 0.0), SearchConfig(m_paths=4))


def test_m_algorithm_deterministic():
    rng = np.random.default_rng(41)
    p = CodecParams.from_q(0.8)
    x = random_bits(rng, 200)
    cw = encode(x, p)
    y = x ^ (rng.random(200) < 0.05).astype(np.uint8)
    si = SideInfo(y, 0.05)
    cfg = SearchConfig(m_paths=32)
    a = m_algorithm_decode(cw, si, cfg)
    b = m_algorithm_decode(cw, si, cfg)
    assert np.array_equal(a, b)


def test_m_algorithm_length_mismatch():
    cw = encode(np.array([0, 1, 1], dtype=np.uint8), CodecParams.from_q(0.8))
    with pytest.raises(ValueError):
        m_algorithm_decode(cw, SideInfo(np.array([0, 1], dtype=np.uint8), 0.1),
                           SearchConfig())
