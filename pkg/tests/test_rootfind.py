from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leafstrip.rootfind import (
    confidence_set_Rk,
    greedy_likelihood_strip,
    jordan_confidence_set,
    jordan_scores,
    leaf_strip,
    m_n,
    root_captured_characterization,
    strip_rounds,
    survival_rounds,
)
from leafstrip.treegen import EdgeList, IncreasingTree, enumerate_increasing_trees, generate_rrt, permute_labels

from oracles import greedy_survivor_law, naive_jordan, naive_strip

PATH3 = IncreasingTree.from_parents([1, 2])
STAR4 = IncreasingTree.from_parents([1, 1, 1])
SINGLE = IncreasingTree.from_parents([])


@pytest.mark.parametrize("n, expected", [(1, 1), (3, 3), (4, 4), (10, 5), (100, 11)])
def test_m_n(n, expected):
    assert m_n(n) == expected


def test_leaf_strip_examples():
    assert leaf_strip(PATH3, 1).vertices == {2}
    assert leaf_strip(STAR4, 1).vertices == {1}
    assert leaf_strip(STAR4, 2).vertices == frozenset()
    t = generate_rrt(40, 1)
    assert leaf_strip(t, 0).vertices == set(range(1, 41))
    assert leaf_strip(SINGLE, 1).vertices == frozenset()
    assert leaf_strip(IncreasingTree.from_parents([1]), 1).vertices == frozenset()
    with pytest.raises(ValueError):
        leaf_strip(PATH3, -1)


@given(st.integers(1, 300), st.integers(0, 2**32), st.integers(0, 15))
@settings(max_examples=150, deadline=None)
def test_leaf_strip_matches_naive(n, seed, rounds):
    t = generate_rrt(n, seed)
    got = leaf_strip(t, rounds).vertices
    assert got == naive_strip(n, t.edges(), rounds)
    s = survival_rounds(t)
    assert got == {v for v in range(1, n + 1) if s[v] >= rounds}


@given(st.integers(1, 200), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_strip_nested(n, seed):
    t = generate_rrt(n, seed)
    prev = leaf_strip(t, 0).vertices
    for r in range(1, 12):
        cur = leaf_strip(t, r).vertices
        assert cur <= prev
        prev = cur


@given(st.integers(2, 150), st.integers(0, 2**32), st.integers(0, 10), st.randoms())
@settings(max_examples=60, deadline=None)
def test_strip_relabel_invariant(n, seed, rounds, rnd):
    t = generate_rrt(n, seed)
    sigma = list(range(1, n + 1))
    rnd.shuffle(sigma)
    image = permute_labels(t, sigma)
    assert leaf_strip(image, rounds).vertices == {sigma[v - 1] for v in leaf_strip(t, rounds).vertices}
    s, s_img = survival_rounds(t), survival_rounds(image)
    assert all(s[v] == s_img[sigma[v - 1]] for v in range(1, n + 1))


def test_Rk_examples():
    assert confidence_set_Rk(SINGLE, 1).vertices == {1}
    t = generate_rrt(25, 2)
    assert confidence_set_Rk(t, m_n(25) + 3).vertices == set(range(1, 26))
    r = confidence_set_Rk(PATH3, 2)
    assert r.rounds_performed == 1 and r.vertices == {2} and 1 not in r


def test_characterization_examples():
    assert root_captured_characterization(STAR4, 3)
    assert 1 in leaf_strip(STAR4, m_n(4) - 3)
    assert not root_captured_characterization(PATH3, m_n(3) - 1)


@pytest.mark.parametrize("n", range(1, 8))
def test_characterization_exhaustive(n):
    mn = m_n(n)
    for t in enumerate_increasing_trees(n):
        for k in range(0, mn):
            assert root_captured_characterization(t, k) == (1 in confidence_set_Rk(t, k))


def test_characterization_random():
    for seed in range(300):
        t = generate_rrt(1000, seed)
        for k in range(1, 6):
            assert root_captured_characterization(t, k) == (1 in confidence_set_Rk(t, k))


def test_jordan_examples():
    assert list(jordan_scores(PATH3)[1:]) == [2, 1, 2]
    assert list(jordan_scores(STAR4)[1:]) == [1, 3, 3, 3]
    assert list(jordan_scores(SINGLE)[1:]) == [0]
    assert jordan_confidence_set(PATH3, 1).vertices == {2}
    assert jordan_confidence_set(STAR4, 1).vertices == {1}
    t = generate_rrt(30, 5)
    assert jordan_confidence_set(t, 30).vertices == set(range(1, 31))
    with pytest.raises(ValueError):
        jordan_confidence_set(PATH3, 0)
    with pytest.raises(ValueError):
        jordan_confidence_set(PATH3, 4)


def test_jordan_tie_break_smaller_label():
    # path 1-2-3-4: vertices 2 and 3 both score 2
    t = IncreasingTree.from_parents([1, 2, 3])
    assert jordan_confidence_set(t, 1).vertices == {2}


def test_jordan_matches_brute_force():
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        t = generate_rrt(n, int(rng.integers(0, 2**63)))
        ref = naive_jordan(n, t.edges())
        got = jordan_scores(t)
        assert all(got[v] == ref[v] for v in ref)


@given(st.integers(2, 100), st.integers(0, 2**32), st.randoms())
@settings(max_examples=40, deadline=None)
def test_jordan_relabel_invariant(n, seed, rnd):
    t = generate_rrt(n, seed)
    sigma = list(range(1, n + 1))
    rnd.shuffle(sigma)
    image = permute_labels(t, sigma)
    a, b = jordan_scores(t)[1:], jordan_scores(image)[1:]
    assert sorted(a) == sorted(b)
    if len(set(a)) == n:
        size = max(1, n // 3)
        assert jordan_confidence_set(image, size).vertices == {
            sigma[v - 1] for v in jordan_confidence_set(t, size).vertices}


def test_greedy_full_set_and_range():
    t = generate_rrt(20, 8)
    assert greedy_likelihood_strip(t, 20, 1).vertices == set(range(1, 21))
    with pytest.raises(ValueError):
        greedy_likelihood_strip(t, 0, 1)


def test_greedy_is_reproducible():
    t = generate_rrt(500, 8)
    assert greedy_likelihood_strip(t, 7, 42).vertices == greedy_likelihood_strip(t, 7, 42).vertices


def test_greedy_path_and_star_laws():
    # once one end of the path is gone the middle vertex is itself a leaf,
    # so any vertex can be the last survivor
    law = greedy_survivor_law(3, PATH3.edges(), 1)
    assert law == {frozenset({1}): Fraction(1, 4), frozenset({2}): Fraction(1, 2), frozenset({3}): Fraction(1, 4)}
    law = greedy_survivor_law(4, STAR4.edges(), 1)
    assert law[frozenset({1})] == Fraction(1, 2)


@pytest.mark.parametrize("tree, survivors", [
    (PATH3, 1),
    (STAR4, 1),
    (IncreasingTree.from_parents([1, 1, 2, 2, 3]), 2),
    (IncreasingTree.from_parents([1, 2, 2, 1, 5, 5]), 3),
])
def test_greedy_matches_exact_law(tree, survivors):
    law = greedy_survivor_law(tree.n, tree.edges(), survivors)
    trials = 20000
    rng = np.random.Generator(np.random.PCG64(2024))
    counts = Counter(greedy_likelihood_strip(tree, survivors, rng).vertices for _ in range(trials))
    assert set(counts) <= set(law)
    for outcome, p in law.items():
        p = float(p)
        se = (p * (1 - p) / trials) ** 0.5
        assert abs(counts[outcome] / trials - p) <= 4 * se + 1e-12


def test_greedy_on_edge_list():
    e = EdgeList(3, [(3, 2), (2, 1)])
    kept = greedy_likelihood_strip(e, 2, 1).vertices
    assert len(kept) == 2 and 2 in kept


def test_strip_rounds_clamps():
    assert strip_rounds(10, 0) == 5
    assert strip_rounds(10, 50) == 0
