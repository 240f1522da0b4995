import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leafstrip.rootfind import leaf_strip, m_n, strip_rounds
from leafstrip.treegen import IncreasingTree, enumerate_increasing_trees, generate_rrt
from leafstrip.ulam import (
    BitString,
    MalformedCode,
    codes,
    ell,
    ell_inv,
    embed_phi,
    exact_flip_counts,
    flip_f,
    flip_tree,
    format_embedding,
    nodes_in_zone,
    tall_zone_set,
    verify_flip_properties,
    zone,
)

from oracles import ell_string, naive_heights

PATH3 = IncreasingTree.from_parents([1, 2])


def test_zone():
    assert zone((1, 2)) == 3
    assert zone(()) == 0


@pytest.mark.parametrize("z", range(1, 13))
def test_zone_population(z):
    nodes = list(nodes_in_zone(z))
    assert len(nodes) == len(set(nodes)) == 2 ** (z - 1)
    assert all(zone(u) == z for u in nodes)


def test_ell_examples():
    assert str(ell((1,))) == "1"
    assert str(ell((1, 2))) == "110"
    assert str(ell(())) == ""
    assert ell_inv("") == ()
    assert ell_inv("110") == (1, 2)


def test_ell_inv_rejects_leading_zero():
    with pytest.raises(MalformedCode):
        ell_inv("0110")


def test_ell_round_trip_exhaustive():
    for z in range(0, 15):
        for u in nodes_in_zone(z):
            b = ell(u)
            assert str(b) == ell_string(u)
            assert len(b) == zone(u)
            assert b.ones() == len(u)
            assert ell_inv(b) == u
    for length in range(1, 15):
        for tail in itertools.product("01", repeat=length - 1):
            s = "1" + "".join(tail)
            assert str(ell(ell_inv(s))) == s


@given(st.lists(st.integers(1, 6), max_size=8))
def test_ell_round_trip_up_to_zone_20(u):
    u = tuple(u)
    if zone(u) <= 20:
        assert ell_inv(ell(u)) == u


def test_flip_examples():
    assert str(flip_f(5, "1")) == "1"
    assert str(flip_f(3, "110")) == "101"
    assert str(flip_f(2, "1101")) == "1001"
    assert str(flip_f(4, "")) == ""
    # shorter than j: every bit after the first is complemented
    assert str(flip_f(10, "1100")) == "1011"


@given(st.integers(2, 12), st.text("01", max_size=14))
def test_flip_is_involution_and_keeps_first_bit(j, tail):
    b = BitString.from_str("1" + tail)
    fb = flip_f(j, b)
    assert flip_f(j, fb) == b
    assert str(fb)[0] == "1"
    assert str(fb)[j:] == str(b)[j:]


def test_embed_examples():
    assert embed_phi(IncreasingTree.from_parents([])).nodes == ((),)
    emb = embed_phi(IncreasingTree.from_parents([1, 1, 2]))
    assert emb[1] == () and emb[2] == (1,) and emb[3] == (2,) and emb[4] == (1, 1)


def _check_embedding_conditions(t, emb):
    where = {u: v for v, u in emb.items()}
    assert emb[1] == ()
    assert len(where) == t.n
    heights = naive_heights(t.parents())
    for v, u in emb.items():
        if v == 1:
            continue
        assert where[u[:-1]] == t.parent[v]
        if u[-1] > 1:
            assert where[u[:-1] + (u[-1] - 1,)] < v
        assert len(u) == heights[v]


@given(st.integers(1, 300), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_embedding_conditions(n, seed):
    t = generate_rrt(n, seed)
    emb = embed_phi(t)
    _check_embedding_conditions(t, emb)
    assert [str(c) for c in codes(t)] == [str(ell(u)) for u in emb.nodes]


def test_flip_tree_single_vertex():
    t = IncreasingTree.from_parents([])
    assert flip_tree(t, 2) == t


@given(st.integers(1, 400), st.integers(0, 2**32), st.integers(2, 12))
@settings(max_examples=200, deadline=None)
def test_flip_tree_involution_random(n, seed, j):
    t = generate_rrt(n, seed)
    tb = flip_tree(t, j)
    _check_embedding_conditions(tb, embed_phi(tb))
    assert flip_tree(tb, j) == t


def test_flip_tree_involution_thousand_pairs():
    rng = np.random.Generator(np.random.PCG64(11))
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        j = int(rng.integers(2, 10))
        t = generate_rrt(n, int(rng.integers(0, 2**63)))
        assert np.array_equal(flip_tree(flip_tree(t, j), j).parent, t.parent)


@pytest.mark.parametrize("j", [2, 3, 4, 5])
@pytest.mark.parametrize("n", range(1, 8))
def test_flip_tree_bijection_exhaustive(n, j):
    trees = list(enumerate_increasing_trees(n))
    images = [flip_tree(t, j) for t in trees]
    assert sorted(t.parents() for t in images) == sorted(t.parents() for t in trees)


def test_flip_swaps_heights_in_first_zones():
    # root with children 2, 3; vertex 4 under 2. Flipping zones 1..2 moves
    # vertex 3 from (2) to (1, 1) and vertex 4 from (1, 1) to (2)
    t = IncreasingTree.from_parents([1, 1, 2])
    tb = flip_tree(t, 2)
    assert tb.parents() == (1, 2, 1)


def test_verify_path3():
    rep = verify_flip_properties(PATH3, 1)
    assert rep.passed
    assert rep.zone == 4


def test_deep_vertex_after_flip():
    # property (iii) at zone 4k: shallow vertices come back deep
    k = 1
    hits = 0
    for seed in range(200):
        t = generate_rrt(40, seed)
        emb = embed_phi(t)
        embb = embed_phi(flip_tree(t, 4 * k))
        for v, u in emb.items():
            if zone(u) == 4 * k and len(u) <= 2 * k + 1:
                assert len(embb[v]) >= 2 * k
                hits += 1
    assert hits > 0


@pytest.mark.parametrize("n", range(1, 8))
def test_flip_properties_exhaustive(n):
    for t in enumerate_increasing_trees(n):
        for h in range(n):
            rep = verify_flip_properties(t, 1, height_threshold=h)
            assert rep.passed, (t, h, rep.failures())


@pytest.mark.parametrize("k", [1, 2, 3])
def test_flip_properties_sampled(k):
    for seed in range(25):
        rep = verify_flip_properties(generate_rrt(3000, seed), k)
        assert rep.passed, rep.failures()


@pytest.mark.parametrize("zone_target", [2, 3, 4])
@pytest.mark.parametrize("n", range(2, 8))
def test_exact_half_deep_and_joint_law(n, zone_target):
    for h in range(n):
        fc = exact_flip_counts(n, height_threshold=h, zone_target=zone_target)
        assert fc.trees == math.factorial(n - 1)
        assert fc.bijective
        assert fc.joint_law_equal
        assert 2 * fc.deep >= fc.nonempty


def test_exact_counts_have_content():
    # the half-deep bound is not vacuous at these sizes
    fc = exact_flip_counts(7, k=1, height_threshold=1)
    assert fc.nonempty > 0 and fc.deep < fc.nonempty


def test_tall_zone_set_threshold():
    t = IncreasingTree.from_parents([1, 1, 1, 4])  # vertex 4 at (3) with child 5
    assert tall_zone_set(t, 3, 1) == {4}
    assert tall_zone_set(t, 3, 2) == frozenset()


def test_small_empty_tall_set_can_leak_younger_siblings():
    # vertex 3 sits at (2) and is a leaf, so nothing in zone 2 is tall; its
    # younger sibling 4 at (3) has a child and outlives one stripping round
    t = IncreasingTree.from_parents([1, 1, 1, 4])
    assert tall_zone_set(t, 2, 1) == frozenset()
    emb = embed_phi(t)
    kept = leaf_strip(t, 1).vertices
    assert kept == {1, 4} and zone(emb[4]) == 3


@pytest.mark.parametrize("k", [1, 2])
def test_empty_tall_set_bounds_confidence_set_size(k):
    checked = 0
    for seed in range(300):
        t = generate_rrt(1000, seed)
        if tall_zone_set(t, 4 * k, m_n(t.n) - k):
            continue
        checked += 1
        assert len(leaf_strip(t, strip_rounds(t.n, k))) <= 2 ** (4 * k - 1)
    assert checked > 50


def test_format_embedding():
    text = format_embedding(IncreasingTree.from_parents([1, 1, 2]))
    assert text.splitlines() == ["1\t\t", "2\t1\t1", "3\t2\t10", "4\t1.1\t11"]
