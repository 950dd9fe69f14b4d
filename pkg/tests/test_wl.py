from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wlembed.errors import IndexOutOfRange
from wlembed.graph import build_graph
from wlembed.wl import (EMPTY, UNKNOWN, ExtendedLabel, LabelRegistry, WLTestResult,
                        extended_label, intern, unfold, wl_isomorphism_test, wl_refine,
                        wl_refine_many)

from conftest import graphs, permuted, random_graph

TRIANGLE = build_graph(3, [1, 1, 1], [(0, 1), (1, 2), (0, 2)])
PATH3 = build_graph(3, [1, 1, 1], [(0, 1), (1, 2)])
C6 = build_graph(6, [1] * 6, [(i, (i + 1) % 6) for i in range(6)])
TWO_C3 = build_graph(6, [1] * 6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def test_intern_examples():
    reg = LabelRegistry()
    a = intern(reg, (1, (1, 2)))
    assert intern(reg, (1, (1, 2))) == a
    assert intern(reg, (1, (2, 1))) == a
    b = intern(reg, (1, (1,)))
    c = intern(reg, (2, (1,)))
    assert (b, c) == (a + 1, a + 2)
    assert reg.J == 3
    assert reg.lookup(ExtendedLabel.make(3, ())) == UNKNOWN


def test_sentinels_distinct_from_empty_multiset():
    reg = LabelRegistry()
    i = reg.intern(ExtendedLabel.make(1, EMPTY))
    j = reg.intern(ExtendedLabel.make(1, ()))
    k = reg.intern(ExtendedLabel.make(EMPTY, (1,)))
    assert len({i, j, k}) == 3
    assert str(reg.label_of(i)) == "(1, ∅)"
    assert str(reg.label_of(k)) == "(∅, {1})"


def test_extended_label_examples():
    tri = build_graph(3, [1, 1, 2], [(0, 1), (1, 2), (0, 2)])
    assert extended_label(tri, 0) == (1, (1, 2))
    assert extended_label(build_graph(1, [3], []), 0) == (3, ())
    star = build_graph(5, [1, 2, 2, 2, 2], [(0, i) for i in range(1, 5)])
    assert extended_label(star, 0) == (1, (2, 2, 2, 2))
    with pytest.raises(IndexOutOfRange):
        extended_label(star, 5)


def test_refine_examples():
    res = wl_refine(TRIANGLE, 0)
    assert res.iterations == [(1, 1, 1)] and res.label_counts == [1]
    res = wl_refine(TRIANGLE, 1)
    assert len(set(res.final())) == 1
    assert res.label_counts == [1, 2]
    res = wl_refine(PATH3, 1)
    assert len(set(res.final())) == 2
    assert res.final()[0] == res.final()[2] != res.final()[1]


def test_refine_frozen_registry_maps_unseen_to_unknown():
    reg = LabelRegistry()
    wl_refine(TRIANGLE, 1, reg)
    J = reg.J
    res = wl_refine(PATH3, 1, reg, grow=False)
    assert reg.J == J
    assert UNKNOWN in res.final()


def test_dump_format():
    reg = LabelRegistry()
    wl_refine(PATH3, 1, reg)
    assert reg.dump().splitlines() == ["1\t1\t-", "2\t1\t1", "3\t1\t1,1"]


def test_isomorphism_examples():
    assert wl_isomorphism_test(TRIANGLE, TRIANGLE, 3) is WLTestResult.INCONCLUSIVE
    assert wl_isomorphism_test(TRIANGLE, PATH3, 1) is WLTestResult.NOT_ISOMORPHIC
    for k in (1, 2, 5, 10):
        assert wl_isomorphism_test(C6, TWO_C3, k) is WLTestResult.INCONCLUSIVE


def test_registry_roundtrip():
    reg = LabelRegistry()
    wl_refine_many([TRIANGLE, PATH3, C6], 2, reg)
    assert LabelRegistry.from_list(reg.to_list()) == reg


def _unfolded(res, depth):
    return Counter(unfold(res.registry, j, depth) for j in res.iterations[depth])


@settings(max_examples=100, deadline=None)
@given(graphs(), st.integers(0, 3), st.randoms(use_true_random=False))
def test_refine_permutation_invariant(g, T, rnd):
    perm = list(range(g.num_nodes))
    rnd.shuffle(perm)
    a = wl_refine(g, T)
    b = wl_refine(g.permute(perm), T)
    for t in range(T + 1):
        assert _unfolded(a, t) == _unfolded(b, t)
    # shared registry: the index histograms match directly
    reg = LabelRegistry()
    a = wl_refine(g, T, reg)
    b = wl_refine(g.permute(perm), T, reg)
    assert [Counter(x) for x in a.iterations] == [Counter(x) for x in b.iterations]
    # node i of g and node perm[i] of the copy carry the same label
    assert all(a.final()[i] == b.final()[perm[i]] for i in range(g.num_nodes))


@settings(max_examples=60, deadline=None)
@given(st.lists(graphs(), min_size=1, max_size=5), st.integers(0, 4))
def test_label_counts_monotone(gs, T):
    _, counts = wl_refine_many(gs, T)
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_refine_many_matches_single():
    rng = np.random.default_rng(3)
    gs = [random_graph(rng) for _ in range(10)]
    results, counts = wl_refine_many(gs, 2)
    reg = results[0].registry
    for g, r in zip(gs, results):
        again = wl_refine(g, 2, reg, grow=False)
        assert again.iterations == r.iterations
    assert counts[-1] == reg.J


def test_isomorphic_never_rejected(rng):
    for _ in range(100):
        g = random_graph(rng)
        assert wl_isomorphism_test(g, permuted(g, rng), 4) is WLTestResult.INCONCLUSIVE
