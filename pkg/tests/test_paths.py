import math

import numpy as np
import pytest

from dmot.errors import InvalidPoint, InvalidRange, NoMeetingAbove
from dmot.hierarchy import know_query, lca
from dmot.oracles import naive_jump, naive_known_sets, naive_meet, naive_meeting_jump
from dmot.paths import ROOT, skip_base

from conftest import instance, literal

CASES = [(2, 0, "t2e2", "uniform"), (60, 1, "t2e2", "uniform"), (70, 2, "t15e3", "scattered"), (50, 3, "eps05", "scattered"), (90, 4, "t2e2", "scattered")]


def _members(t, v):
    return frozenset(t.members(v).tolist())


def test_skip_base():
    assert [skip_base(n) for n in (1, 2, 4, 16, 17, 256, 65536, 65537)] == [1, 1, 1, 2, 3, 3, 4, 5]


@pytest.mark.parametrize("case", CASES)
def test_decomposition(case):
    _, st = instance(*case)
    t, nav = st.tree, st.nav
    interior = [v for pv in nav.path_vertices for v in pv[1:]]
    assert sorted(interior) == [v for v in range(t.node_count) if v != t.root]
    for q, pv in enumerate(nav.path_vertices):
        for a, b in zip(pv, pv[1:]):
            assert t.parent[b] == a
        assert nav.p_ptr[q] == (ROOT if pv[0] == t.root else nav.path_of[pv[0]])
    cap = max(1, math.ceil(math.log2(t.n)))
    assert all(nav.paths_crossed(v) <= cap for v in range(t.n))


@pytest.mark.parametrize("case", CASES)
def test_meet_all_pairs(case):
    _, st = instance(*case)
    h = literal(*case)
    n = st.n
    for u in range(n):
        for v in range(n):
            if u != v:
                assert st.meet(u, v) == naive_meet(h, u, v)


@pytest.mark.parametrize("case", CASES)
def test_meet_on_nodes(case, rng):
    _, st = instance(*case)
    t, nav = st.tree, st.nav
    top = int(t.level[t.root])

    def slow(a, b):
        for j in range(max(int(t.level[a]), int(t.level[b])), top + 1):
            A, B = t.ancestor_at(a, j), t.ancestor_at(b, j)
            if A == B:
                return j
            k = know_query(t, A, B)
            if k is not None and k <= j:
                return j
        return top

    for _ in range(400):
        a, b = (int(x) for x in rng.integers(t.node_count, size=2))
        assert nav.meet_nodes(a, b) == slow(a, b)


@pytest.mark.parametrize("case", CASES)
def test_level_ancestor_jump(case, rng):
    _, st = instance(*case)
    h = literal(*case)
    t, nav = st.tree, st.nav
    top = int(t.level[t.root])
    for _ in range(400):
        x = int(rng.integers(st.n))
        j = int(rng.integers(0, top + 3))
        a = st.level_ancestor_jump(x, j)
        assert _members(t, a) == naive_jump(h, x, j)
        assert nav.last_jump.total <= 3 * nav.x + 3


@pytest.mark.parametrize("case", CASES)
def test_meeting_jump(case, rng):
    _, st = instance(*case)
    h = literal(*case)
    t = st.tree
    top = int(t.level[t.root])
    for _ in range(400):
        x = int(rng.integers(st.n))
        i = int(rng.integers(0, top + 2))
        exp = naive_meeting_jump(h, x, i)
        if exp is None:
            with pytest.raises(NoMeetingAbove):
                st.meeting_jump(x, i)
            continue
        s, w, lv = st.meeting_jump(x, i)
        assert lv == exp[0]
        assert (_members(t, s), _members(t, w)) in exp[1]


@pytest.mark.parametrize("case", CASES)
def test_known_sets(case, rng):
    _, st = instance(*case)
    h = literal(*case)
    t, nav = st.tree, st.nav
    top = int(t.level[t.root])
    for _ in range(150):
        x = int(rng.integers(st.n))
        i = int(rng.integers(0, top + 1))
        j = int(rng.integers(i, top + 3))
        anchor = [None, i, j, top][int(rng.integers(4))]
        got = nav.known_sets_by_level(x, i, j, anchor=anchor)
        assert [g[0] for g in got] == list(range(i, j + 1))
        for l, own, acq in got:
            mine, known = naive_known_sets(h, x, l)
            assert _members(t, own) == mine
            assert sorted((_members(t, w) for w in acq), key=sorted) == known
        # the compact form lists only change points, starting at i
        compact = nav.known_sets_in_range(x, i, j, anchor)
        assert compact[0][0] == i
        assert [c[0] for c in compact] == sorted({c[0] for c in compact})


def test_range_and_point_errors():
    _, st = instance(20, 9)
    with pytest.raises(InvalidRange):
        st.known_sets_in_range(0, 3, 1)
    with pytest.raises(InvalidPoint):
        st.meet(0, 20)
    with pytest.raises(InvalidPoint):
        st.level_ancestor_jump(-1, 0)


def test_approx_distance_sandwich():
    ms, st = instance(90, 4, "t2e2", "scattered")
    D = ms.full_matrix()
    f = st.config.distance_factor
    for u in range(ms.n):
        for v in range(u + 1, ms.n):
            r = st.approx_distance(u, v)
            assert r <= D[u, v] * (1 + 1e-12) <= f * r * (1 + 1e-9)
    assert st.approx_distance(3, 3) == 0.0
