import math

import numpy as np
import pytest

from dmot.dynamic_mst import (
    DynamicMST,
    RecomputeEngine,
    dynamic_bound,
    kruskal_inherit,
    layer_count_factor,
    static_bound,
    static_layered_mst,
    window_reach,
    window_span,
)
from dmot.errors import AlreadyPresent, EmptyX, NotPresent, UnknownPoint
from dmot.oracles import exact_mst, naive_known_sets, naive_meet
from dmot.partition import PartitionConfig

from conftest import instance, literal


def _opt(D, X):
    return exact_mst(D[np.ix_(X, X)])[0]


def test_bounds_at_tau_eta_two():
    cfg = PartitionConfig()
    assert window_reach(cfg) == 4  # ceil(log2 12)
    assert layer_count_factor(cfg) == 3  # ceil(log2 7)
    assert static_bound(cfg) == pytest.approx(36 + 8 * 6 * 3 * 7)
    assert dynamic_bound(cfg) == pytest.approx(60 + 8 * 6 * 3 * 7)
    assert [window_span(2.0, k) for k in (0, 1, 2, 3, 8, 9)] == [0, 0, 1, 2, 3, 4]


def test_kruskal_inherit_is_an_msf():
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 2.0), (2, 3, 5.0), (0, 4, 9.0)]
    out = kruskal_inherit(range(6), edges)
    assert sum(w for *_, w in out) == 9.0 and len(out) == 4


def test_tiny_sets():
    _, st = instance(60, 1)
    t = static_layered_mst(st, [7])
    assert t.edges == [] and t.weight == 0.0 and t.root == 7
    t = static_layered_mst(st, [7, 30])
    assert len(t.edges) == 1 and {t.edges[0][0], t.edges[0][1]} == {7, 30}
    with pytest.raises(EmptyX):
        static_layered_mst(st, [])
    with pytest.raises(NotPresent):
        static_layered_mst(st, [1, 2], root=3)


@pytest.mark.parametrize("cfg", ["t2e2", "t15e3", "eps05"])
def test_static_ratio_and_structure(cfg, rng):
    ms, st = instance(150, 11, cfg)
    D = ms.full_matrix()
    B = static_bound(st.config)
    for s in range(25):
        k = int(rng.integers(2, 129))
        X = sorted(rng.choice(ms.n, k, replace=False).tolist())
        t = static_layered_mst(st, X, seed=s)
        t.state.check()
        for u, v, w in t.edges:
            assert D[u, v] <= w * (1 + 1e-12)
        assert t.weight <= B * _opt(D, X)


def test_layers_and_buckets_against_oracles():
    case = (60, 3, "t2e2", "scattered")
    _, st = instance(*case)
    h = literal(*case)
    t = static_layered_mst(st, range(60), seed=4)
    s = t.state
    r = t.root
    tr = st.tree
    members = lambda v: frozenset(tr.members(v).tolist())
    for i, L in s.layers.items():
        for x in L.members:
            assert naive_meet(h, x, r) == i + 1
            lo, hi = s.window(i)
            expect = []
            for l in range(lo, hi + 1):
                own, known = naive_known_sets(h, x, l)
                expect.extend((l, S) for S in [own] + known)
            got = [(l, members(v)) for l, v in L.occurrences[x]]
            assert sorted(got, key=lambda p: (p[0], sorted(p[1]))) == sorted(
                expect, key=lambda p: (p[0], sorted(p[1]))
            )
    # lower window end is clamped at level 0
    assert s.window(0)[0] == 0


def test_bucket_membership_is_k_log_k(rng):
    ms, st = instance(400, 12)
    nav = st.nav
    # most sets any node knows at one level
    A = max((len(s) for sets in nav.snap_sets for s in sets), default=0)
    worst = 0.0
    for s in range(10):
        X = sorted(rng.choice(ms.n, int(rng.integers(16, 400)), replace=False).tolist())
        t = static_layered_mst(st, X, seed=s)
        logk = math.log2(len(X))
        for i, m in t.state.bucket_membership().items():
            lo, hi = t.state.window(i)
            ki = len(t.state.layers[i].members)
            assert m <= ki * (hi - lo + 1) * (1 + A)
            worst = max(worst, m / (ki * logk))
    print(f"bucket membership / (k_i log2 k): {worst:.2f}, acquaintance cap {A}")


def test_insert_and_delete_basics():
    _, st = instance(60, 1)
    s = DynamicMST(st, seed=1)
    s.insert(5)
    assert s.root == 5 and s.edges() == [] and s.rebuilds[-1].reason == "start"
    s.insert(9)
    s.insert(20)
    with pytest.raises(AlreadyPresent):
        s.insert(9)
    with pytest.raises(UnknownPoint):
        s.insert(60)
    leaf = next(x for x in (5, 9, 20) if x != s.root)
    n_before = len(s.rebuilds)
    s.delete(leaf)
    s.check()
    assert len(s.edges()) == 1
    with pytest.raises(NotPresent):
        s.delete(leaf)
    for x in sorted(s.points):
        s.delete(x)
    assert s.k == 0 and s.edges() == [] and s.layers == {}
    assert len(s.rebuilds) >= n_before


def test_insert_then_delete_matches_static(rng):
    ms, st = instance(150, 11)
    for seed in range(6):
        s = DynamicMST(st, seed=seed)
        X = rng.choice(ms.n, 40, replace=False).tolist()
        for x in X:
            s.insert(x)
        y = next(int(v) for v in rng.permutation(ms.n) if v not in s.points)
        n_rebuilds = len(s.rebuilds)
        before = s.weight()
        s.insert(y)
        s.delete(y)
        assert len(s.rebuilds) == n_rebuilds
        fresh = static_layered_mst(st, sorted(s.points), root=s.root, window_k=s.k0)
        assert s.weight() == pytest.approx(fresh.weight, rel=1e-12)
        assert s.weight() == pytest.approx(before, rel=1e-12)


def test_growth_8_to_16_rebuilds_once():
    _, st = instance(60, 1)
    s = DynamicMST(st)
    for x in range(8):
        s.insert(x)
    assert s.k0 == 8
    n = len(s.rebuilds)
    for x in range(8, 16):
        s.insert(x)
    assert len(s.rebuilds) == n + 1 and s.rebuilds[-1].k_after == 16


def test_root_deletion_always_rebuilds():
    _, st = instance(60, 1)
    s = DynamicMST(st, seed=3)
    for x in range(20):
        s.insert(x)
    for _ in range(10):
        n = len(s.rebuilds)
        r = s.root
        s.delete(r)
        assert len(s.rebuilds) == n + 1 and s.rebuilds[-1].reason == "root"
        s.check()
        s.insert(r)


def test_alternative_engine_is_pluggable():
    class CountingEngine(RecomputeEngine):
        calls = 0

        def add_edge(self, key, u, v, w):
            CountingEngine.calls += 1
            super().add_edge(key, u, v, w)

    _, st = instance(60, 1)
    t = static_layered_mst(st, range(30), engine_factory=CountingEngine)
    t.state.check()
    assert CountingEngine.calls > 0


@pytest.mark.parametrize("cfg", ["t2e2", "t15e3"])
def test_random_script(cfg):
    ms, st = instance(120, 13, cfg)
    D = ms.full_matrix()
    Bd = dynamic_bound(st.config)
    rng = np.random.default_rng(5)
    s = DynamicMST(st, seed=5)
    for _ in range(400):
        if s.points and rng.random() < 0.45:
            s.delete(int(rng.choice(sorted(s.points))))
        else:
            x = int(rng.integers(ms.n))
            if x in s.points:
                continue
            s.insert(x)
        s.check()
        for x, i in s.layer_of.items():
            assert st.meet(x, s.root) == i + 1
        if s.k > 1:
            assert s.weight() <= Bd * _opt(D, sorted(s.points))
    for ev in s.rebuilds:
        if ev.reason == "drift":
            assert ev.ops_since >= math.ceil(ev.k_before / 2)
