import itertools

import numpy as np
import pytest

from dmot import oracles, solvers
from dmot.errors import EndpointNotInQuery, InvalidR, NoFacilities
from dmot.metric import build_metric
from dmot.spanner import build_pseudospanner, distance_matrix
from dmot.structure import preprocess

from conftest import instance


def _spanner(st, S):
    return build_pseudospanner(st.extract(S), st.config)


def _tree_weight(D, edges):
    return sum(D[u, v] for u, v, _ in edges)


def _spans(vertices, edges, pairs=None):
    dsu = solvers._DSU(vertices)
    for u, v, _ in edges:
        dsu.union(u, v)
    if pairs is None:
        pairs = [(vertices[0], x) for x in vertices]
    return all(dsu.find(a) == dsu.find(b) for a, b in pairs)


@pytest.fixture(scope="module")
def small():
    ms, st = instance(40, 21)
    return ms.full_matrix(), st


def test_mst_is_exact_in_h(small, rng):
    D, st = small
    for _ in range(20):
        S = sorted(rng.choice(40, int(rng.integers(2, 12)), replace=False).tolist())
        sp = _spanner(st, S)
        t = solvers.approx_mst(sp)
        assert len(t.edges) == len(S) - 1 and _spans(S, t.edges)
        # the MST of H has the weight of the MST of the d_H closure
        assert t.weight == pytest.approx(oracles.exact_mst(distance_matrix(sp, S))[0])


def test_tsp_and_steiner_ratios(small, rng):
    D, st = small
    C = st.config.spanner_stretch
    for _ in range(30):
        k = int(rng.integers(3, 9))
        S = sorted(rng.choice(40, k, replace=False).tolist())
        sp = _spanner(st, S)
        tour = solvers.tsp_tour(sp)
        assert sorted(tour.order) == S
        true_len = sum(D[tour.order[i], tour.order[(i + 1) % k]] for i in range(k))
        assert true_len <= tour.length * (1 + 1e-12)
        assert true_len <= 2 * C * oracles.exact_tsp(D[np.ix_(S, S)])[0]
        tree = solvers.steiner_tree(sp)
        assert _spans(S, tree.edges)
        assert _tree_weight(D, tree.edges) <= 2 * C * oracles.exact_steiner(D, S) * (1 + 1e-12)


def test_steiner_forest(small, rng):
    D, st = small
    C = st.config.spanner_stretch
    for _ in range(20):
        S = sorted(rng.choice(40, int(rng.integers(4, 8)), replace=False).tolist())
        pairs = [tuple(rng.choice(S, 2, replace=False).tolist()) for _ in range(2)]
        sp = _spanner(st, S)
        f = solvers.steiner_forest(sp, pairs)
        assert _spans(S, f.edges, pairs)
        assert _tree_weight(D, f.edges) <= 2 * C * oracles.steiner_forest_opt(D, S, pairs) * (1 + 1e-9)
    sp = _spanner(st, [1, 2, 3])
    assert solvers.steiner_forest(sp, [(2, 2)]).weight == 0.0
    with pytest.raises(EndpointNotInQuery):
        solvers.steiner_forest(sp, [(1, 7)])


def test_k_center(small, rng):
    D, st = small
    C = st.config.spanner_stretch
    for _ in range(20):
        S = sorted(rng.choice(40, int(rng.integers(3, 10)), replace=False).tolist())
        sp = _spanner(st, S)
        for r in (1, 2, 3):
            cs = solvers.k_center(sp, r)
            assert len(cs.centers) == r and set(cs.assignment) == set(S)
            rad = D[np.ix_(cs.centers, S)].min(axis=0).max()
            opt = oracles.exact_k_center(D[np.ix_(S, S)], r)[0]
            assert rad <= 2 * C * opt * (1 + 1e-9)
    with pytest.raises(InvalidR):
        solvers.k_center(_spanner(st, [1, 2]), 3)


def test_greedy_facility_location_on_its_own():
    # two cities on a line, a facility on each; opening one is cheaper
    dist = [[0.0, 1.0], [1.0, 0.0]]
    sol = solvers.greedy_facility_location(dist, [10, 11], [10, 11], [5.0, 5.0])
    assert sol.open in ([10], [11]) and sol.cost == 6.0
    sol = solvers.greedy_facility_location(dist, [10, 11], [10, 11], [0.1, 0.1])
    assert sol.open == [10, 11] and sol.cost == pytest.approx(0.2)
    with pytest.raises(NoFacilities):
        solvers.greedy_facility_location(dist, [10, 11], [10, 11], [np.inf, np.inf])


def test_greedy_ratio_against_exact(rng):
    for _ in range(40):
        m, k = int(rng.integers(2, 6)), int(rng.integers(1, 7))
        pts = rng.random((m + k, 2))
        D = build_metric(points=pts).full_matrix()
        fac, cit = list(range(m)), list(range(m, m + k))
        costs = rng.random(m) * rng.choice([0.1, 1.0, 3.0])
        sol = solvers.greedy_facility_location([[D[f, c] for c in cit] for f in fac], cit, fac, costs)
        opt = oracles.exact_fl(D, cit, fac, costs)[0]
        assert opt * (1 - 1e-9) <= sol.cost <= solvers.GREEDY_FL_RATIO * opt * (1 + 1e-9)


def test_restricted_fl(small, rng):
    D, st = small
    C = st.config.spanner_stretch
    for _ in range(20):
        S = sorted(rng.choice(40, int(rng.integers(3, 8)), replace=False).tolist())
        costs = rng.random(len(S))
        sol = solvers.facility_location_restricted(_spanner(st, S), S, S, costs)
        true = sum(costs[S.index(f)] for f in sol.open) + sum(D[c, sol.assignment[c]] for c in S)
        opt = oracles.exact_fl(D, S, S, costs)[0]
        assert true <= solvers.GREEDY_FL_RATIO * C * opt * (1 + 1e-9)
    with pytest.raises(EndpointNotInQuery):
        solvers.facility_location_restricted(_spanner(st, [1, 2]), [1], [3], [1.0])
