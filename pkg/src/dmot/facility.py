"""Facility location where every point may host a facility.

Preprocessing walks each point's root path in the *bar tree*: every tree node
is split into one bar node per level at which its set of acquaintances
changes (its birth and each of its meeting levels). A bar node remembers the
cheapest point among its own set and the sets it knows at that level
(``low``). For each point ``x`` a contiguous run ``F(x)`` of its bar path is
kept: it starts where ``low`` is affordable for ``n / eps0`` cities and ends
where ``low`` is cheap even for one city.

A query for cities ``C`` keeps, from each ``F(c)``, the bar nodes whose
``low`` is affordable for ``|C| / eps0`` cities, adds the globally cheapest
point, and solves the restricted problem on the spanner of ``C`` plus those
candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyQuery, NoFacilities, UnknownPoint
from .partition import level_radius
from .solvers import FLSolution, facility_location_restricted
from .spanner import build_pseudospanner
from .structure import Structure

DEFAULT_EPS0 = 0.5


@dataclass
class BarNode:
    node: int  # tree node this bar node belongs to
    level: int
    low: int  # cheapest point known at this level


@dataclass
class FLIndex:
    costs: np.ndarray
    eps0: float
    vis_factor: float  # vis(j) = vis_factor * r_j
    r0: float
    tau: float
    bars: list[BarNode]
    node_bars: list[list[int]]  # tree node -> its bar nodes, bottom-up
    F: list[list[int]]  # point -> bar node ids v_p..v_q, bottom-up
    root_low: int

    def vis(self, level: int) -> float:
        return self.vis_factor * level_radius(self.r0, self.tau, level)

    def bar_path(self, st: Structure, x: int) -> list[int]:
        """All bar nodes on the root path of point ``x``, bottom-up."""
        t = st.tree
        out = []
        v = x
        while v >= 0:
            out.extend(self.node_bars[v])
            v = int(t.parent[v])
        return out

    def facilities_for(self, x: int, k: int) -> list[int]:
        """``F_k(x)``: lows of the top part of ``F(x)`` affordable for ``k`` cities."""
        out = []
        for b in reversed(self.F[x]):
            bar = self.bars[b]
            if self.costs[bar.low] <= k / self.eps0 * self.vis(bar.level):
                out.append(bar.low)
            else:
                break
        return out

    def size_bound(self, n: int) -> int:
        """``ceil(log_tau(n / eps0^2)) + 1``."""
        return math.ceil(math.log(n / self.eps0**2) / math.log(self.tau)) + 1


def fl_preprocess_unrestricted(st: Structure, costs, eps0: float = DEFAULT_EPS0) -> FLIndex:
    t, nav = st.tree, st.nav
    n = t.n
    f = np.asarray(costs, dtype=np.float64)
    if f.shape != (n,):
        raise ValueError(f"need one opening cost per point ({n})")
    if np.any(f < 0) or np.any(np.isnan(f)):
        raise ValueError("opening costs must be nonnegative")
    if not 0 < eps0 <= 1:
        raise ValueError("eps0 must lie in (0, 1]")
    # cheapest point in every subtree, ties by smaller id
    N = t.node_count
    sub_min = list(range(n)) + [-1] * (N - n)
    for v in range(n, N):
        sub_min[v] = min((sub_min[int(c)] for c in t.children(v)), key=lambda p: (f[p], p))

    def cheaper(a: int, b: int) -> int:
        return a if (f[a], a) <= (f[b], b) else b

    bars: list[BarNode] = []
    node_bars: list[list[int]] = [[] for _ in range(N)]
    for v in range(N):
        for L, acq in zip(nav.snap_levels[v], nav.snap_sets[v]):
            best = sub_min[v]
            for w in acq:
                best = cheaper(best, sub_min[w])
            node_bars[v].append(len(bars))
            bars.append(BarNode(node=v, level=L, low=best))
    cfg = t.config
    idx = FLIndex(
        costs=f,
        eps0=eps0,
        vis_factor=cfg.distance_factor,
        r0=cfg.r0,
        tau=cfg.tau,
        bars=bars,
        node_bars=node_bars,
        F=[],
        root_low=sub_min[t.root],
    )
    hi = n / eps0
    for x in range(n):
        path = idx.bar_path(st, x)
        p = next((i for i, b in enumerate(path) if f[bars[b].low] <= hi * idx.vis(bars[b].level)), None)
        if p is None:
            idx.F.append([])
            continue
        q = next(
            (i for i in range(p, len(path)) if f[bars[path[i]].low] <= eps0 * idx.vis(bars[path[i]].level)),
            len(path) - 1,
        )
        idx.F.append(path[p : q + 1])
    return idx


def candidate_facilities(idx: FLIndex, cities) -> list[int]:
    """``F(C)``: union of ``F_k(c)`` over the cities plus the cheapest point overall."""
    cities = sorted(set(int(c) for c in cities))
    k = len(cities)
    out = {idx.root_low}
    for c in cities:
        out.update(idx.facilities_for(c, k))
    return sorted(out)


def fl_query_unrestricted(st: Structure, idx: FLIndex, cities) -> FLSolution:
    cities = sorted(set(int(c) for c in cities))
    if not cities:
        raise EmptyQuery("no cities given")
    for c in cities:
        if not 0 <= c < st.n:
            raise UnknownPoint(c)
    cand = candidate_facilities(idx, cities)
    cand = [x for x in cand if np.isfinite(idx.costs[x])]
    if not cand:
        raise NoFacilities("every point has infinite opening cost")
    S = sorted(set(cities) | set(cand))
    sp = build_pseudospanner(st.extract(S), st.config)
    return facility_location_restricted(sp, cities, cand, [float(idx.costs[x]) for x in cand])


def reduction_factor(tau: float, knows_factor: float, eps0: float) -> float:
    """Cost factor between the best solution over ``F(C)`` and the global optimum."""
    return max(1.0 + 2.0 * eps0 * tau, 1.0 + tau * (1.0 + eps0) * knows_factor)
