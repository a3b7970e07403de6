"""Approximation algorithms that run on a pseudospanner.

All of them see only the spanner graph ``H`` and its weights, so every cost
reported here is measured in ``d_H``. Because ``d <= d_H <= C d``, a
``rho``-approximation in ``H`` is a ``rho * C`` approximation in the metric.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import EndpointNotInQuery, InvalidR, NoFacilities
from .spanner import Pseudospanner, spanner_shortest_paths

GREEDY_FL_RATIO = 1.861


@dataclass
class TreeSolution:
    edges: list[tuple[int, int, float]]
    weight: float
    vertices: list[int] = field(default_factory=list)


@dataclass
class Tour:
    order: list[int]
    length: float


@dataclass
class CenterSet:
    centers: list[int]
    assignment: dict[int, int]
    radius: float


@dataclass
class FLSolution:
    open: list[int]
    assignment: dict[int, int]
    opening_cost: float
    connection_cost: float

    @property
    def cost(self) -> float:
        return self.opening_cost + self.connection_cost


class _DSU:
    def __init__(self, items):
        self.p = {x: x for x in items}
        self.size = {x: 1 for x in items}

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.p[b] = a
        self.size[a] += self.size[b]
        return True


def approx_mst(sp: Pseudospanner) -> TreeSolution:
    """Kruskal on ``H``."""
    dsu = _DSU(sp.vertices)
    out = []
    total = 0.0
    for u, v, w in sorted(sp.edge_list(), key=lambda e: (e[2], e[0], e[1])):
        if dsu.union(u, v):
            out.append((u, v, w))
            total += w
    return TreeSolution(edges=out, weight=total, vertices=list(sp.vertices))


def _dh_between(sp: Pseudospanner, a: int, b: int) -> float:
    """``d_H(a, b)`` by Dijkstra stopped at ``b``."""
    if a == b:
        return 0.0
    dist = {a: 0.0}
    heap = [(0.0, a)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u == b:
            return d
        if u in done:
            continue
        done.add(u)
        for v, w in sp.adj[u]:
            nd = d + w
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    raise AssertionError("spanner is disconnected")


def tsp_tour(sp: Pseudospanner) -> Tour:
    """Preorder walk of the MST of ``H`` (shortcut doubled tree); length in ``d_H``."""
    mst = approx_mst(sp)
    adj: dict[int, list[int]] = {v: [] for v in sp.vertices}
    for u, v, _ in mst.edges:
        adj[u].append(v)
        adj[v].append(u)
    start = min(sp.vertices)
    order, seen, stack = [], {start}, [start]
    while stack:
        u = stack.pop()
        order.append(u)
        for v in sorted(adj[u], reverse=True):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    k = len(order)
    length = 0.0 if k < 2 else sum(_dh_between(sp, order[i], order[(i + 1) % k]) for i in range(k))
    return Tour(order=order, length=length)


def steiner_tree(sp: Pseudospanner) -> TreeSolution:
    """Spanning tree of the terminals in ``H``; terminals are all of the query set."""
    return approx_mst(sp)


def steiner_forest(sp: Pseudospanner, pairs) -> TreeSolution:
    """Primal-dual (Goemans-Williamson) forest on ``H`` with reverse-delete pruning."""
    verts = set(sp.vertices)
    pairs = [(int(a), int(b)) for a, b in pairs]
    for a, b in pairs:
        if a not in verts or b not in verts:
            raise EndpointNotInQuery(f"pair ({a}, {b}) not inside the query set")
    pairs = [(a, b) for a, b in pairs if a != b]
    if not pairs:
        return TreeSolution(edges=[], weight=0.0)
    edges = sp.edge_list()
    dsu = _DSU(sp.vertices)
    load = [0.0] * len(edges)
    chosen: list[int] = []

    def active_roots() -> set:
        out = set()
        for a, b in pairs:
            ra, rb = dsu.find(a), dsu.find(b)
            if ra != rb:
                out.add(ra)
                out.add(rb)
        return out

    active = active_roots()
    while active:
        best, best_t = -1, float("inf")
        for i, (u, v, w) in enumerate(edges):
            ru, rv = dsu.find(u), dsu.find(v)
            if ru == rv:
                continue
            rate = (ru in active) + (rv in active)
            if rate == 0:
                continue
            t = (w - load[i]) / rate
            if t < best_t:
                best, best_t = i, t
        for i, (u, v, w) in enumerate(edges):
            ru, rv = dsu.find(u), dsu.find(v)
            if ru != rv:
                load[i] += best_t * ((ru in active) + (rv in active))
        u, v, _ = edges[best]
        dsu.union(u, v)
        chosen.append(best)
        active = active_roots()
    # reverse delete: drop an edge when every pair stays connected without it
    keep = list(chosen)
    for i in reversed(chosen):
        trial = [e for e in keep if e != i]
        d2 = _DSU(sp.vertices)
        for e in trial:
            d2.union(edges[e][0], edges[e][1])
        if all(d2.find(a) == d2.find(b) for a, b in pairs):
            keep = trial
    out = [edges[i] for i in sorted(keep)]
    return TreeSolution(edges=out, weight=sum(e[2] for e in out))


def k_center(sp: Pseudospanner, r: int) -> CenterSet:
    """Farthest-point greedy under ``d_H``; ``r = 1`` picks the exact 1-centre of ``d_H``."""
    k = sp.k
    if not 1 <= r <= k:
        raise InvalidR(f"r={r} not in [1, {k}]")
    verts = sorted(sp.vertices)
    if r == 1:
        dist, _ = spanner_shortest_paths(sp, verts)
        ecc = {u: max(dist[u].values()) for u in verts}
        c = min(verts, key=lambda u: (ecc[u], u))
        return CenterSet(centers=[c], assignment={v: c for v in verts}, radius=ecc[c])
    centers = [verts[0]]
    dist, _ = spanner_shortest_paths(sp, [verts[0]])
    best = dict(dist[verts[0]])
    owner = {v: verts[0] for v in verts}
    while len(centers) < r:
        far = max(verts, key=lambda v: (best[v], -v))
        centers.append(far)
        d2, _ = spanner_shortest_paths(sp, [far])
        for v in verts:
            if d2[far][v] < best[v]:
                best[v] = d2[far][v]
                owner[v] = far
    return CenterSet(centers=centers, assignment=owner, radius=max(best.values()))


def greedy_facility_location(dist, cities, facilities, costs) -> FLSolution:
    """Dual-ascent greedy with switching, guarantee 1.861.

    ``dist[i][j]`` is the distance from facility ``facilities[i]`` to city
    ``cities[j]``; ``costs[i]`` may be ``inf``.
    """
    cities = list(cities)
    facilities = list(facilities)
    F, C = len(facilities), len(cities)
    if F == 0 or all(c == float("inf") for c in costs):
        raise NoFacilities("no facility with finite opening cost")
    conn_to = [-1] * C
    cur = [float("inf")] * C
    is_open = [False] * F
    t = 0.0
    eps = 1e-12
    while any(c < 0 for c in conn_to):
        best_t, kind, who = float("inf"), None, None
        # an unconnected city reaches an open facility
        for j in range(C):
            if conn_to[j] >= 0:
                continue
            for i in range(F):
                if is_open[i] and dist[i][j] < best_t:
                    best_t, kind, who = max(t, dist[i][j]), "reach", (i, j)
        # a closed facility becomes fully paid
        for i in range(F):
            if is_open[i] or costs[i] == float("inf"):
                continue
            fixed = sum(max(0.0, cur[j] - dist[i][j]) for j in range(C) if conn_to[j] >= 0)
            need = costs[i] - fixed
            ds = sorted(dist[i][j] for j in range(C) if conn_to[j] < 0)
            # find smallest T >= t with sum(max(0, T - d)) >= need
            if need <= eps:
                T = t
            else:
                T = float("inf")
                acc = 0.0
                for m, d in enumerate(ds):
                    nxt = ds[m + 1] if m + 1 < len(ds) else float("inf")
                    acc += d
                    cand = (need + acc) / (m + 1)
                    if cand <= nxt + eps and cand >= d - eps:
                        T = cand
                        break
                T = max(T, t)
            if T < best_t or (T == best_t and kind == "reach"):
                best_t, kind, who = T, "open", i
        t = best_t
        if kind == "reach":
            i, j = who
            conn_to[j], cur[j] = i, dist[i][j]
        else:
            i = who
            is_open[i] = True
            for j in range(C):
                if conn_to[j] < 0 and dist[i][j] <= t + eps:
                    conn_to[j], cur[j] = i, dist[i][j]
                elif conn_to[j] >= 0 and dist[i][j] < cur[j]:
                    conn_to[j], cur[j] = i, dist[i][j]
    opened = [i for i in range(F) if is_open[i]]
    assign = {}
    conn = 0.0
    for j in range(C):
        i = min(opened, key=lambda i: (dist[i][j], i))
        assign[cities[j]] = facilities[i]
        conn += dist[i][j]
    used = sorted(set(assign.values()))
    opening = sum(costs[facilities.index(f)] for f in used)
    return FLSolution(open=used, assignment=assign, opening_cost=opening, connection_cost=conn)


def facility_location_restricted(sp: Pseudospanner, cities, facilities, costs) -> FLSolution:
    """Greedy facility location on ``d_H`` between the given cities and facilities."""
    facilities = list(facilities)
    cities = list(cities)
    if not facilities:
        raise NoFacilities("facility set is empty")
    verts = set(sp.vertices)
    for x in list(cities) + facilities:
        if x not in verts:
            raise EndpointNotInQuery(f"point {x} not inside the query set")
    dist, _ = spanner_shortest_paths(sp, facilities)
    dmat = [[dist[f][c] for c in cities] for f in facilities]
    return greedy_facility_location(dmat, cities, facilities, list(costs))
