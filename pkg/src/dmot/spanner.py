"""Pseudospanner on a query set, built from its extracted subtree.

Every node of the extracted tree gets a leader point (the smallest point id
below it, which is what inheriting from the child with the smallest minimum
gives). Two kinds of edges connect leaders:

* a child's leader to its parent's leader, weight ``2 c r_L`` where ``L`` is
  the parent's level (both lie in one set of radius ``c r_L``);
* the leaders of two meeting nodes, weight ``(1 + 4c) r_J`` at the meeting
  level ``J`` (every cross pair of two knowing sets is that close).

Weights never underestimate true distances, and shortest paths overestimate
them by at most :attr:`PartitionConfig.spanner_stretch`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedSpanner, UnknownPoint
from .extraction import ExtractedTree
from .partition import PartitionConfig, level_radius


@dataclass
class Pseudospanner:
    vertices: list[int]
    edges: dict[tuple[int, int], float]
    leader_of_node: list[int]
    beaten_at: dict[int, int] = field(default_factory=dict)
    adj: dict[int, list[tuple[int, float]]] = field(init=False, repr=False)

    def __post_init__(self):
        self.adj = {v: [] for v in self.vertices}
        for (u, v), w in sorted(self.edges.items()):
            self.adj[u].append((v, w))
            self.adj[v].append((u, w))

    @property
    def k(self) -> int:
        return len(self.vertices)

    def edge_list(self) -> list[tuple[int, int, float]]:
        return [(u, v, w) for (u, v), w in sorted(self.edges.items())]

    def weight(self, u: int, v: int) -> float | None:
        return self.edges.get((u, v) if u < v else (v, u))

    def dump(self) -> str:
        return "".join(f"{u} {v} {w!r}\n" for u, v, w in self.edge_list())


def assign_leaders(et: ExtractedTree) -> tuple[list[int], dict[int, int]]:
    """Leader point per extracted node and, for each beaten point, the level it loses at."""
    leader = [0] * et.node_count
    beaten: dict[int, int] = {}
    for v in range(et.node_count):  # children precede parents
        if v < et.k:
            leader[v] = et.points[v]
            continue
        kids = et.children[v]
        best = min(kids, key=lambda c: et.members[c][0])
        leader[v] = leader[best]
        for c in kids:
            if c != best:
                beaten[leader[c]] = et.level[v]
    return leader, beaten


def build_pseudospanner(et: ExtractedTree, config: PartitionConfig) -> Pseudospanner:
    leader, beaten = assign_leaders(et)
    r0, tau = config.r0, config.tau
    c = config.leader_radius_factor
    d1 = config.knows_factor
    edges: dict[tuple[int, int], float] = {}

    def add(u: int, v: int, w: float) -> None:
        key = (u, v) if u < v else (v, u)
        old = edges.get(key)
        if old is None or w < old:
            edges[key] = w

    for v in range(et.k, et.node_count):
        w = 2.0 * c * level_radius(r0, tau, et.level[v])
        for ch in et.children[v]:
            if leader[ch] != leader[v]:
                add(leader[ch], leader[v], w)
    for a, b, j in et.meetings:
        add(leader[a], leader[b], d1 * level_radius(r0, tau, j))
    return Pseudospanner(vertices=list(et.points), edges=edges, leader_of_node=leader, beaten_at=beaten)


def spanner_shortest_paths(sp: Pseudospanner, sources) -> tuple[dict[int, dict[int, float]], dict[int, dict[int, int]]]:
    """Dijkstra from each source; returns distances and parent pointers."""
    dist_all: dict[int, dict[int, float]] = {}
    par_all: dict[int, dict[int, int]] = {}
    for s in sources:
        if s not in sp.adj:
            raise UnknownPoint(s)
        dist = {s: 0.0}
        par = {s: -1}
        done = set()
        heap = [(0.0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v, w in sp.adj[u]:
                nd = d + w
                if nd < dist.get(v, float("inf")):
                    dist[v] = nd
                    par[v] = u
                    heapq.heappush(heap, (nd, v))
        if len(done) != sp.k:
            raise DisconnectedSpanner(f"only {len(done)} of {sp.k} vertices reachable from {s}")
        dist_all[s] = dist
        par_all[s] = par
    return dist_all, par_all


def distance_matrix(sp: Pseudospanner, order=None) -> np.ndarray:
    """All-pairs ``d_H`` as a dense matrix over ``order`` (default: ``sp.vertices``)."""
    order = list(sp.vertices if order is None else order)
    dist, _ = spanner_shortest_paths(sp, order)
    return np.array([[dist[u][v] for v in order] for u in order])


def shortest_path(par: dict[int, int], target: int) -> list[int]:
    out = []
    while target != -1:
        out.append(target)
        target = par[target]
    return out[::-1]
