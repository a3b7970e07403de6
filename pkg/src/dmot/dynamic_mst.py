"""Layered spanning trees over a point set ``X``, static and under updates.

A root ``r`` is drawn from ``X``; every other point ``x`` goes to layer
``i = meet(x, r) - 1``, so ``r_i <= d(x, r) <= D r_i`` with
``D = config.distance_factor``. Inside a layer each point joins one bucket
per pair ``(l, S)`` where ``l`` runs over a window of levels and ``S`` is the
set of its ancestor at ``l`` or a set that ancestor knows. Members of a bucket
are chained by a path whose edges weigh ``2 D r_{l-1}``, an upper bound on the
distance between any two of them. A layer's tree is the MST of those paths;
the whole tree adds one connector edge per layer to the root.

Only the persisted structure is consulted, never the metric.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .errors import AlreadyPresent, EmptyX, NotPresent, UnknownPoint
from .partition import PartitionConfig, level_radius
from .structure import Structure

Edge = tuple[int, int, float]


def window_span(tau: float, k: int) -> int:
    """``ceil(log_tau k)``, the number of levels the window reaches below a layer."""
    if k <= 1:
        return 0
    return math.ceil(math.log(k) / math.log(tau) - 1e-12)


def window_reach(config: PartitionConfig) -> int:
    """``ceil(log_tau(2 D))``, how far above ``i + 1`` the window goes."""
    return math.ceil(math.log(2.0 * config.distance_factor) / math.log(config.tau) - 1e-12)


def layer_count_factor(config: PartitionConfig) -> int:
    """``m = ceil(log_tau(1 + D))``."""
    return math.ceil(math.log(1.0 + config.distance_factor) / math.log(config.tau) - 1e-12)


def static_bound(config: PartitionConfig) -> float:
    """Weight bound of the static layered tree relative to the exact MST.

    Connectors cost at most ``D tau/(tau-1) OPT``; the layer trees at most
    ``2D (sum r_i + sum OPT_i)`` with ``sum r_i <= tau/(tau-1) OPT`` and
    ``sum OPT_i <= 4 m (1 + D) OPT``.
    """
    D, tau = config.distance_factor, config.tau
    g = tau / (tau - 1.0)
    m = layer_count_factor(config)
    return 3.0 * D * g + 8.0 * D * m * (1.0 + D)


def dynamic_bound(config: PartitionConfig) -> float:
    """As :func:`static_bound` while ``k`` stays below twice the ``k`` the window was sized for."""
    D, tau = config.distance_factor, config.tau
    g = tau / (tau - 1.0)
    m = layer_count_factor(config)
    return 5.0 * D * g + 8.0 * D * m * (1.0 + D)


def kruskal_inherit(vertices, edges) -> list[Edge]:
    """Kruskal over ``edges`` already in nondecreasing weight order.

    Components are kept as an id per vertex plus member lists; a union
    relabels the smaller side, so each vertex changes id ``O(log k)`` times.
    """
    comp = {v: v for v in vertices}
    members = {v: [v] for v in vertices}
    out = []
    for u, v, w in edges:
        a, b = comp[u], comp[v]
        if a == b:
            continue
        if len(members[a]) < len(members[b]):
            a, b = b, a
        for x in members[b]:
            comp[x] = a
        members[a].extend(members.pop(b))
        out.append((u, v, w))
    return out


class MstEngine(Protocol):
    """Maintains a minimum spanning forest of a graph under edge updates."""

    def add_edge(self, key, u: int, v: int, w: float) -> None: ...

    def remove_edge(self, key) -> None: ...

    def add_vertex(self, v: int) -> None: ...

    def remove_vertex(self, v: int) -> None: ...

    def forest(self) -> list[Edge]: ...


class RecomputeEngine:
    """Recomputes the forest from all edges whenever it is asked after a change.

    Edge keys sort in weight order, so sorting keys is the bucket-ordered scan.
    """

    def __init__(self):
        self.vertices: set[int] = set()
        self.edges: dict = {}
        self._cache: list[Edge] | None = []
        self.recomputes = 0

    def add_vertex(self, v):
        self.vertices.add(v)
        self._cache = None

    def remove_vertex(self, v):
        self.vertices.discard(v)
        self._cache = None

    def add_edge(self, key, u, v, w):
        self.edges[key] = (u, v, w)
        self._cache = None

    def remove_edge(self, key):
        del self.edges[key]
        self._cache = None

    def forest(self) -> list[Edge]:
        if self._cache is None:
            self.recomputes += 1
            ordered = (self.edges[k] for k in sorted(self.edges))
            self._cache = kruskal_inherit(sorted(self.vertices), ordered)
        return self._cache


class _Bucket:
    """Members of one bucket chained in insertion order."""

    __slots__ = ("prev", "next", "tail")

    def __init__(self):
        self.prev: dict[int, int | None] = {}
        self.next: dict[int, int | None] = {}
        self.tail: int | None = None

    def __len__(self):
        return len(self.prev)

    def order(self) -> list[int]:
        if self.tail is None:
            return []
        out, x = [], self.tail
        while x is not None:
            out.append(x)
            x = self.prev[x]
        return out[::-1]


@dataclass
class Layer:
    index: int
    engine: MstEngine
    members: set[int] = field(default_factory=set)
    buckets: dict[tuple[int, int], _Bucket] = field(default_factory=dict)
    occurrences: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def membership(self) -> int:
        return sum(len(b) for b in self.buckets.values())


@dataclass
class RebuildEvent:
    op: int
    reason: str  # "drift", "root" or "start"
    k_before: int
    k_after: int
    ops_since: int  # operations since the previous rebuild


class DynamicMST:
    """Approximate MST of a changing subset ``X`` of the preprocessed points."""

    def __init__(
        self,
        st: Structure,
        *,
        seed: int = 0,
        engine_factory: Callable[[], MstEngine] = RecomputeEngine,
    ):
        self.st = st
        self.config = st.config
        self.seed = seed
        self.rng = random.Random(seed)
        self.engine_factory = engine_factory
        self.points: set[int] = set()
        self.root: int | None = None
        self.k0 = 0
        self.layers: dict[int, Layer] = {}
        self.layer_of: dict[int, int] = {}
        self.ops = 0
        self.ops_since_rebuild = 0
        self.rebuilds: list[RebuildEvent] = []
        self._D = self.config.distance_factor
        self._reach = window_reach(self.config)

    # sizes and levels --------------------------------------------------
    @property
    def k(self) -> int:
        return len(self.points)

    def radius(self, j: int) -> float:
        return level_radius(self.config.r0, self.config.tau, j)

    def window(self, i: int) -> tuple[int, int]:
        """Bucket levels for layer ``i`` under the current ``k0``."""
        lo = max(0, i - window_span(self.config.tau, self.k0) + 1)
        return lo, i + 1 + self._reach

    def path_weight(self, l: int) -> float:
        return 2.0 * self._D * self.radius(l - 1)

    def connector_weight(self, i: int) -> float:
        return self._D * self.radius(i)

    # layer bookkeeping -------------------------------------------------
    def _check_point(self, x: int) -> None:
        if not 0 <= x < self.st.n:
            raise UnknownPoint(x)

    def _buckets_of(self, x: int, i: int) -> list[tuple[int, int]]:
        lo, hi = self.window(i)
        out = []
        for l, own, acq in self.st.nav.known_sets_by_level(x, lo, hi, anchor=i + 1):
            out.append((l, own))
            out.extend((l, s) for s in acq)
        return out

    def _place(self, x: int) -> None:
        i = self.st.meet(x, self.root) - 1
        layer = self.layers.get(i)
        if layer is None:
            layer = self.layers[i] = Layer(index=i, engine=self.engine_factory())
        layer.members.add(x)
        layer.engine.add_vertex(x)
        self.layer_of[x] = i
        occ = layer.occurrences[x] = self._buckets_of(x, i)
        for key in occ:
            b = layer.buckets.get(key)
            if b is None:
                b = layer.buckets[key] = _Bucket()
            last = b.tail
            b.prev[x], b.next[x] = last, None
            if last is not None:
                b.next[last] = x
                layer.engine.add_edge((key, last, x), last, x, self.path_weight(key[0]))
            b.tail = x

    def _unplace(self, x: int) -> None:
        i = self.layer_of.pop(x)
        layer = self.layers[i]
        for key in layer.occurrences.pop(x):
            b = layer.buckets[key]
            p, q = b.prev.pop(x), b.next.pop(x)
            w = self.path_weight(key[0])
            if p is not None:
                layer.engine.remove_edge((key, p, x))
                b.next[p] = q
            if q is not None:
                layer.engine.remove_edge((key, x, q))
                b.prev[q] = p
            else:
                b.tail = p
            if p is not None and q is not None:
                layer.engine.add_edge((key, p, q), p, q, w)
            if not b.prev:
                del layer.buckets[key]
        layer.members.discard(x)
        layer.engine.remove_vertex(x)
        if not layer.members:
            del self.layers[i]

    # updates -----------------------------------------------------------
    def rebuild(self, reason: str = "start") -> None:
        before = self.k0
        self.layers.clear()
        self.layer_of.clear()
        self.k0 = self.k
        self.root = self.rng.choice(sorted(self.points)) if self.points else None
        for x in sorted(self.points):
            if x != self.root:
                self._place(x)
        self.rebuilds.append(
            RebuildEvent(op=self.ops, reason=reason, k_before=before, k_after=self.k, ops_since=self.ops_since_rebuild)
        )
        self.ops_since_rebuild = 0

    def needs_rebuild(self) -> bool:
        k, k0 = self.k, self.k0
        if k == 0:
            return False
        return k >= 2 * k0 or 2 * k <= k0

    def maybe_rebuild(self) -> bool:
        if self.needs_rebuild():
            self.rebuild("drift")
            return True
        return False

    def insert(self, x: int) -> None:
        x = int(x)
        self._check_point(x)
        if x in self.points:
            raise AlreadyPresent(x)
        self.ops += 1
        self.ops_since_rebuild += 1
        self.points.add(x)
        if self.root is None:
            self.rebuild("start")
            return
        if not self.maybe_rebuild():
            self._place(x)

    def delete(self, x: int) -> None:
        x = int(x)
        self._check_point(x)
        if x not in self.points:
            raise NotPresent(x)
        self.ops += 1
        self.ops_since_rebuild += 1
        self.points.remove(x)
        if x == self.root:
            self.root = None
            if self.points:
                self.rebuild("root")
            else:
                self.layers.clear()
                self.layer_of.clear()
                self.k0 = 0
            return
        self._unplace(x)
        self.maybe_rebuild()

    # results -----------------------------------------------------------
    def connectors(self) -> list[Edge]:
        return [
            (min(L.members), self.root, self.connector_weight(i))
            for i, L in sorted(self.layers.items())
        ]

    def edges(self) -> list[Edge]:
        out = []
        for i in sorted(self.layers):
            out.extend(self.layers[i].engine.forest())
        out.extend(self.connectors())
        return out

    def weight(self) -> float:
        """Total of the auxiliary weights; each one bounds its true distance from above."""
        return math.fsum(w for _, _, w in self.edges())

    def bucket_membership(self) -> dict[int, int]:
        return {i: L.membership() for i, L in self.layers.items()}

    def check(self) -> None:
        """Raise ``AssertionError`` unless the edges form a spanning tree of ``X``."""
        X = self.points
        E = self.edges()
        if not X:
            assert not E, "edges in an empty state"
            return
        assert len(E) == len(X) - 1, f"{len(E)} edges for {len(X)} points"
        assert set(self.layer_of) == X - {self.root}, "layers do not partition X minus the root"
        parent = {x: x for x in X}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v, _ in E:
            assert u in X and v in X, f"edge ({u}, {v}) leaves X"
            a, b = find(u), find(v)
            assert a != b, f"edge ({u}, {v}) closes a cycle"
            parent[a] = b


@dataclass
class LayeredTree:
    root: int
    edges: list[Edge]
    weight: float
    layers: dict[int, list[int]]
    state: DynamicMST


def static_layered_mst(
    st: Structure,
    X,
    *,
    seed: int = 0,
    root: int | None = None,
    window_k: int | None = None,
    engine_factory: Callable[[], MstEngine] = RecomputeEngine,
) -> LayeredTree:
    """Layered spanning tree of ``X`` built in one pass.

    ``root`` fixes the root instead of drawing it; ``window_k`` sizes the
    bucket window for a different ``k`` (used to compare with a dynamic state).
    """
    pts = sorted(set(int(x) for x in X))
    if not pts:
        raise EmptyX("X is empty")
    state = DynamicMST(st, seed=seed, engine_factory=engine_factory)
    for x in pts:
        state._check_point(x)
    state.points = set(pts)
    if root is None and window_k is None:
        state.rebuild("start")
    else:
        if root is None:
            root = state.rng.choice(pts)
        elif root not in state.points:
            raise NotPresent(root)
        state.root = root
        state.k0 = window_k if window_k is not None else len(pts)
        for x in pts:
            if x != root:
                state._place(x)
    edges = state.edges()
    return LayeredTree(
        root=state.root,
        edges=edges,
        weight=math.fsum(w for _, _, w in edges),
        layers={i: sorted(L.members) for i, L in sorted(state.layers.items())},
        state=state,
    )
