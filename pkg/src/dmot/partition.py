"""Hierarchical space partition of a finite metric.

Level 0 holds singletons. Moving to level ``j`` the current leaders are
carved greedily (ascending id) into closed balls of radius ``2**-eta * r_j``
and every absorbed set joins the set of its carving centre. A set *knows*
another at level ``j`` when some pair of their points is closer than ``r_j``.

Only levels where something happens are visited: after finishing a level the
builder jumps straight to the next level at which two leaders become close
enough to merge, or two sets start to know each other. Both events are found
by walking the globally sorted list of point pairs with two pointers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigInadmissible, InvalidLevel, InvalidNode
from .metric import MetricSpace

_CHUNK = 1 << 14


@dataclass(frozen=True)
class PartitionConfig:
    tau: float = 2.0
    eta: int = 2
    r0: float | None = None
    epsilon: float | None = None

    @classmethod
    def from_epsilon(cls, epsilon: float, r0: float | None = None) -> "PartitionConfig":
        """Parameters giving ``r_j <= d <= (1+epsilon) r_j`` at the meeting level.

        ``tau = 1 + epsilon/3``; ``eta`` is the smallest value for which the
        distance bound ``(1+4c) tau`` is at most ``1 + epsilon`` (and
        ``2**-eta < epsilon**2/24``), subject to the admissibility rules.
        """
        if not 0 < epsilon < 1:
            raise ConfigInadmissible("epsilon must lie in (0, 1)")
        tau = 1.0 + epsilon / 3.0
        eta = 2
        while True:
            cfg = cls(tau=tau, eta=eta, r0=r0, epsilon=epsilon)
            if (
                2.0**-eta < epsilon**2 / 24.0
                and cfg.distance_factor <= 1.0 + epsilon
                and cfg.admissible()
            ):
                return cfg
            eta += 1

    @classmethod
    def for_spanner_epsilon(cls, epsilon: float, r0: float | None = None) -> "PartitionConfig":
        """Parameters whose spanner stretch bound ``C(eta, tau)`` is at most ``1+epsilon``."""
        if not 0 < epsilon < 1:
            raise ConfigInadmissible("epsilon must lie in (0, 1)")
        tau = 1.0 + epsilon / 3.0
        eta = 2
        while True:
            cfg = cls(tau=tau, eta=eta, r0=r0, epsilon=epsilon)
            if cfg.spanner_stretch <= 1.0 + epsilon and cfg.admissible():
                return cfg
            eta += 1

    def admissible(self) -> bool:
        t, e = self.tau, self.eta
        if e < 2 or t <= 1.0:
            return False
        return t >= 1.0 / (2.0 ** (e - 1) - 1.0) + 1.0 and t <= 2.0**e

    def validate(self) -> None:
        if not isinstance(self.eta, (int, np.integer)):
            raise ConfigInadmissible("eta must be an integer")
        if not self.admissible():
            raise ConfigInadmissible(
                f"tau={self.tau}, eta={self.eta} violates eta >= 2, "
                "tau >= 1/(2^(eta-1)-1)+1, tau <= 2^eta"
            )
        if self.r0 is not None and not self.r0 > 0:
            raise ConfigInadmissible("r0 must be positive")

    @property
    def leader_radius_factor(self) -> float:
        """``c`` with every level-j set inside ``B(leader, c * r_j)``."""
        return self.tau * 2.0**-self.eta / (self.tau - 1.0)

    @property
    def knows_factor(self) -> float:
        """``1 + 4c``: knowing sets at level j have all points within this times ``r_j``."""
        return 1.0 + 4.0 * self.leader_radius_factor

    @property
    def distance_factor(self) -> float:
        """``(1 + 4c) * tau``: the upper side of the distance sandwich."""
        return self.knows_factor * self.tau

    @property
    def spanner_stretch(self) -> float:
        t = self.tau
        return (1.0 + (t / (t - 1.0)) ** 2 * 2.0 ** (3 - self.eta)) * t

    def with_r0(self, r0: float) -> "PartitionConfig":
        return replace(self, r0=r0)


def level_radius(r0: float, tau: float, j: int) -> float:
    """``r_j``. Every module computes radii through this one expression."""
    return r0 * tau**j


def smallest_level_above(x: float, r0: float, tau: float, floor: int) -> int:
    """Smallest ``j > floor`` with ``r_j > x``."""
    j = floor + 1
    if x >= r0:
        j = max(j, int(math.floor(math.log(x / r0) / math.log(tau))) + 1)
    while j - 1 > floor and level_radius(r0, tau, j - 1) > x:
        j -= 1
    while level_radius(r0, tau, j) <= x:
        j += 1
    return j


def smallest_merge_level(x: float, r0: float, tau: float, eta: int, floor: int) -> int:
    """Smallest ``j > floor`` whose carving ball ``2**-eta r_j`` reaches distance ``x``."""
    scale = 2.0**-eta
    j = floor + 1
    if x * 2.0**eta >= r0:
        j = max(j, int(math.floor(math.log(x * 2.0**eta / r0) / math.log(tau))))
    while j - 1 > floor and level_radius(r0, tau, j - 1) * scale >= x:
        j -= 1
    while level_radius(r0, tau, j) * scale < x:
        j += 1
    return j


def carve_partition(leaders, r: float, dist, eta: int) -> list[tuple[list[int], int]]:
    """Greedy ball carving of ``leaders`` with balls of radius ``2**(-eta-1) * r``.

    Centres are taken in ascending id order; ``dist(u, v)`` gives distances.
    Returns ``(members, leader)`` pairs.
    """
    rad = 2.0 ** (-eta - 1) * r
    remaining = sorted(set(int(v) for v in leaders))
    taken: set[int] = set()
    out = []
    for v in remaining:
        if v in taken:
            continue
        taken.add(v)
        group = [v]
        for w in remaining:
            if w not in taken and dist(v, w) <= rad:
                taken.add(w)
                group.append(w)
        out.append((sorted(group), v))
    return out


@dataclass
class PartitionLevel:
    j: int
    r_j: float
    sets: list[tuple[list[int], int]]
    knows: list[list[int]]


@dataclass
class PartitionTree:
    """Output of the builder: nodes of the compressed hierarchy plus meetings.

    Nodes ``0..n-1`` are the singleton leaves (node id = point id); internal
    nodes are numbered in creation order. A node is alive on the levels
    ``[level(v), level(parent(v)))``.
    """

    n: int
    config: PartitionConfig
    node_level: list[int]
    node_parent: list[int]
    node_children: list[list[int]]
    node_leader: list[int]
    meetings: list[tuple[int, int, int]]
    event_levels: list[int]
    stats: dict = field(default_factory=dict)

    @property
    def root(self) -> int:
        return len(self.node_level) - 1

    @property
    def node_count(self) -> int:
        return len(self.node_level)

    def radius(self, j: int) -> float:
        return level_radius(self.config.r0, self.config.tau, j)

    def members(self, v: int) -> list[int]:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            if u < self.n:
                out.append(u)
            else:
                stack.extend(self.node_children[u])
        return sorted(out)

    def alive(self, v: int, j: int) -> bool:
        p = self.node_parent[v]
        return self.node_level[v] <= j and (p < 0 or j < self.node_level[p])

    def sets_at(self, j: int) -> list[int]:
        if j < 0:
            raise InvalidLevel(f"level {j} < 0")
        return [v for v in range(self.node_count) if self.alive(v, j)]

    def meeting_level(self, a: int, b: int) -> int | None:
        if not hasattr(self, "_mdict"):
            self._mdict = {}
            for x, y, l in self.meetings:
                self._mdict[(min(x, y), max(x, y))] = l
        return self._mdict.get((min(a, b), max(a, b)))

    def level_view(self, j: int) -> PartitionLevel:
        alive = self.sets_at(j)
        idx = {v: i for i, v in enumerate(alive)}
        knows: list[list[int]] = [[] for _ in alive]
        for a, b, l in self.meetings:
            if l <= j and a in idx and b in idx:
                knows[idx[a]].append(idx[b])
                knows[idx[b]].append(idx[a])
        sets = [(self.members(v), self.node_leader[v]) for v in alive]
        return PartitionLevel(j=j, r_j=self.radius(j), sets=sets, knows=[sorted(k) for k in knows])


def knows_at_level(tree: PartitionTree, j: int, a: int, b: int) -> bool:
    """Whether the sets ``a`` and ``b`` (node ids, both alive at ``j``) know each other."""
    for v in (a, b):
        if not 0 <= v < tree.node_count:
            raise InvalidNode(f"node {v} does not exist")
        if not tree.alive(v, j):
            raise InvalidLevel(f"node {v} is not a set at level {j}")
    if a == b:
        return True
    l = tree.meeting_level(a, b)
    return l is not None and l <= j


def _sorted_pairs(ms: MetricSpace):
    n = ms.n
    cond = ms.condensed()
    order = np.argsort(cond, kind="stable")
    dist = cond[order]
    del cond
    idx_dtype = np.uint16 if n <= np.iinfo(np.uint16).max else np.int32
    row_start = np.concatenate(([0], np.cumsum(np.arange(n - 1, 0, -1, dtype=np.int64))))
    first = np.empty(len(order), dtype=idx_dtype)
    second = np.empty(len(order), dtype=idx_dtype)
    step = 1 << 22
    for s in range(0, len(order), step):
        k = order[s : s + step]
        i = np.searchsorted(row_start, k, side="right") - 1
        first[s : s + step] = i
        second[s : s + step] = k - row_start[i] + i + 1
    del order
    return first, second, dist


class _Builder:
    def __init__(self, ms: MetricSpace, config: PartitionConfig):
        self.n = n = ms.n
        self.tau, self.eta, self.r0 = config.tau, config.eta, config.r0
        self.pi, self.pj, self.pd = _sorted_pairs(ms)
        self.npairs = len(self.pd)
        self.label = np.arange(n, dtype=np.int64)
        self.node_of_label = np.arange(n, dtype=np.int64)
        self.members: dict[int, np.ndarray] = {v: np.array([v], dtype=np.int64) for v in range(n)}
        self.is_leader = np.ones(n, dtype=bool)
        self.known = np.zeros((n, n), dtype=bool)
        self.node_level = [0] * n
        self.node_parent = [-1] * n
        self.node_children: list[list[int]] = [[] for _ in range(n)]
        self.node_leader = list(range(n))
        self.meetings: list[tuple[int, int, int]] = []
        self.events: list[int] = [0]
        self.kp = 0
        self.lp = 0
        self.live = n

    def radius(self, j: int) -> float:
        return level_radius(self.r0, self.tau, j)

    # pointer scans -----------------------------------------------------
    def _advance_leader(self) -> None:
        while self.lp < self.npairs:
            e = min(self.lp + _CHUNK, self.npairs)
            m = self.is_leader[self.pi[self.lp : e]] & self.is_leader[self.pj[self.lp : e]]
            hit = np.flatnonzero(m)
            if hit.size:
                self.lp += int(hit[0])
                return
            self.lp = e

    def _fresh_mask(self, s: int, e: int) -> np.ndarray:
        la = self.label[self.pi[s:e]]
        lb = self.label[self.pj[s:e]]
        return (la != lb) & ~self.known[la, lb]

    def _advance_knows(self) -> None:
        while self.kp < self.npairs:
            e = min(self.kp + _CHUNK, self.npairs)
            hit = np.flatnonzero(self._fresh_mask(self.kp, e))
            if hit.size:
                self.kp += int(hit[0])
                return
            self.kp = e

    # events ------------------------------------------------------------
    def _merge(self, j: int) -> None:
        rho = self.radius(j) * 2.0**-self.eta
        end = int(np.searchsorted(self.pd, rho, side="right"))
        a = self.pi[self.lp : end].astype(np.int64)
        b = self.pj[self.lp : end].astype(np.int64)
        m = self.is_leader[a] & self.is_leader[b]
        a, b = a[m], b[m]
        self.lp = end
        adj: dict[int, list[int]] = {}
        for x, y in zip(a.tolist(), b.tolist()):
            adj.setdefault(x, []).append(y)
            adj.setdefault(y, []).append(x)
        owner: dict[int, int] = {}
        groups: list[list[int]] = []
        for v in sorted(adj):
            if v in owner:
                continue
            owner[v] = v
            g = [v]
            for w in adj[v]:
                if w not in owner:
                    owner[w] = v
                    g.append(w)
            if len(g) > 1:
                groups.append(g)

        # new labels, then acquaintances computed against the pre-merge relation
        remap: dict[int, int] = {}
        plans = []
        for g in groups:
            labels = [int(self.label[w]) for w in g]
            keep = max(labels, key=lambda L: (len(self.members[L]), -L))
            for L in labels:
                remap[L] = keep
            plans.append((g, labels, keep))
        new_acq = []
        for g, labels, keep in plans:
            row = self.known[labels].any(axis=0)
            acq = {remap.get(t, t) for t in np.flatnonzero(row).tolist()}
            acq.discard(keep)
            new_acq.append(acq)
        fresh_nodes = {}
        for (g, labels, keep), acq in zip(plans, new_acq):
            node = len(self.node_level)
            center = g[0]
            self.node_level.append(j)
            self.node_parent.append(-1)
            self.node_leader.append(center)
            kids = sorted(int(self.node_of_label[L]) for L in labels)
            self.node_children.append(kids)
            for c in kids:
                self.node_parent[c] = node
            self.known[labels, :] = False
            self.known[:, labels] = False
            merged = np.concatenate([self.members[L] for L in labels])
            for L in labels:
                if L != keep:
                    self.label[self.members.pop(L)] = keep
            self.members[keep] = merged
            self.node_of_label[keep] = node
            for w in g[1:]:
                self.is_leader[w] = False
            fresh_nodes[keep] = node
            self.live -= len(labels) - 1
        for (g, labels, keep), acq in zip(plans, new_acq):
            node = fresh_nodes[keep]
            if acq:
                acq_arr = np.fromiter(acq, dtype=np.int64, count=len(acq))
                self.known[keep, acq_arr] = True
                self.known[acq_arr, keep] = True
            for t in sorted(acq):
                other = int(self.node_of_label[t])
                if t in fresh_nodes and other < node:
                    continue
                self.meetings.append((node, other, j))

    def _consume_knows(self, j: int) -> None:
        r = self.radius(j)
        end = int(np.searchsorted(self.pd, r, side="left"))
        s = self.kp
        while s < end:
            e = min(s + _CHUNK, end)
            for t in np.flatnonzero(self._fresh_mask(s, e)).tolist():
                la = int(self.label[self.pi[s + t]])
                lb = int(self.label[self.pj[s + t]])
                if la == lb or self.known[la, lb]:
                    continue
                self.known[la, lb] = self.known[lb, la] = True
                self.meetings.append((int(self.node_of_label[la]), int(self.node_of_label[lb]), j))
            s = e
        self.kp = max(self.kp, end)

    def run(self) -> None:
        cur = 0
        while self.live > 1:
            self._advance_leader()
            self._advance_knows()
            j_merge = smallest_merge_level(float(self.pd[self.lp]), self.r0, self.tau, self.eta, cur)
            j = j_merge
            if self.kp < self.npairs:
                j = min(j, smallest_level_above(float(self.pd[self.kp]), self.r0, self.tau, cur))
            if j == j_merge:
                self._merge(j)
            if self.live > 1:
                self._consume_knows(j)
            self.events.append(j)
            cur = j


def build_partition_tree(ms: MetricSpace, config: PartitionConfig | None = None) -> PartitionTree:
    """Run the event-driven construction and return the compressed node set."""
    config = config or PartitionConfig()
    config.validate()
    if config.r0 is None:
        config = config.with_r0(ms.min_dist / 2.0)
    if not config.r0 < ms.min_dist:
        raise ConfigInadmissible(f"r0={config.r0} must be below the minimum distance {ms.min_dist}")
    b = _Builder(ms, config)
    b.run()
    stats = {"events": len(b.events), "pairs": b.npairs}
    tree = PartitionTree(
        n=ms.n,
        config=config,
        node_level=b.node_level,
        node_parent=b.node_parent,
        node_children=b.node_children,
        node_leader=b.node_leader,
        meetings=b.meetings,
        event_levels=sorted(set(b.events)),
        stats=stats,
    )
    return tree
