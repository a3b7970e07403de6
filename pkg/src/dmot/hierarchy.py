"""Compressed hierarchy: one node per distinct set, plus the meetings between them.

Nodes ``0..n-1`` are the leaves (node id = point id). Every node stores its
birth level, parent and children; a node is alive on ``[level(v), level(parent))``.
A meeting ``(a, b, j)`` says the two sets first know each other at level ``j``.
Each meeting is filed in the responsibility dictionary of the endpoint whose
parent is born first (both endpoints on ties), so a know query touches two
small dictionaries.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLevel, InvalidNode
from .partition import PartitionConfig, PartitionTree, level_radius

INF_LEVEL = np.iinfo(np.int64).max


def _csr(groups: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(groups) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(g) for g in groups])
    idx = np.fromiter((x for g in groups for x in g), dtype=np.int64, count=int(ptr[-1]))
    return ptr, idx


@dataclass(eq=False)
class CompressedTree:
    n: int
    config: PartitionConfig
    level: np.ndarray
    parent: np.ndarray
    child_ptr: np.ndarray
    child_idx: np.ndarray
    leader: np.ndarray
    meetings: np.ndarray  # (m, 3): a, b, level; a < b; sorted by (level, a, b)
    # derived, rebuilt by _index()
    node_meet_ptr: np.ndarray = field(init=False, repr=False)
    node_meet_idx: np.ndarray = field(init=False, repr=False)
    responsible: list[dict[int, int]] = field(init=False, repr=False)
    parent_level: np.ndarray = field(init=False, repr=False)
    leaf_rank: np.ndarray = field(init=False, repr=False)
    rank_lo: np.ndarray = field(init=False, repr=False)
    rank_hi: np.ndarray = field(init=False, repr=False)
    leaf_at_rank: np.ndarray = field(init=False, repr=False)
    depth: np.ndarray = field(init=False, repr=False)
    levels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._index()

    # construction helpers ------------------------------------------------
    def _index(self) -> None:
        N = self.node_count
        self.parent_level = np.full(N, INF_LEVEL, dtype=np.int64)
        has_p = self.parent >= 0
        self.parent_level[has_p] = self.level[self.parent[has_p]]

        m = self.meetings
        k = len(m)
        owner = np.concatenate([m[:, 0], m[:, 1]])
        partner = np.concatenate([m[:, 1], m[:, 0]])
        mid = np.concatenate([np.arange(k), np.arange(k)])
        order = np.lexsort((partner, m[mid, 2], owner))
        self.node_meet_idx = mid[order]
        self.node_meet_ptr = np.zeros(N + 1, dtype=np.int64)
        self.node_meet_ptr[1:] = np.cumsum(np.bincount(owner, minlength=N))

        self.responsible = [dict() for _ in range(N)]
        pl = self.parent_level
        for a, b, j in self.meetings.tolist():
            if pl[a] <= pl[b]:
                self.responsible[a][b] = j
            if pl[b] <= pl[a]:
                self.responsible[b][a] = j

        self._dfs()
        self._build_lca()
        self.levels = np.unique(np.concatenate([self.level, self.meetings[:, 2]]))
        self._levels_list = self.levels.tolist()

    def _other(self, t: int, v: int) -> int:
        a, b = int(self.meetings[t, 0]), int(self.meetings[t, 1])
        return b if a == v else a

    def _dfs(self) -> None:
        N = self.node_count
        self.leaf_rank = np.full(N, -1, dtype=np.int64)
        self.rank_lo = np.zeros(N, dtype=np.int64)
        self.rank_hi = np.zeros(N, dtype=np.int64)
        self.depth = np.zeros(N, dtype=np.int64)
        euler: list[int] = []
        first = np.zeros(N, dtype=np.int64)
        nxt = 0
        root = self.root
        stack = [(root, 0)]
        while stack:
            v, i = stack.pop()
            if i == 0:
                first[v] = len(euler)
                self.rank_lo[v] = nxt
                if v < self.n:
                    self.leaf_rank[v] = nxt
                    nxt += 1
            euler.append(v)
            kids = self.children(v)
            if i < len(kids):
                stack.append((v, i + 1))
                c = int(kids[i])
                self.depth[c] = self.depth[v] + 1
                stack.append((c, 0))
            else:
                self.rank_hi[v] = nxt - 1
        self.leaf_at_rank = np.empty(self.n, dtype=np.int64)
        self.leaf_at_rank[self.leaf_rank[: self.n]] = np.arange(self.n)
        self._euler = np.asarray(euler, dtype=np.int64)
        self._first = first

    def _build_lca(self) -> None:
        e = self._euler
        d = self.depth[e]
        m = len(e)
        table = [np.arange(m, dtype=np.int64)]
        k = 1
        while (1 << k) <= m:
            prev = table[-1]
            half = 1 << (k - 1)
            a = prev[: m - (1 << k) + 1]
            b = prev[half : half + m - (1 << k) + 1]
            table.append(np.where(d[a] <= d[b], a, b))
            k += 1
        self._sparse = table
        self._edepth = d

    # basic accessors -----------------------------------------------------
    @property
    def node_count(self) -> int:
        return len(self.level)

    @property
    def root(self) -> int:
        return self.node_count - 1

    @property
    def tau(self) -> float:
        return self.config.tau

    def radius(self, j: int) -> float:
        return level_radius(self.config.r0, self.config.tau, j)

    def check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise InvalidNode(f"node {v} does not exist")

    def children(self, v: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[v] : self.child_ptr[v + 1]]

    def is_leaf(self, v: int) -> bool:
        return v < self.n

    def alive(self, v: int, j: int) -> bool:
        return int(self.level[v]) <= j < int(self.parent_level[v])

    def rep_leaf(self, v: int) -> int:
        """Leftmost leaf below ``v``; its point id stands in for ``v`` in point queries."""
        return int(self.leaf_at_rank[self.rank_lo[v]])

    def members(self, v: int) -> np.ndarray:
        return np.sort(self.leaf_at_rank[self.rank_lo[v] : self.rank_hi[v] + 1])

    def is_ancestor(self, a: int, v: int) -> bool:
        """``a`` is ``v`` or lies above it."""
        return self.rank_lo[a] <= self.rank_lo[v] and self.rank_hi[v] <= self.rank_hi[a]

    def meetings_of(self, v: int) -> list[tuple[int, int]]:
        """``(level, partner)`` for every meeting of ``v``, sorted."""
        out = []
        for t in self.node_meet_idx[self.node_meet_ptr[v] : self.node_meet_ptr[v + 1]].tolist():
            out.append((int(self.meetings[t, 2]), self._other(t, v)))
        return out

    def acquaintances_at(self, v: int, j: int) -> list[int]:
        """Nodes other than ``v`` that ``v`` knows at level ``j`` (``v`` alive at ``j``)."""
        if not self.alive(v, j):
            raise InvalidLevel(f"node {v} is not alive at level {j}")
        return sorted(w for l, w in self.meetings_of(v) if l <= j and self.parent_level[w] > j)

    def retained_index(self, j: int) -> int:
        """Index of the largest retained level ``<= j`` (``-1`` if none)."""
        return bisect_right(self._levels_list, j) - 1

    def ancestor_at(self, v: int, j: int) -> int:
        """Plain parent walk: the ancestor of ``v`` alive at level ``j``."""
        while self.parent_level[v] <= j:
            v = int(self.parent[v])
        return v


def compress(ptree: PartitionTree) -> CompressedTree:
    """Pack the builder output into arrays and index it.

    The builder already emits one node per distinct set at its birth level,
    so compression amounts to renumbering-free packing plus the indexes.
    """
    N = ptree.node_count
    kids = [sorted(c) for c in ptree.node_children]
    child_ptr, child_idx = _csr(kids)
    m = np.array(
        [(min(a, b), max(a, b), j) for a, b, j in ptree.meetings], dtype=np.int64
    ).reshape(-1, 3)
    if len(m):
        m = m[np.lexsort((m[:, 1], m[:, 0], m[:, 2]))]
    return CompressedTree(
        n=ptree.n,
        config=ptree.config,
        level=np.asarray(ptree.node_level, dtype=np.int64),
        parent=np.asarray(ptree.node_parent, dtype=np.int64),
        child_ptr=child_ptr,
        child_idx=child_idx,
        leader=np.asarray(ptree.node_leader, dtype=np.int64),
        meetings=m,
    )


def know_query(t: CompressedTree, x: int, y: int) -> int | None:
    """Meeting level of nodes ``x`` and ``y``, or ``None`` if they never meet."""
    t.check_node(x)
    t.check_node(y)
    if x == y:
        return int(t.level[x])
    j = t.responsible[x].get(y)
    if j is None:
        j = t.responsible[y].get(x)
    return j


def lca(t: CompressedTree, u: int, v: int) -> int:
    t.check_node(u)
    t.check_node(v)
    a, b = int(t._first[u]), int(t._first[v])
    if a > b:
        a, b = b, a
    k = (b - a + 1).bit_length() - 1
    row = t._sparse[k]
    x, y = int(row[a]), int(row[b - (1 << k) + 1])
    best = x if t._edepth[x] <= t._edepth[y] else y
    return int(t._euler[best])


def responsibility_counts(t: CompressedTree) -> np.ndarray:
    return np.array([len(d) for d in t.responsible], dtype=np.int64)


def log2_ceil(n: int) -> int:
    return max(0, math.ceil(math.log2(max(n, 1))))
