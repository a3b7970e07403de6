"""Heavy-path decomposition of the compressed tree and the navigation built on it.

A path is a top vertex followed by a downward chain of heavy children. Every
non-root node sits below the top of exactly one path (its *interior* path),
so any root walk is a sequence of path interiors. ``paths(v)`` lists those
paths for the walk from ``v``, each with the level at which the walk enters.

Three queries live here:

* :meth:`PathIndex.meet` - lowest level at which the ancestors of two nodes
  know each other, by binary search over ``paths(u)`` and ``paths(v)``;
* :meth:`PathIndex.meeting_jump` - first meeting at level ``>= i`` on a walk;
* :meth:`PathIndex.level_ancestor_jump` - deepest ancestor with level
  ``<= j``, using ``p``/``s`` path pointers and a per-path y-fast trie.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPoint, InvalidRange, NoMeetingAbove
from .hierarchy import CompressedTree
from .yfast import YFastTrie, bits_for

ROOT = -1  # sentinel path above the topmost paths
_INF = float("inf")


def skip_base(n: int) -> int:
    """``x = max(1, ceil(log2 log2 n))``."""
    if n <= 2:
        return 1
    return max(1, math.ceil(math.log2(math.log2(n))))


@dataclass
class JumpStats:
    phase1: int = 0
    phase2: int = 0
    phase3: int = 0

    @property
    def total(self) -> int:
        return self.phase1 + self.phase2 + self.phase3


class PathIndex:
    def __init__(self, tree: CompressedTree):
        self.tree = t = tree
        N = t.node_count
        self.level = t.level.tolist()
        self.parent = t.parent.tolist()
        self.parent_level = [x if x != np.iinfo(np.int64).max else _INF for x in t.parent_level.tolist()]
        self.root = t.root
        self.rank_lo = t.rank_lo.tolist()
        self.rank_hi = t.rank_hi.tolist()
        self.x = skip_base(t.n)
        self._decompose()
        self._walks()
        self._pointers()
        self._path_meetings()
        self._tries()
        self._snapshots()
        self.last_jump = JumpStats()

    # construction -------------------------------------------------------
    def _decompose(self) -> None:
        t = self.tree
        N = t.node_count
        size = [1] * N
        for v in range(N):  # children always have smaller ids than parents
            p = self.parent[v]
            if p >= 0:
                size[p] += size[v]
        self.size = size
        heavy = [-1] * N
        for v in range(t.n, N):
            kids = t.children(v).tolist()
            heavy[v] = max(kids, key=lambda c: (size[c], -c))
        self.heavy = heavy

        self.path_vertices: list[list[int]] = []
        self.path_of = [ROOT] * N
        # every child of the root opens a path whose top is the root
        stack = [(t.root, c) for c in reversed(t.children(t.root).tolist())]
        while stack:
            top, v = stack.pop()
            pid = len(self.path_vertices)
            chain = [top]
            while v >= 0:
                chain.append(v)
                self.path_of[v] = pid
                for c in t.children(v).tolist():
                    if c != heavy[v]:
                        stack.append((v, c))
                v = heavy[v]
            self.path_vertices.append(chain)
        P = len(self.path_vertices)
        self.path_top = [pv[0] for pv in self.path_vertices]
        self.toplev = [self.level[v] for v in self.path_top]

    def _walks(self) -> None:
        """``paths(v)`` as parallel lists sorted by level, plus entry dictionaries."""
        t = self.tree
        N = t.node_count
        self.walk_paths: list[list[int]] = [[] for _ in range(N)]
        self.walk_top: list[list[int]] = [[] for _ in range(N)]
        self.walk_entry: list[dict[int, int]] = [dict() for _ in range(N)]
        # process top-down so a node reuses the walk above its path's top
        order = sorted(range(N), key=lambda v: -self.level[v])
        for v in order:
            if v == t.root:
                continue
            pid = self.path_of[v]
            top = self.path_top[pid]
            self.walk_paths[v] = [pid] + self.walk_paths[top]
            self.walk_top[v] = [self.toplev[pid]] + self.walk_top[top]
            self.walk_entry[v] = {pid: self.level[v], **self.walk_entry[top]}

    def _pointers(self) -> None:
        root = self.tree.root
        P = len(self.path_vertices)
        self.p_ptr = [ROOT if self.path_top[q] == root else self.path_of[self.path_top[q]] for q in range(P)]
        self.depth = [0] * P
        order = sorted(range(P), key=lambda q: -self.toplev[q])
        for q in order:
            if self.p_ptr[q] != ROOT:
                self.depth[q] = self.depth[self.p_ptr[q]] + 1
        x = self.x
        self.s_ptr = [ROOT] * P
        for q in range(P):
            steps = x * (1 << (self.depth[q] % x))
            cur = q
            for _ in range(steps):
                cur = self.p_ptr[cur]
                if cur == ROOT:
                    break
            self.s_ptr[q] = cur

    def _path_meetings(self) -> None:
        """Lowest meeting level between interiors of two paths; filed by top level."""
        P = len(self.path_vertices)
        best: dict[tuple[int, int], int] = {}
        for a, b, j in self.tree.meetings.tolist():
            pa, pb = self.path_of[a], self.path_of[b]
            key = (pa, pb) if pa < pb else (pb, pa)
            if key not in best or j < best[key]:
                best[key] = j
        self.path_meet: list[dict[int, int]] = [dict() for _ in range(P)]
        for (pa, pb), j in best.items():
            if self.toplev[pa] <= self.toplev[pb]:
                self.path_meet[pa][pb] = j
            if self.toplev[pb] <= self.toplev[pa]:
                self.path_meet[pb][pa] = j
        # what the highest interior vertex of each path knows just before it dies
        self.final_acq: list[tuple[int, ...]] = []
        for q in range(P):
            s = self.path_vertices[q][1]
            end = self.parent_level[s]
            self.final_acq.append(
                tuple(w for _, w in self.tree.meetings_of(s) if self.parent_level[w] >= end)
            )
        self._acq_reach()

    def _acq_reach(self) -> None:
        """Per path: highest level of the top interior vertex or its final acquaintances, by path."""
        self.acq_reach: list[dict[int, int]] = []
        self.acq_hits_root: list[bool] = []
        for q, acq in enumerate(self.final_acq):
            reach: dict[int, int] = {}
            hits = False
            for y in (self.path_vertices[q][1], *acq):
                if y == self.root:
                    hits = True
                    continue
                p = self.path_of[y]
                if reach.get(p, -1) < self.level[y]:
                    reach[p] = self.level[y]
            self.acq_reach.append(reach)
            self.acq_hits_root.append(hits)

    def _tries(self) -> None:
        t = self.tree
        self.levels = t.levels.tolist()
        self.level_rank = {l: i for i, l in enumerate(self.levels)}
        self.meet_levels = np.unique(t.meetings[:, 2]).tolist()
        meet_rank = {l: i for i, l in enumerate(self.meet_levels)}
        lbits = bits_for(len(self.levels))
        mbits = bits_for(max(1, len(self.meet_levels)))
        self.level_trie: list[YFastTrie] = []
        self.level_vertex: list[dict[int, int]] = []
        self.meet_trie: list[YFastTrie] = []
        self.meet_at: list[dict[int, list[tuple[int, int]]]] = []
        for chain in self.path_vertices:
            interior = chain[1:]
            ranks = {self.level_rank[self.level[v]]: v for v in interior}
            self.level_vertex.append(ranks)
            self.level_trie.append(YFastTrie(lbits, ranks.keys()))
            at: dict[int, list[tuple[int, int]]] = {}
            for v in interior:
                for l, w in t.meetings_of(v):
                    at.setdefault(meet_rank[l], []).append((w, v))
            for lst in at.values():
                lst.sort()
            self.meet_at.append(at)
            self.meet_trie.append(YFastTrie(mbits, at.keys()))

    def _snapshots(self) -> None:
        """Acquaintances of every node at its birth and after each of its meetings."""
        t = self.tree
        N = t.node_count
        self.snap_levels: list[list[int]] = [[] for _ in range(N)]
        self.snap_sets: list[list[tuple[int, ...]]] = [[] for _ in range(N)]
        for v in range(N):
            ms = t.meetings_of(v)
            points = sorted({self.level[v]} | {l for l, _ in ms})
            for L in points:
                acq = tuple(sorted(w for l, w in ms if l <= L and self.parent_level[w] > L))
                self.snap_levels[v].append(L)
                self.snap_sets[v].append(acq)

    # helpers ------------------------------------------------------------
    def _leaf(self, u: int) -> int:
        if not 0 <= u < self.tree.n:
            raise InvalidPoint(f"point {u} outside [0, {self.tree.n})")
        return u

    def on_walk(self, v: int, y: int) -> bool:
        """Is node ``y`` on the walk from node ``v`` to the root?"""
        if y == self.root:
            return True
        e = self.walk_entry[v].get(self.path_of[y])
        return e is not None and self.level[y] >= e

    def _first_true(self, u: int, v: int) -> int:
        """Lowest index ``k`` into ``paths(u)`` whose top level exceeds ``meet(u, v)``."""
        wp = self.walk_paths[u]
        walk = self.walk_entry[v].items()
        reach, hits_root = self.acq_reach, self.acq_hits_root
        lo, hi = 0, len(wp)
        while lo < hi:
            mid = (lo + hi) // 2
            q = wp[mid]
            ok = hits_root[q]
            if not ok:
                rq = reach[q]
                for p, e in walk:
                    top = rq.get(p)
                    if top is not None and top >= e:
                        ok = True
                        break
            if ok:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def path_meeting(self, pa: int, pb: int) -> int | None:
        j = self.path_meet[pa].get(pb)
        if j is None:
            j = self.path_meet[pb].get(pa)
        return j

    # queries ------------------------------------------------------------
    def meet_nodes(self, u: int, v: int) -> int:
        """Lowest level ``j >= level(u), level(v)`` where the ancestors of ``u`` and ``v`` know each other."""
        t = self.tree
        if u == v:
            return self.level[u]
        lo, hi = self.rank_lo, self.rank_hi
        if (lo[u] <= lo[v] and hi[v] <= hi[u]) or (lo[v] <= lo[u] and hi[u] <= hi[v]):
            return max(self.level[u], self.level[v])
        ku = self._first_true(u, v)
        kv = self._first_true(v, u)
        wu, wv = self.walk_paths[u], self.walk_paths[v]
        if ku == len(wu) or kv == len(wv):
            return self.level[t.root]
        ju = self.level[u] if ku == 0 else self.walk_top[u][ku - 1]
        jv = self.level[v] if kv == 0 else self.walk_top[v][kv - 1]
        pa, pb = wu[ku], wv[kv]
        if pa == pb:
            return max(ju, jv)
        pm = self.path_meeting(pa, pb)
        if pm is None:  # pragma: no cover - impossible for a valid path decomposition
            raise AssertionError(f"paths {pa} and {pb} never meet")
        return max(ju, jv, pm)

    def meet(self, u: int, v: int) -> int:
        """``meet`` on point ids."""
        return self.meet_nodes(self._leaf(u), self._leaf(v))

    def level_ancestor_jump_node(self, v: int, j: int) -> int:
        t = self.tree
        stats = self.last_jump = JumpStats()
        if j < self.level[v]:
            return v
        if j >= self.level[t.root] or v == t.root:
            return t.root
        pi = self.path_of[v]
        toplev, p_ptr, s_ptr, depth, x = self.toplev, self.p_ptr, self.s_ptr, self.depth, self.x
        # phase 1: climb to a path whose depth is x-1 modulo x
        while toplev[pi] <= j and depth[pi] % x != x - 1:
            pi = p_ptr[pi]
            stats.phase1 += 1
        # phase 2: doubling jumps through s pointers
        if toplev[pi] <= j:
            for _ in range(x):
                s = s_ptr[pi]
                stats.phase2 += 1
                if s != ROOT and toplev[s] <= j:
                    pi = p_ptr[s]
                elif toplev[pi] <= j:
                    pi = p_ptr[pi]
                else:
                    break
        # phase 3: final single steps
        while toplev[pi] <= j:
            pi = p_ptr[pi]
            stats.phase3 += 1
        r = self.level_trie[pi].predecessor(bisect_right(self.levels, j) - 1)
        return self.level_vertex[pi][r]

    def level_ancestor_jump(self, v: int, j: int) -> int:
        """Deepest ancestor of point ``v``'s leaf whose level is at most ``j``."""
        return self.level_ancestor_jump_node(self._leaf(v), j)

    def meeting_jump_node(self, v: int, i: int) -> tuple[int, int, int]:
        """First meeting ``(S, partner, level)`` of a set on ``v``'s walk with level ``>= i``."""
        wp, wt = self.walk_paths[v], self.walk_top[v]
        k = bisect_right(wt, i)
        for idx in range(k, len(wp)):
            q = wp[idx]
            # vertices of q below the walk's entry point are dead above it
            entry = self.level[v] if idx == 0 else wt[idx - 1]
            hit = self.meet_trie[q].successor(bisect_left(self.meet_levels, max(i, entry)))
            if hit is not None:
                w, s = self.meet_at[q][hit][0]
                return s, w, self.meet_levels[hit]
        raise NoMeetingAbove(f"no meeting at level >= {i} above node {v}")

    def meeting_jump(self, v: int, i: int) -> tuple[int, int, int]:
        return self.meeting_jump_node(self._leaf(v), i)

    def snapshot(self, a: int, j: int) -> tuple[int, ...]:
        """Acquaintances of node ``a`` at level ``j`` (``a`` alive at ``j``)."""
        levels = self.snap_levels[a]
        return self.snap_sets[a][bisect_right(levels, j) - 1]

    def _descend(self, a: int, leaf: int, j: int) -> int:
        """From ancestor ``a`` of ``leaf`` go down to the node alive at ``j``."""
        t = self.tree
        rank = int(t.leaf_rank[leaf])
        while self.level[a] > j:
            kids = t.children(a)
            los = t.rank_lo[kids]
            a = int(kids[np.searchsorted(los, rank, side="right") - 1])
        return a

    def known_sets_in_range(
        self, x: int, i: int, j: int, anchor: int | None = None
    ) -> list[tuple[int, int, tuple[int, ...]]]:
        """Acquaintances of ``x``'s ancestors over levels ``[i, j]``.

        Returns ``(level, own set, known sets)`` entries, one per level where
        the answer changes; the first entry is at level ``i``.
        """
        self._leaf(x)
        if i < 0 or i > j:
            raise InvalidRange(f"bad level range [{i}, {j}]")
        if anchor is None:
            a = self.level_ancestor_jump_node(x, i)
        else:
            a = self.level_ancestor_jump_node(x, anchor)
            a = self._descend(a, x, i)
        out = []
        cur = i
        root = self.tree.root
        while cur <= j:
            end = min(j, self.parent_level[a] - 1) if a != root else j
            out.append((cur, a, self.snapshot(a, cur)))
            levels = self.snap_levels[a]
            for L in levels[bisect_right(levels, cur) :]:
                if L > end:
                    break
                out.append((L, a, self.snap_sets[a][bisect_right(levels, L) - 1]))
            if a == root:
                break
            cur = end + 1
            a = self.parent[a]
        return out

    def known_sets_by_level(self, x: int, i: int, j: int, anchor: int | None = None):
        """Expand :meth:`known_sets_in_range` to one ``(level, own, known)`` per integer level."""
        entries = self.known_sets_in_range(x, i, j, anchor)
        out = []
        for k, (L, a, acq) in enumerate(entries):
            stop = entries[k + 1][0] if k + 1 < len(entries) else j + 1
            for l in range(L, stop):
                out.append((l, a, acq))
        return out

    def paths_crossed(self, v: int) -> int:
        return len(self.walk_paths[v])

    def entry_count(self) -> int:
        return sum(len(w) for w in self.walk_paths)
