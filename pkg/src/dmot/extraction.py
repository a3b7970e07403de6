"""Extract the subtree induced by a query set ``S``.

The nodes of the induced tree are the non-empty sets ``A & S`` for nodes
``A`` of the compressed tree; two of them meet at level ``j`` when sets they
come from know each other at ``j``. Extraction works only on the persisted
navigation structure: LCA, inorder ranks, responsibility dictionaries, the
level-ancestor jump and ``meet``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import EmptyQuery, UnknownPoint
from .hierarchy import lca
from .paths import PathIndex


@dataclass
class ExtractedTree:
    """Induced tree on ``points``.

    Nodes ``0..k-1`` are leaves in ascending point order; internal nodes
    follow in creation order and the last node is the root.
    """

    points: list[int]
    level: list[int]
    parent: list[int]
    children: list[list[int]]
    origin: list[int]
    members: list[list[int]]
    meetings: list[tuple[int, int, int]]
    node_meetings: list[list[tuple[int, int]]] = field(default_factory=list)
    responsible: list[dict[int, int]] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def root(self) -> int:
        return len(self.level) - 1

    @property
    def node_count(self) -> int:
        return len(self.level)

    def leaf_of(self, p: int) -> int:
        return self.points.index(p)

    def parent_level(self, v: int) -> float:
        p = self.parent[v]
        return float("inf") if p < 0 else self.level[p]

    def meeting_level(self, a: int, b: int) -> int | None:
        j = self.responsible[a].get(b)
        return self.responsible[b].get(a) if j is None else j

    def finish(self) -> None:
        """Sort meetings and fill per-node lists and responsibility dictionaries."""
        self.meetings.sort(key=lambda m: (m[2], m[0], m[1]))
        N = self.node_count
        self.node_meetings = [[] for _ in range(N)]
        self.responsible = [dict() for _ in range(N)]
        for a, b, j in self.meetings:
            self.node_meetings[a].append((j, b))
            self.node_meetings[b].append((j, a))
            pa, pb = self.parent_level(a), self.parent_level(b)
            if pa <= pb:
                self.responsible[a][b] = j
            if pb <= pa:
                self.responsible[b][a] = j
        for lst in self.node_meetings:
            lst.sort()


def extract_nodes(nav: PathIndex, S) -> ExtractedTree:
    """Node and edge phase: bottom-up merging of inorder neighbours by LCA."""
    t = nav.tree
    pts = sorted(set(int(s) for s in S))
    if not pts:
        raise EmptyQuery("query set is empty")
    for s in pts:
        if not 0 <= s < t.n:
            raise UnknownPoint(s)
    level = nav.level
    rank_lo = t.rank_lo
    k = len(pts)
    et = ExtractedTree(
        points=pts,
        level=[0] * k,
        parent=[-1] * k,
        children=[[] for _ in range(k)],
        origin=list(pts),
        members=[[p] for p in pts],
        meetings=[],
    )
    node_of = {p: i for i, p in enumerate(pts)}  # tree node in P -> extracted node
    order = sorted(pts, key=lambda p: int(t.leaf_rank[p]))
    # P as a doubly linked list in inorder
    prev = {order[i]: (order[i - 1] if i else None) for i in range(k)}
    nxt = {order[i]: (order[i + 1] if i + 1 < k else None) for i in range(k)}
    M: list[tuple[int, int, int, int, int]] = []
    seq = 0

    def push(a: int, b: int) -> None:
        nonlocal seq
        c = lca(t, a, b)
        heapq.heappush(M, (level[c], c, seq, a, b))
        seq += 1

    for a, b in zip(order, order[1:]):
        push(a, b)
    while M:
        l, c, _, a, b = heapq.heappop(M)
        pairs = [(a, b)]
        while M and M[0][0] == l and M[0][1] == c:
            _, _, _, a2, b2 = heapq.heappop(M)
            pairs.append((a2, b2))
        erased = sorted({x for pr in pairs for x in pr if x in prev}, key=lambda x: int(rank_lo[x]))
        left, right = prev[erased[0]], nxt[erased[-1]]
        for x in erased:
            del prev[x], nxt[x]
        q = len(et.level)
        kids = [node_of.pop(x) for x in erased]
        et.level.append(l)
        et.parent.append(-1)
        et.children.append(sorted(kids))
        et.origin.append(c)
        et.members.append(sorted(p for ch in kids for p in et.members[ch]))
        for ch in kids:
            et.parent[ch] = q
        node_of[c] = q
        prev[c], nxt[c] = left, right
        if left is not None:
            nxt[left] = c
            push(left, c)
        if right is not None:
            prev[right] = c
            push(c, right)
    return et


def extract_meetings(et: ExtractedTree, nav: PathIndex) -> ExtractedTree:
    """Meeting phase: process internal nodes top-down, one level at a time."""
    t = nav.tree
    found: dict[tuple[int, int], int] = {}
    by_level: dict[int, list[int]] = {}
    for v in range(et.k, et.node_count):
        by_level.setdefault(et.level[v], []).append(v)
    # meetings known so far, per node (filled as higher groups are processed)
    partners: list[list[tuple[int, int]]] = [[] for _ in range(et.node_count)]

    def record(a: int, b: int, j: int) -> None:
        key = (a, b) if a < b else (b, a)
        if key not in found:
            found[key] = j
            partners[a].append((j, b))
            partners[b].append((j, a))

    for ell in sorted(by_level, reverse=True):
        group = by_level[ell]
        # type 1: children of this group that know each other below ell
        L: dict[int, int] = {}
        for u in group:
            for v in et.children[u]:
                x = nav.level_ancestor_jump(t.rep_leaf(et.origin[v]), ell - 1)
                L[x] = v
        for x, vx in L.items():
            for y in t.responsible[x]:
                vy = L.get(y)
                if vy is not None:
                    record(vx, vy, nav.meet_nodes(et.origin[vx], et.origin[vy]))
        # type 2: a group node's meetings at its own level, pushed down to its children
        for u in group:
            for j, w in list(partners[u]):
                if j != ell or et.parent_level(w) <= ell:
                    continue
                for v in et.children[u]:
                    J = nav.meet_nodes(et.origin[v], et.origin[w])
                    if J < ell:
                        record(v, w, J)
    et.meetings = [(a, b, j) for (a, b), j in found.items()]
    et.finish()
    return et


def extract_subtree(nav: PathIndex, S) -> ExtractedTree:
    return extract_meetings(extract_nodes(nav, S), nav)
