"""Brute-force reference implementations.

Everything here reads distances directly and shares no code with the
structures it is used to check. Sizes are kept small by the callers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree


# ---------------------------------------------------------------------------
# literal hierarchy: every level simulated, nothing skipped


@dataclass
class LiteralHierarchy:
    """All levels ``0..top`` of the partition, computed one by one.

    ``labels[j][p]`` is the leader point of the level-j set containing ``p``;
    ``knows[j]`` is the set of unordered leader pairs whose sets know each
    other at level ``j``.
    """

    dmat: np.ndarray
    tau: float
    eta: int
    r0: float
    labels: list[np.ndarray] = field(default_factory=list)
    knows: list[set[tuple[int, int]]] = field(default_factory=list)

    def radius(self, j: int) -> float:
        return self.r0 * self.tau**j

    @property
    def top(self) -> int:
        return len(self.labels) - 1

    @classmethod
    def build(cls, dmat: np.ndarray, tau: float, eta: int, r0: float) -> "LiteralHierarchy":
        dmat = np.asarray(dmat, dtype=np.float64)
        h = cls(dmat=dmat, tau=tau, eta=eta, r0=r0)
        n = dmat.shape[0]
        lab = np.arange(n)
        h.labels.append(lab)
        h.knows.append(h._knows_for(lab, 0))
        j = 0
        while len(np.unique(lab)) > 1:
            j += 1
            rad = 2.0 ** (-eta - 1) * (2.0 * h.radius(j))
            leaders = np.unique(lab)
            center = {}
            for v in leaders:
                if v in center:
                    continue
                center[v] = v
                for w in leaders:
                    if w not in center and dmat[v, w] <= rad:
                        center[w] = v
            lab = np.array([center[l] for l in lab])
            h.labels.append(lab)
            h.knows.append(h._knows_for(lab, j))
        return h

    def _knows_for(self, lab: np.ndarray, j: int) -> set[tuple[int, int]]:
        r = self.radius(j)
        close = self.dmat < r
        out = set()
        ids = np.unique(lab)
        groups = {int(l): np.flatnonzero(lab == l) for l in ids}
        for a, b in itertools.combinations(groups, 2):
            if close[np.ix_(groups[a], groups[b])].any():
                out.add((min(a, b), max(a, b)))
        return out

    def set_at(self, p: int, j: int) -> int:
        return int(self.labels[min(j, self.top)][p])

    def sets_know(self, a: int, b: int, j: int) -> bool:
        if a == b:
            return True
        return (min(a, b), max(a, b)) in self.knows[min(j, self.top)]

    def meet(self, u: int, v: int) -> int:
        """Lowest level where the sets of ``u`` and ``v`` coincide or know each other."""
        for j in range(self.top + 1):
            if self.sets_know(self.set_at(u, j), self.set_at(v, j), j):
                return j
        return self.top

    # compressed view ----------------------------------------------------
    @cached_property
    def nodes(self) -> dict[frozenset, int]:
        """Distinct sets mapped to the lowest level they appear on."""
        out: dict[frozenset, int] = {}
        for j, lab in enumerate(self.labels):
            for l in np.unique(lab):
                s = frozenset(np.flatnonzero(lab == l).tolist())
                out.setdefault(s, j)
        return out

    @cached_property
    def lifetimes(self) -> dict[frozenset, tuple[int, int]]:
        """``[first, last]`` levels on which each distinct set exists (root: last = inf)."""
        first: dict[frozenset, int] = {}
        last: dict[frozenset, int] = {}
        for j, lab in enumerate(self.labels):
            for l in np.unique(lab):
                s = frozenset(np.flatnonzero(lab == l).tolist())
                first.setdefault(s, j)
                last[s] = j
        n = self.dmat.shape[0]
        out = {}
        for s in first:
            out[s] = (first[s], last[s] if len(s) < n else 10**9)
        return out

    @cached_property
    def parent(self) -> dict[frozenset, frozenset | None]:
        sets = sorted(self.nodes, key=len)
        out: dict[frozenset, frozenset | None] = {}
        for s in sets:
            best = None
            for t in sets:
                if len(t) > len(s) and s < t and (best is None or len(t) < len(best)):
                    best = t
            out[s] = best
        return out

    def leader_set(self, leader: int, j: int) -> frozenset:
        return frozenset(np.flatnonzero(self.labels[j] == leader).tolist())

    @cached_property
    def meetings(self) -> dict[frozenset, int]:
        """Unordered pairs of distinct sets mapped to the first level they know each other."""
        out: dict[frozenset, int] = {}
        for j, pairs in enumerate(self.knows):
            for a, b in pairs:
                key = frozenset((self.leader_set(a, j), self.leader_set(b, j)))
                out.setdefault(key, j)
        return out


def naive_meet(h: LiteralHierarchy, u: int, v: int) -> int:
    return h.meet(u, v)


def naive_jump(h: LiteralHierarchy, x: int, j: int) -> frozenset:
    """The set containing point ``x`` at level ``j`` (clamped to ``[0, top]``)."""
    j = min(max(j, 0), h.top)
    return h.leader_set(h.set_at(x, j), j)


def naive_meeting_jump(h: LiteralHierarchy, x: int, i: int) -> tuple[int, set[tuple[frozenset, frozenset]]] | None:
    """Lowest meeting level ``>= i`` among sets containing ``x``, with every meeting at it.

    Meetings are returned as ``(own set, partner set)``; ``None`` if there is none.
    """
    best = None
    found: set[tuple[frozenset, frozenset]] = set()
    for pair, j in h.meetings.items():
        if j < i:
            continue
        a, b = tuple(pair)
        for own, other in ((a, b), (b, a)):
            if x in own:
                if best is None or j < best:
                    best, found = j, set()
                if j == best:
                    found.add((own, other))
    return None if best is None else (best, found)


def naive_known_sets(h: LiteralHierarchy, x: int, l: int) -> tuple[frozenset, list[frozenset]]:
    """Set of ``x`` at level ``l`` and the other sets it knows there."""
    lv = min(l, h.top)
    me = h.set_at(x, lv)
    lab = h.labels[lv]
    known = [
        h.leader_set(int(s), lv)
        for s in np.unique(lab)
        if int(s) != me and h.sets_know(me, int(s), lv)
    ]
    return h.leader_set(me, lv), sorted(known, key=sorted)


# ---------------------------------------------------------------------------
# induced subtree, computed by set algebra


def naive_extract(h: LiteralHierarchy, S) -> tuple[dict[frozenset, int], dict[frozenset, frozenset | None], dict[frozenset, int]]:
    """Nodes (with levels), parents and meetings of the subtree induced by ``S``.

    A node is a non-empty intersection of a hierarchy set with ``S``; its
    level is the lowest level of such a set. Two induced nodes know each other
    at level j when hierarchy sets whose intersections they are know each
    other at level j.
    """
    S = frozenset(int(s) for s in S)
    nodes: dict[frozenset, int] = {}
    for j, lab in enumerate(h.labels):
        for l in np.unique(lab[list(S)]):
            q = frozenset(s for s in S if lab[s] == l)
            nodes.setdefault(q, j)
    parent: dict[frozenset, frozenset | None] = {}
    for q in nodes:
        best = None
        for t in nodes:
            if q < t and (best is None or len(t) < len(best)):
                best = t
        parent[q] = best
    meetings: dict[frozenset, int] = {}
    for j, lab in enumerate(h.labels):
        inter = {}
        for l in np.unique(lab[list(S)]):
            inter[int(l)] = frozenset(s for s in S if lab[s] == l)
        for a, b in itertools.combinations(inter, 2):
            if h.sets_know(a, b, j):
                meetings.setdefault(frozenset((inter[a], inter[b])), j)
    return nodes, parent, meetings


# ---------------------------------------------------------------------------
# exact combinatorial optimisation


def exact_mst(dmat: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Kruskal on the full distance matrix."""
    n = dmat.shape[0]
    if n <= 1:
        return 0.0, []
    iu, ju = np.triu_indices(n, k=1)
    order = np.argsort(dmat[iu, ju], kind="stable")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total, edges = 0.0, []
    for t in order:
        a, b = int(iu[t]), int(ju[t])
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            total += float(dmat[a, b])
            edges.append((a, b))
            if len(edges) == n - 1:
                break
    return total, edges


def prim_mst_weight(dmat: np.ndarray) -> float:
    """Dense Prim, used to cross-check :func:`exact_mst`."""
    n = dmat.shape[0]
    if n <= 1:
        return 0.0
    inside = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best[0] = 0.0
    total = 0.0
    for _ in range(n):
        cand = np.where(inside, np.inf, best)
        v = int(np.argmin(cand))
        total += float(cand[v])
        inside[v] = True
        best = np.minimum(best, dmat[v])
    return total


def scipy_mst_weight(dmat: np.ndarray) -> float:
    return float(minimum_spanning_tree(dmat).sum())


def exact_tsp(dmat: np.ndarray) -> tuple[float, list[int]]:
    """Held-Karp over subsets, for at most 12 points."""
    n = dmat.shape[0]
    if n <= 1:
        return 0.0, list(range(n))
    if n == 2:
        return 2 * float(dmat[0, 1]), [0, 1]
    if n > 12:
        raise ValueError("Held-Karp oracle limited to 12 points")
    full = 1 << (n - 1)
    cost = np.full((full, n - 1), np.inf)
    back = np.full((full, n - 1), -1, dtype=np.int64)
    for k in range(n - 1):
        cost[1 << k, k] = dmat[0, k + 1]
    for mask in range(1, full):
        for k in range(n - 1):
            if not mask & (1 << k) or cost[mask, k] == np.inf:
                continue
            base = cost[mask, k]
            for m in range(n - 1):
                if mask & (1 << m):
                    continue
                nm = mask | (1 << m)
                c = base + dmat[k + 1, m + 1]
                if c < cost[nm, m]:
                    cost[nm, m] = c
                    back[nm, m] = k
    last = full - 1
    ends = cost[last] + dmat[1:, 0]
    k = int(np.argmin(ends))
    best = float(ends[k])
    tour = []
    mask = last
    while k >= 0:
        tour.append(k + 1)
        pk = int(back[mask, k])
        mask ^= 1 << k
        k = pk
    return best, [0] + tour[::-1]


def tsp_by_enumeration(dmat: np.ndarray) -> float:
    n = dmat.shape[0]
    if n <= 1:
        return 0.0
    best = np.inf
    for perm in itertools.permutations(range(1, n)):
        tour = (0,) + perm
        c = sum(dmat[tour[i], tour[(i + 1) % n]] for i in range(n))
        best = min(best, c)
    return float(best)


def exact_steiner(dmat: np.ndarray, terminals) -> float:
    """Dreyfus-Wagner over the complete metric graph on all points of ``dmat``."""
    terminals = list(terminals)
    t = len(terminals)
    if t <= 1:
        return 0.0
    n = dmat.shape[0]
    # metric closure is the matrix itself
    dp = np.full((1 << t, n), np.inf)
    for i, term in enumerate(terminals):
        dp[1 << i] = dmat[term]
    for mask in range(1, 1 << t):
        if mask & (mask - 1) == 0:
            continue
        sub = (mask - 1) & mask
        best = np.full(n, np.inf)
        while sub:
            if sub < (mask ^ sub):
                best = np.minimum(best, dp[sub] + dp[mask ^ sub])
            sub = (sub - 1) & mask
        # relax through one hop; metric closure makes one pass sufficient
        dp[mask] = np.min(best[:, None] + dmat, axis=0)
    return float(dp[(1 << t) - 1][terminals[0]])


def steiner_by_enumeration(dmat: np.ndarray, terminals) -> float:
    """Minimum over Steiner-point subsets of the MST on terminals plus those points."""
    terminals = list(terminals)
    others = [v for v in range(dmat.shape[0]) if v not in set(terminals)]
    best = np.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            idx = terminals + list(extra)
            best = min(best, exact_mst(dmat[np.ix_(idx, idx)])[0])
    return float(best)


def steiner_forest_opt(dmat: np.ndarray, ground, pairs) -> float:
    """Optimal Steiner forest for ``pairs`` using points of ``ground`` as Steiner points.

    Enumerates set partitions of the demand components; each block is solved
    exactly by Dreyfus-Wagner on the ground set.
    """
    ground = list(ground)
    pos = {v: i for i, v in enumerate(ground)}
    sub = dmat[np.ix_(ground, ground)]
    # demand components
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in pairs:
        if a != b:
            parent[find(a)] = find(b)
    comps: dict[int, list[int]] = {}
    for x in list(parent):
        comps.setdefault(find(x), []).append(x)
    blocks = list(comps.values())
    if not blocks:
        return 0.0
    cache: dict[frozenset, float] = {}

    def tree_cost(terms: frozenset) -> float:
        if terms not in cache:
            cache[terms] = exact_steiner(sub, [pos[v] for v in sorted(terms)])
        return cache[terms]

    best = np.inf
    for part in _set_partitions(list(range(len(blocks)))):
        c = 0.0
        for group in part:
            terms = frozenset(v for g in group for v in blocks[g])
            c += tree_cost(terms)
            if c >= best:
                break
        best = min(best, c)
    return float(best)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def exact_fl(dmat: np.ndarray, cities, facilities, costs) -> tuple[float, list[int]]:
    """Enumerate every non-empty set of open facilities (at most 20 candidates)."""
    cities = list(cities)
    facilities = list(facilities)
    costs = np.asarray(costs, dtype=np.float64)
    m = len(facilities)
    if m == 0:
        raise ValueError("no facilities")
    if m > 20:
        raise ValueError("facility enumeration limited to 20 candidates")
    conn = dmat[np.ix_(cities, facilities)]  # |C| x m
    best, best_set = np.inf, []
    masks = np.arange(1, 1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    open_cost = bits.astype(np.float64) @ np.where(np.isfinite(costs), costs, 0.0)
    inf_open = bits[:, ~np.isfinite(costs)].any(axis=1) if (~np.isfinite(costs)).any() else np.zeros(len(masks), bool)
    step = 1 << 14
    for s in range(0, len(masks), step):
        b = bits[s : s + step]
        c = np.where(b[:, None, :], conn[None, :, :], np.inf).min(axis=2).sum(axis=1)
        tot = c + open_cost[s : s + step]
        tot[inf_open[s : s + step]] = np.inf
        k = int(np.argmin(tot))
        if tot[k] < best:
            best = float(tot[k])
            best_set = [facilities[i] for i in np.flatnonzero(b[k])]
    return best, best_set


def exact_fl_by_recursion(dmat: np.ndarray, cities, facilities, costs) -> float:
    """Second enumeration order: include/exclude recursion over facilities."""
    cities = list(cities)
    facilities = list(facilities)
    conn = dmat[np.ix_(cities, facilities)]
    best = [np.inf]

    def go(i, chosen, opened):
        if i == len(facilities):
            if chosen:
                c = opened + conn[:, chosen].min(axis=1).sum()
                best[0] = min(best[0], c)
            return
        go(i + 1, chosen, opened)
        if np.isfinite(costs[i]):
            go(i + 1, chosen + [i], opened + costs[i])

    go(0, [], 0.0)
    return float(best[0])


def exact_k_center(dmat: np.ndarray, r: int) -> tuple[float, tuple[int, ...]]:
    """Optimal radius over all centre subsets of size ``r``."""
    n = dmat.shape[0]
    best, arg = np.inf, ()
    for cs in itertools.combinations(range(n), r):
        rad = float(dmat[list(cs)].min(axis=0).max())
        if rad < best:
            best, arg = rad, cs
    return best, arg
