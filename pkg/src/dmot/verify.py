"""Oracle suites that check a structure against the metric it was built from.

Each suite compares the fast structure with a brute-force reference from
:mod:`dmot.oracles` and reports how many checks ran and which failed. This is
the only module besides the oracles that looks at both a structure and its
metric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoMeetingAbove
from .metric import MetricSpace
from .oracles import (
    LiteralHierarchy,
    naive_extract,
    naive_jump,
    naive_known_sets,
    naive_meeting_jump,
)
from .persistence import decode, encode
from .spanner import build_pseudospanner, distance_matrix
from .structure import Structure

REL_TOL = 1e-9
LITERAL_LIMIT = 512  # largest n for which the level-by-level oracle is built


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        if len(self.failures) < 20:
            self.failures.append(msg)
        else:
            self.failures[-1] = "... more failures"

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failures": list(self.failures),
            "note": self.note,
        }


def literal_for(st: Structure, ms: MetricSpace) -> LiteralHierarchy:
    cfg = st.config
    return LiteralHierarchy.build(ms.full_matrix(), cfg.tau, cfg.eta, cfg.r0)


def _members(st: Structure, v: int) -> frozenset:
    return frozenset(st.tree.members(v).tolist())


def sandwich_suite(st: Structure, ms: MetricSpace, pairs=None) -> SuiteResult:
    """``r_{J-1} <= d(u, v) <= D r_{J-1}`` with ``J = meet(u, v)``, for every pair given (default all)."""
    res = SuiteResult("sandwich")
    D = st.config.distance_factor
    dmat = ms.full_matrix()
    it = pairs if pairs is not None else itertools.combinations(range(ms.n), 2)
    for u, v in it:
        d = float(dmat[u, v])
        r = st.radius(st.meet(u, v) - 1)
        res.checked += 1
        if not (r <= d * (1 + REL_TOL) and d <= D * r * (1 + REL_TOL)):
            res.fail(f"pair ({u}, {v}): d={d!r}, r={r!r}, factor {d / r:.6g} > {D:.6g}")
    res.note = f"upper factor {D:.6g}"
    return res


def hierarchy_suite(st: Structure, h: LiteralHierarchy) -> SuiteResult:
    """Compressed nodes, levels and meetings equal the level-by-level simulation."""
    res = SuiteResult("hierarchy")
    t = st.tree
    got = {_members(st, v): int(t.level[v]) for v in range(t.node_count)}
    res.checked += len(got)
    if got != h.nodes:
        for s in set(got.items()) ^ set(h.nodes.items()):
            res.fail(f"node mismatch {sorted(s[0])[:8]} at level {s[1]}")
    meets = {
        frozenset((_members(st, a), _members(st, b))): j for a, b, j in t.meetings.tolist()
    }
    res.checked += len(meets)
    if meets != h.meetings:
        res.fail(f"{len(set(meets.items()) ^ set(h.meetings.items()))} meetings differ")
    return res


def navigation_suite(st: Structure, h: LiteralHierarchy, rng: np.random.Generator, jumps: int = 2000) -> SuiteResult:
    """meet over all pairs, both jumps and known sets at random queries."""
    res = SuiteResult("navigation")
    n = st.n
    nav, t = st.nav, st.tree
    for u, v in itertools.combinations(range(n), 2):
        res.checked += 1
        if st.meet(u, v) != h.meet(u, v):
            res.fail(f"meet({u}, {v}) = {st.meet(u, v)}, expected {h.meet(u, v)}")
    top = int(t.level[t.root])
    for _ in range(jumps):
        x = int(rng.integers(n))
        j = int(rng.integers(0, top + 2))
        a = st.level_ancestor_jump(x, j)
        res.checked += 1
        if _members(st, a) != naive_jump(h, x, j):
            res.fail(f"level jump ({x}, {j}) gives node {a}")
        exp = naive_meeting_jump(h, x, j)
        try:
            s, w, lv = st.meeting_jump(x, j)
            got = (lv, (_members(st, s), _members(st, w)))
        except NoMeetingAbove:
            got = None
        res.checked += 1
        if exp is None or got is None:
            if exp is not got:
                res.fail(f"meeting jump ({x}, {j}): got {got is not None}, expected {exp is not None}")
        elif got[0] != exp[0] or got[1] not in exp[1]:
            res.fail(f"meeting jump ({x}, {j}) at level {got[0]}, expected {exp[0]}")
        i = int(rng.integers(0, top + 1))
        hi = int(rng.integers(i, top + 2))
        anchor = hi if rng.random() < 0.5 else None
        for l, own, acq in nav.known_sets_by_level(x, i, hi, anchor=anchor):
            mine, known = naive_known_sets(h, x, l)
            res.checked += 1
            got_known = sorted((_members(st, w) for w in acq), key=sorted)
            if _members(st, own) != mine or got_known != known:
                res.fail(f"known sets of {x} at level {l}")
    return res


def extraction_suite(st: Structure, h: LiteralHierarchy, rng: np.random.Generator, trials: int = 200, kmax: int = 16) -> SuiteResult:
    res = SuiteResult("extraction")
    n = st.n
    for _ in range(trials):
        k = int(rng.integers(1, min(n, kmax) + 1))
        S = rng.choice(n, k, replace=False).tolist()
        et = st.extract(S)
        nodes, parent, meet = naive_extract(h, S)
        res.checked += 1
        mem = [frozenset(m) for m in et.members]
        ok = {m: l for m, l in zip(mem, et.level)} == nodes
        ok = ok and all(parent[mem[v]] == (None if p < 0 else mem[p]) for v, p in enumerate(et.parent))
        ok = ok and {frozenset((mem[a], mem[b])): j for a, b, j in et.meetings} == meet
        if not ok:
            res.fail(f"S = {sorted(S)}")
    return res


def spanner_suite(st: Structure, ms: MetricSpace, rng: np.random.Generator, trials: int = 50, kmax: int = 64) -> SuiteResult:
    """``d <= d_H <= C d`` on random subsets, plus the edge count."""
    res = SuiteResult("spanner")
    C = st.config.spanner_stretch
    dmat = ms.full_matrix()
    worst, edge_ratio = 1.0, 0.0
    for _ in range(trials):
        k = int(rng.integers(2, min(ms.n, kmax) + 1)) if ms.n >= 2 else 1
        S = sorted(rng.choice(ms.n, k, replace=False).tolist())
        sp = build_pseudospanner(st.extract(S), st.config)
        dh = distance_matrix(sp, S)
        d = dmat[np.ix_(S, S)]
        off = ~np.eye(k, dtype=bool)
        res.checked += int(off.sum())
        low = dh[off] < d[off] * (1 - REL_TOL)
        high = dh[off] > C * d[off] * (1 + REL_TOL)
        if low.any() or high.any():
            res.fail(f"stretch violated on S of size {k}")
        if k > 1:
            worst = max(worst, float((dh[off] / d[off]).max()))
        edge_ratio = max(edge_ratio, len(sp.edges) / k)
    res.note = f"worst stretch {worst:.4g} (bound {C:.4g}); max edges/k {edge_ratio:.3g}"
    return res


def structural_suite(st: Structure) -> SuiteResult:
    res = SuiteResult("structure")
    t, nav = st.tree, st.nav
    n = t.n
    res.checked += 1
    if t.node_count > 2 * n - 1:
        res.fail(f"{t.node_count} nodes for n = {n}")
    cap = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    worst = 0
    for v in range(n):
        c = nav.paths_crossed(v)
        worst = max(worst, c)
        res.checked += 1
        if c > cap:
            res.fail(f"walk from {v} crosses {c} paths > {cap}")
    for v in range(t.node_count):
        for c in t.children(v).tolist():
            res.checked += 1
            if not t.level[c] < t.level[v]:
                res.fail(f"child {c} not below parent {v}")
    res.note = f"max paths crossed {worst} (cap {cap}); max responsibility {max(len(d) for d in t.responsible)}"
    return res


def persistence_suite(st: Structure, rng: np.random.Generator, queries: int = 1000) -> SuiteResult:
    res = SuiteResult("persistence")
    data, _ = encode(st)
    back = decode(data)
    res.checked += 1
    if encode(back)[0] != data:
        res.fail("re-save is not byte-identical")
    n = st.n
    top = int(st.tree.level[st.tree.root])
    for _ in range(queries):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        j = int(rng.integers(0, top + 2))
        res.checked += 1
        if back.meet(u, v) != st.meet(u, v) or back.level_ancestor_jump(u, j) != st.level_ancestor_jump(u, j):
            res.fail(f"answers differ after reload at ({u}, {v}, {j})")
    return res


def run_all(st: Structure, ms: MetricSpace, *, seed: int = 0, literal: bool | None = None) -> list[SuiteResult]:
    """Every suite; the literal-hierarchy ones only when ``n <= LITERAL_LIMIT`` (or forced)."""
    rng = np.random.default_rng(seed)
    out = [structural_suite(st), sandwich_suite(st, ms)]
    if literal if literal is not None else ms.n <= LITERAL_LIMIT:
        h = literal_for(st, ms)
        out.append(hierarchy_suite(st, h))
        out.append(navigation_suite(st, h, rng))
        out.append(extraction_suite(st, h, rng))
    out.append(spanner_suite(st, ms, rng))
    out.append(persistence_suite(st, rng))
    return out
