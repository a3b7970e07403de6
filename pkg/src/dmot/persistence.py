"""Single-file storage for a preprocessed structure.

Layout (little-endian throughout)::

    b"DMOT"  u16 version  u16 flags
    payload: a fixed sequence of arrays, each  u8 kind  u64 count  data
    u64 checksum  (blake2b, 8-byte digest, over the payload)

``kind`` is 1 for int64 and 2 for float64. Flag bit 0 marks a trailing
facility-location block. Loading rebuilds every dictionary and trie from the
stored sorted lists; nothing is recomputed from a metric, and none is kept.
"""

from __future__ import annotations

import hashlib
import math
import struct
from pathlib import Path

import numpy as np

from .errors import ChecksumMismatch, PersistenceError, Truncated, VersionUnsupported
from .facility import BarNode, FLIndex
from .hierarchy import INF_LEVEL, CompressedTree
from .partition import PartitionConfig
from .paths import JumpStats, PathIndex, skip_base
from .structure import Structure
from .yfast import YFastTrie, bits_for

MAGIC = b"DMOT"
VERSION = 1
FLAG_FL = 1
_HEADER = struct.Struct("<4sHH")
_ARRAY = struct.Struct("<BQ")
_I64, _F64 = 1, 2


# ---------------------------------------------------------------------------
# low-level array stream


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []
        self.entries = 0

    def ints(self, a) -> None:
        arr = np.ascontiguousarray(np.asarray(a, dtype="<i8").ravel())
        self.parts.append(_ARRAY.pack(_I64, arr.size))
        self.parts.append(arr.tobytes())
        self.entries += arr.size

    def floats(self, a) -> None:
        arr = np.ascontiguousarray(np.asarray(a, dtype="<f8").ravel())
        self.parts.append(_ARRAY.pack(_F64, arr.size))
        self.parts.append(arr.tobytes())
        self.entries += arr.size

    def ragged(self, rows) -> None:
        """List of int lists as ``ptr`` then flat values."""
        rows = list(rows)
        ptr = np.zeros(len(rows) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(r) for r in rows])
        self.ints(ptr)
        self.ints([x for r in rows for x in r])

    def payload(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _take(self, kind: int) -> np.ndarray:
        if self.pos + _ARRAY.size > len(self.buf):
            raise Truncated("payload ends inside an array header")
        got, count = _ARRAY.unpack_from(self.buf, self.pos)
        self.pos += _ARRAY.size
        if got != kind:
            raise PersistenceError(f"array kind {got}, expected {kind}")
        end = self.pos + 8 * count
        if end > len(self.buf):
            raise Truncated("payload ends inside an array")
        arr = np.frombuffer(self.buf, dtype="<i8" if kind == _I64 else "<f8", count=count, offset=self.pos)
        self.pos = end
        return arr.astype(np.int64 if kind == _I64 else np.float64)

    def ints(self) -> np.ndarray:
        return self._take(_I64)

    def floats(self) -> np.ndarray:
        return self._take(_F64)

    def ragged(self) -> list[list[int]]:
        ptr = self.ints().tolist()
        flat = self.ints().tolist()
        return [flat[ptr[i] : ptr[i + 1]] for i in range(len(ptr) - 1)]

    def done(self) -> bool:
        return self.pos == len(self.buf)


def _opt(x) -> float:
    return math.nan if x is None else float(x)


def _unopt(x: float):
    return None if math.isnan(x) else x


# ---------------------------------------------------------------------------
# encoding


def _write_tree(w: _Writer, t: CompressedTree) -> None:
    cfg = t.config
    w.floats([cfg.tau, _opt(cfg.r0), _opt(cfg.epsilon)])
    w.ints([t.n, cfg.eta])
    # retained levels with their radii
    w.ints(t.levels)
    w.floats([t.radius(int(j)) for j in t.levels])
    w.ints(t.level)
    w.ints(t.parent)
    w.ints(t.leader)
    w.ints(t.child_ptr)
    w.ints(t.child_idx)
    w.ints(t.meetings)
    w.ints(t.node_meet_ptr)
    w.ints(t.node_meet_idx)
    w.ragged([x for kv in sorted(d.items()) for x in kv] for d in t.responsible)
    w.ints(t.leaf_rank)
    w.ints(t.rank_lo)
    w.ints(t.rank_hi)
    w.ints(t.leaf_at_rank)
    w.ints(t.depth)
    w.ints(t._euler)
    w.ints(t._first)
    w.ragged(row.tolist() for row in t._sparse)


def _write_paths(w: _Writer, p: PathIndex) -> None:
    w.ints(p.heavy)
    w.ragged(p.path_vertices)
    w.ints(p.path_of)
    w.ints(p.p_ptr)
    w.ints(p.depth)
    w.ints(p.s_ptr)
    w.ragged(p.walk_paths)
    w.ragged(p.walk_top)
    w.ragged([x for kv in sorted(d.items()) for x in kv] for d in p.path_meet)
    w.ragged(p.final_acq)
    w.ints(p.meet_levels)
    w.ragged([x for kv in sorted(d.items()) for x in kv] for d in p.level_vertex)
    w.ragged(
        [x for r in sorted(at) for pr in at[r] for x in (r, pr[0], pr[1])] for at in p.meet_at
    )
    w.ragged(p.snap_levels)
    w.ragged(s for sets in p.snap_sets for s in sets)


def _write_fl(w: _Writer, idx: FLIndex) -> None:
    w.floats(idx.costs)
    w.floats([idx.eps0, idx.vis_factor, idx.r0, idx.tau])
    w.ints([idx.root_low])
    w.ints([x for b in idx.bars for x in (b.node, b.level, b.low)])
    w.ragged(idx.node_bars)
    w.ragged(idx.F)


def encode(st: Structure) -> tuple[bytes, int]:
    """File bytes and the number of stored array entries."""
    w = _Writer()
    w.ints([st.seed])
    _write_tree(w, st.tree)
    _write_paths(w, st.nav)
    flags = 0
    if st.fl is not None:
        flags |= FLAG_FL
        _write_fl(w, st.fl)
    payload = w.payload()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return _HEADER.pack(MAGIC, VERSION, flags) + payload + digest, w.entries


def save(st: Structure, path: str | Path) -> int:
    """Write ``st`` to ``path``; returns the stored entry count."""
    data, entries = encode(st)
    Path(path).write_bytes(data)
    return entries


# ---------------------------------------------------------------------------
# decoding


def _pairs(row: list[int]) -> dict[int, int]:
    return dict(zip(row[0::2], row[1::2]))


def _read_tree(r: _Reader) -> CompressedTree:
    tau, r0, eps = r.floats().tolist()
    n, eta = r.ints().tolist()
    cfg = PartitionConfig(tau=tau, eta=int(eta), r0=_unopt(r0), epsilon=_unopt(eps))
    levels = r.ints()
    r.floats()  # radii, recomputable from the config; kept for readers of the file
    t = object.__new__(CompressedTree)
    t.n, t.config = int(n), cfg
    t.level = r.ints()
    t.parent = r.ints()
    t.leader = r.ints()
    t.child_ptr = r.ints()
    t.child_idx = r.ints()
    t.meetings = r.ints().reshape(-1, 3)
    t.node_meet_ptr = r.ints()
    t.node_meet_idx = r.ints()
    t.responsible = [_pairs(row) for row in r.ragged()]
    t.parent_level = np.full(len(t.level), INF_LEVEL, dtype=np.int64)
    has_p = t.parent >= 0
    t.parent_level[has_p] = t.level[t.parent[has_p]]
    t.leaf_rank = r.ints()
    t.rank_lo = r.ints()
    t.rank_hi = r.ints()
    t.leaf_at_rank = r.ints()
    t.depth = r.ints()
    t._euler = r.ints()
    t._first = r.ints()
    t._sparse = [np.asarray(row, dtype=np.int64) for row in r.ragged()]
    t._edepth = t.depth[t._euler]
    t.levels = levels
    t._levels_list = levels.tolist()
    return t


def _read_paths(r: _Reader, t: CompressedTree) -> PathIndex:
    p = object.__new__(PathIndex)
    p.tree = t
    p.root = t.root
    p.rank_lo = t.rank_lo.tolist()
    p.rank_hi = t.rank_hi.tolist()
    p.level = t.level.tolist()
    p.parent = t.parent.tolist()
    p.parent_level = [x if x != INF_LEVEL else float("inf") for x in t.parent_level.tolist()]
    p.x = skip_base(t.n)
    p.heavy = r.ints().tolist()
    p.path_vertices = r.ragged()
    p.path_of = r.ints().tolist()
    p.path_top = [pv[0] for pv in p.path_vertices]
    p.toplev = [p.level[v] for v in p.path_top]
    p.p_ptr = r.ints().tolist()
    p.depth = r.ints().tolist()
    p.s_ptr = r.ints().tolist()
    p.walk_paths = r.ragged()
    p.walk_top = r.ragged()
    p.walk_entry = []
    for v, (wp, wt) in enumerate(zip(p.walk_paths, p.walk_top)):
        p.walk_entry.append({q: (p.level[v] if i == 0 else wt[i - 1]) for i, q in enumerate(wp)})
    p.path_meet = [_pairs(row) for row in r.ragged()]
    p.final_acq = [tuple(row) for row in r.ragged()]
    p._acq_reach()
    p.levels = t._levels_list
    p.level_rank = {l: i for i, l in enumerate(p.levels)}
    p.meet_levels = r.ints().tolist()
    lbits = bits_for(len(p.levels))
    mbits = bits_for(max(1, len(p.meet_levels)))
    p.level_vertex = [_pairs(row) for row in r.ragged()]
    p.level_trie = [YFastTrie(lbits, lv.keys()) for lv in p.level_vertex]
    p.meet_at = []
    for row in r.ragged():
        at: dict[int, list[tuple[int, int]]] = {}
        for i in range(0, len(row), 3):
            at.setdefault(row[i], []).append((row[i + 1], row[i + 2]))
        p.meet_at.append(at)
    p.meet_trie = [YFastTrie(mbits, at.keys()) for at in p.meet_at]
    p.snap_levels = r.ragged()
    flat = r.ragged()
    p.snap_sets = []
    pos = 0
    for levels in p.snap_levels:
        p.snap_sets.append([tuple(s) for s in flat[pos : pos + len(levels)]])
        pos += len(levels)
    p.last_jump = JumpStats()
    return p


def _read_fl(r: _Reader) -> FLIndex:
    costs = r.floats()
    eps0, vis_factor, r0, tau = r.floats().tolist()
    (root_low,) = r.ints().tolist()
    flat = r.ints().tolist()
    bars = [BarNode(node=flat[i], level=flat[i + 1], low=flat[i + 2]) for i in range(0, len(flat), 3)]
    return FLIndex(
        costs=costs,
        eps0=eps0,
        vis_factor=vis_factor,
        r0=r0,
        tau=tau,
        bars=bars,
        node_bars=r.ragged(),
        F=r.ragged(),
        root_low=root_low,
    )


def decode(data: bytes) -> Structure:
    if len(data) < _HEADER.size + 8:
        raise Truncated("file shorter than header and checksum")
    magic, version, flags = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise PersistenceError("not a structure file")
    if version != VERSION:
        raise VersionUnsupported(f"format version {version}, this reader handles {VERSION}")
    payload = data[_HEADER.size : -8]
    if hashlib.blake2b(payload, digest_size=8).digest() != data[-8:]:
        raise ChecksumMismatch("payload checksum does not match")
    r = _Reader(payload)
    (seed,) = r.ints().tolist()
    t = _read_tree(r)
    nav = _read_paths(r, t)
    fl = _read_fl(r) if flags & FLAG_FL else None
    if not r.done():
        raise PersistenceError("trailing bytes after the last block")
    return Structure(tree=t, nav=nav, seed=int(seed), fl=fl)


def load(path: str | Path) -> Structure:
    return decode(Path(path).read_bytes())

