"""Predecessor/successor search over a bounded integer universe.

:class:`YFastTrie` keeps keys in sorted buckets of ``Theta(w)`` elements
(``w`` = universe bits). The minimum of each bucket is its representative and
the representatives live in an x-fast trie, which answers predecessor queries
with a binary search over prefix lengths.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from typing import Iterable, Iterator

from .errors import KeyOutOfUniverse


class XFastTrie:
    """Set of integers in ``[0, 2**bits)`` with O(log bits) predecessor queries.

    ``levels[l]`` maps each present ``l``-bit prefix to the ``[min, max]`` of
    the stored keys below it; the stored keys are also threaded in a doubly
    linked list.
    """

    def __init__(self, bits: int):
        self.bits = bits
        self.levels: list[dict[int, list[int]]] = [dict() for _ in range(bits + 1)]
        self.prev: dict[int, int | None] = {}
        self.next: dict[int, int | None] = {}

    def __len__(self) -> int:
        return len(self.prev)

    def __contains__(self, key: int) -> bool:
        return key in self.prev

    def _longest_prefix(self, q: int) -> int:
        lo, hi = 0, self.bits
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if (q >> (self.bits - mid)) in self.levels[mid]:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def neighbours(self, q: int) -> tuple[int | None, int | None]:
        """(largest key <= q, smallest key >= q)."""
        if not self.prev:
            return None, None
        if q in self.prev:
            return q, q
        l = self._longest_prefix(q)
        node = self.levels[l][q >> (self.bits - l)]
        nextbit = (q >> (self.bits - l - 1)) & 1
        if nextbit == 1:
            # only the left subtree exists, everything below is < q
            pred = node[1]
            return pred, self.next[pred]
        succ = node[0]
        return self.prev[succ], succ

    def insert(self, key: int) -> None:
        if key in self.prev:
            return
        pred, succ = self.neighbours(key)
        self.prev[key] = pred
        self.next[key] = succ
        if pred is not None:
            self.next[pred] = key
        if succ is not None:
            self.prev[succ] = key
        for l in range(self.bits + 1):
            p = key >> (self.bits - l)
            node = self.levels[l].get(p)
            if node is None:
                self.levels[l][p] = [key, key]
            else:
                if key < node[0]:
                    node[0] = key
                if key > node[1]:
                    node[1] = key

    def delete(self, key: int) -> None:
        if key not in self.prev:
            return
        pred, succ = self.prev.pop(key), self.next.pop(key)
        if pred is not None:
            self.next[pred] = succ
        if succ is not None:
            self.prev[succ] = pred
        del self.levels[self.bits][key]
        for l in range(self.bits - 1, -1, -1):
            p = key >> (self.bits - l)
            left = self.levels[l + 1].get(2 * p)
            right = self.levels[l + 1].get(2 * p + 1)
            if left is None and right is None:
                del self.levels[l][p]
            else:
                self.levels[l][p] = [
                    (left or right)[0],
                    (right or left)[1],
                ]

    def minimum(self) -> int | None:
        root = self.levels[0].get(0)
        return None if root is None else root[0]


class YFastTrie:
    """Dynamic ordered set of integers in ``[0, 2**universe_bits)``.

    Buckets hold between ``w/2`` and ``2w`` keys (one bucket may be smaller
    when the whole set is small).
    """

    def __init__(self, universe_bits: int, keys: Iterable[int] = ()):
        if universe_bits < 1:
            raise ValueError("universe_bits must be positive")
        self.universe_bits = universe_bits
        self._lo = max(1, universe_bits // 2)
        self._hi = 2 * universe_bits
        self.xfast = XFastTrie(universe_bits)
        self.buckets: dict[int, list[int]] = {}
        self.size = 0
        keys = sorted(set(keys))
        for k in keys:
            self._check(k)
        # bulk load into buckets of size w
        w = universe_bits
        for start in range(0, len(keys), w):
            chunk = keys[start : start + w]
            self.buckets[chunk[0]] = chunk
            self.xfast.insert(chunk[0])
        self.size = len(keys)
        if len(self.buckets) > 1:
            last = self.xfast.levels[0][0][1]
            if len(self.buckets[last]) < self._lo:
                self._merge(self.xfast.prev[last])

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        rep = self.xfast.minimum()
        while rep is not None:
            yield from self.buckets[rep]
            rep = self.xfast.next[rep]

    def __contains__(self, key: int) -> bool:
        rep, _ = self.xfast.neighbours(key)
        if rep is None:
            return False
        b = self.buckets[rep]
        i = bisect_left(b, key)
        return i < len(b) and b[i] == key

    def _check(self, key: int) -> None:
        if not 0 <= key < (1 << self.universe_bits):
            raise KeyOutOfUniverse(f"{key} not in [0, 2^{self.universe_bits})")

    def _set_rep(self, old: int, bucket: list[int]) -> None:
        if bucket[0] != old:
            self.xfast.delete(old)
            del self.buckets[old]
            self.buckets[bucket[0]] = bucket
            self.xfast.insert(bucket[0])

    def insert(self, key: int) -> None:
        self._check(key)
        rep, _ = self.xfast.neighbours(key)
        if rep is None:
            first = self.xfast.minimum()
            if first is None:
                self.buckets[key] = [key]
                self.xfast.insert(key)
                self.size = 1
                return
            rep = first
        bucket = self.buckets[rep]
        i = bisect_left(bucket, key)
        if i < len(bucket) and bucket[i] == key:
            return
        bucket.insert(i, key)
        self.size += 1
        self._set_rep(rep, bucket)
        if len(bucket) > self._hi:
            self._split(bucket[0])

    def _split(self, rep: int) -> None:
        bucket = self.buckets[rep]
        half = len(bucket) // 2
        left, right = bucket[:half], bucket[half:]
        self.buckets[rep] = left
        self.buckets[right[0]] = right
        self.xfast.insert(right[0])

    def _merge(self, rep: int) -> None:
        """Merge the bucket at ``rep`` with its right neighbour, re-split if large."""
        nxt = self.xfast.next[rep]
        if nxt is None:
            return
        merged = self.buckets[rep] + self.buckets.pop(nxt)
        self.xfast.delete(nxt)
        self.buckets[rep] = merged
        if len(merged) > self._hi:
            self._split(rep)

    def delete(self, key: int) -> None:
        if not 0 <= key < (1 << self.universe_bits):
            return
        rep, _ = self.xfast.neighbours(key)
        if rep is None:
            return
        bucket = self.buckets[rep]
        i = bisect_left(bucket, key)
        if i == len(bucket) or bucket[i] != key:
            return
        del bucket[i]
        self.size -= 1
        if not bucket:
            del self.buckets[rep]
            self.xfast.delete(rep)
            return
        self._set_rep(rep, bucket)
        rep = bucket[0]
        if len(bucket) < self._lo and len(self.buckets) > 1:
            nxt = self.xfast.next[rep]
            self._merge(rep if nxt is not None else self.xfast.prev[rep])

    def predecessor(self, q: int) -> int | None:
        """Largest stored key <= q."""
        if q < 0:
            return None
        q = min(q, (1 << self.universe_bits) - 1)
        rep, _ = self.xfast.neighbours(q)
        if rep is None:
            return None
        bucket = self.buckets[rep]
        return bucket[bisect_right(bucket, q) - 1]

    def successor(self, q: int) -> int | None:
        """Smallest stored key >= q."""
        if q >= (1 << self.universe_bits):
            return None
        q = max(q, 0)
        rep, succ_rep = self.xfast.neighbours(q)
        if rep is None:
            return succ_rep
        bucket = self.buckets[rep]
        i = bisect_left(bucket, q)
        if i < len(bucket):
            return bucket[i]
        nxt = self.xfast.next[rep]
        return None if nxt is None else nxt

    def bucket_sizes(self) -> list[int]:
        return [len(self.buckets[r]) for r in self._reps()]

    def _reps(self) -> list[int]:
        out = []
        rep = self.xfast.minimum()
        while rep is not None:
            out.append(rep)
            rep = self.xfast.next[rep]
        return out

    def keys(self) -> list[int]:
        return list(self)


def bits_for(count: int) -> int:
    """Universe bits needed to hold keys ``0..count-1``."""
    return max(1, (max(count, 1) - 1).bit_length())


__all__ = ["XFastTrie", "YFastTrie", "bits_for"]
