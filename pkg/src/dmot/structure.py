"""Query-phase handle: the compressed tree plus its navigation index.

A :class:`Structure` never holds a metric. Everything a query needs was
computed during preprocessing and is either stored here or rebuilt from the
persisted arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .extraction import ExtractedTree, extract_subtree
from .hierarchy import CompressedTree, compress
from .metric import MetricSpace
from .partition import PartitionConfig, build_partition_tree
from .paths import PathIndex


@dataclass(eq=False)
class Structure:
    tree: CompressedTree
    nav: PathIndex
    seed: int = 0
    fl: Any = None  # optional FLIndex kept alongside the tree

    @classmethod
    def from_tree(cls, tree: CompressedTree, seed: int = 0) -> "Structure":
        return cls(tree=tree, nav=PathIndex(tree), seed=seed)

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def config(self) -> PartitionConfig:
        return self.tree.config

    def radius(self, j: int) -> float:
        return self.tree.radius(j)

    def meet(self, u: int, v: int) -> int:
        return self.nav.meet(u, v)

    def approx_distance(self, u: int, v: int) -> float:
        """Lower bound on ``d(u, v)``, tight up to the factor ``config.distance_factor``."""
        if u == v:
            return 0.0
        return self.radius(self.meet(u, v) - 1)

    def level_ancestor_jump(self, v: int, j: int) -> int:
        return self.nav.level_ancestor_jump(v, j)

    def meeting_jump(self, v: int, i: int):
        return self.nav.meeting_jump(v, i)

    def known_sets_in_range(self, x: int, i: int, j: int, anchor: int | None = None):
        return self.nav.known_sets_in_range(x, i, j, anchor)

    def extract(self, S) -> ExtractedTree:
        return extract_subtree(self.nav, S)


def preprocess(ms: MetricSpace, config: PartitionConfig | None = None, *, seed: int = 0) -> Structure:
    """Build the partition, compress it and index it for queries."""
    return Structure.from_tree(compress(build_partition_tree(ms, config)), seed=seed)
