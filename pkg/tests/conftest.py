from __future__ import annotations

import functools

import numpy as np
import pytest

from dmot.metric import build_metric
from dmot.oracles import LiteralHierarchy
from dmot.partition import PartitionConfig
from dmot.structure import preprocess

CONFIGS = {
    "t2e2": PartitionConfig(),
    "t15e3": PartitionConfig(tau=1.5, eta=3),
    "eps05": PartitionConfig.from_epsilon(0.5),
}


def scattered(n: int, seed: int) -> np.ndarray:
    """Points with widely varying scales, to exercise many levels."""
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 2)) * np.exp(rng.normal(size=(n, 1)) * 2)


@functools.lru_cache(maxsize=None)
def instance(n: int, seed: int, cfg: str = "t2e2", family: str = "uniform"):
    pts = np.random.default_rng(seed).random((n, 2)) if family == "uniform" else scattered(n, seed)
    ms = build_metric(points=pts)
    st = preprocess(ms, CONFIGS[cfg])
    return ms, st


@functools.lru_cache(maxsize=None)
def literal(n: int, seed: int, cfg: str = "t2e2", family: str = "uniform"):
    ms, st = instance(n, seed, cfg, family)
    c = st.config
    return LiteralHierarchy.build(ms.full_matrix(), c.tau, c.eta, c.r0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
