"""Point-set generators used by the CLI, the benchmark and the tests."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

FAMILIES = ("uniform2d", "clustered2d", "grid")

# standard deviation of every blob in the clustered family
CLUSTER_SIGMA = 0.02


def uniform2d(n: int, seed: int = 0) -> np.ndarray:
    """``n`` points drawn uniformly from the unit square."""
    return np.random.default_rng(seed).random((n, 2))


def clustered2d(n: int, seed: int = 0, clusters: int | None = None) -> np.ndarray:
    """Gaussian blobs of standard deviation ``CLUSTER_SIGMA`` around uniform centres.

    Points are clipped to the unit square; the default uses about one blob
    per 64 points.
    """
    rng = np.random.default_rng(seed)
    c = clusters or max(1, n // 64)
    centres = rng.random((c, 2))
    owner = rng.integers(0, c, size=n)
    pts = centres[owner] + rng.normal(scale=CLUSTER_SIGMA, size=(n, 2))
    pts = np.clip(pts, 0.0, 1.0)
    # clipping can in principle collide two points on a corner; nudge repeats
    _, first = np.unique(pts, axis=0, return_index=True)
    if len(first) < n:
        dup = np.setdiff1d(np.arange(n), first)
        pts[dup] = rng.random((len(dup), 2))
    return pts


def grid(n: int, seed: int = 0) -> np.ndarray:
    """First ``n`` points of the integer lattice, row by row on a square of side ``ceil(sqrt n)``."""
    side = max(1, math.ceil(math.sqrt(n)))
    idx = np.arange(n)
    return np.stack([idx % side, idx // side], axis=1).astype(np.float64)


def generate(family: str, n: int, seed: int = 0) -> np.ndarray:
    if family == "uniform2d":
        return uniform2d(n, seed)
    if family == "clustered2d":
        return clustered2d(n, seed)
    if family == "grid":
        return grid(n, seed)
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def write_points(path: str | Path, pts: np.ndarray) -> None:
    np.savetxt(path, pts, fmt="%.17g")
