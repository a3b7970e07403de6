"""Finite metric spaces used during preprocessing.

A :class:`MetricSpace` is the only object in the package that can evaluate
distances. Query-phase modules never receive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import (
    AsymmetricMatrix,
    DuplicatePoint,
    InvalidId,
    MetricError,
    NegativeDistance,
    TriangleViolation,
)

FULL_TRIANGLE_CHECK_MAX_N = 64


@dataclass(frozen=True)
class MetricParams:
    lambda_hat: int
    stretch: float
    r0: float


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Immutable metric on ``n`` points, backed by coordinates or a matrix."""

    n: int
    points: np.ndarray | None = None
    matrix: np.ndarray | None = None
    min_dist: float = field(default=0.0)
    max_dist: float = field(default=0.0)

    @property
    def source(self) -> str:
        return "points" if self.points is not None else "matrix"

    @property
    def dim(self) -> int | None:
        return None if self.points is None else self.points.shape[1]

    def _check(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise InvalidId(f"point id {u} outside [0, {self.n})")

    def distance(self, u: int, v: int) -> float:
        self._check(u)
        self._check(v)
        if u == v:
            return 0.0
        if self.matrix is not None:
            return float(self.matrix[u, v])
        return float(np.linalg.norm(self.points[u] - self.points[v]))

    def block(self, rows, cols) -> np.ndarray:
        """Distance sub-matrix ``d(rows[i], cols[j])``."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        diff = self.points[rows][:, None, :] - self.points[cols][None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def condensed(self) -> np.ndarray:
        """Upper-triangle distances in ``scipy.spatial.distance.pdist`` order."""
        if self.matrix is not None:
            iu = np.triu_indices(self.n, k=1)
            return self.matrix[iu]
        return pdist(self.points)

    def full_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return squareform(pdist(self.points))


def build_metric(points=None, matrix=None, *, seed: int = 0) -> MetricSpace:
    """Validate the input and return a :class:`MetricSpace`.

    Exactly one of ``points`` (n x dim coordinates, Euclidean distance) or
    ``matrix`` (n x n distances) must be given.
    """
    if (points is None) == (matrix is None):
        raise MetricError("give exactly one of points or matrix")
    if points is not None:
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise MetricError("points must be a 2-d array")
        n = pts.shape[0]
        if n < 2:
            raise MetricError("need at least two points")
        if not np.all(np.isfinite(pts)):
            raise MetricError("coordinates must be finite")
        cond = pdist(pts)
        if np.any(cond == 0.0):
            i, j = _condensed_pair(n, int(np.flatnonzero(cond == 0.0)[0]))
            raise DuplicatePoint(f"points {i} and {j} coincide")
        pts.setflags(write=False)
        return MetricSpace(n=n, points=pts, min_dist=float(cond.min()), max_dist=float(cond.max()))

    mat = np.array(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise MetricError("matrix must be square")
    n = mat.shape[0]
    if n < 2:
        raise MetricError("need at least two points")
    if not np.all(np.isfinite(mat)):
        raise MetricError("matrix entries must be finite")
    if np.any(mat < 0):
        raise NegativeDistance("negative matrix entry")
    if not np.array_equal(mat, mat.T):
        i, j = np.argwhere(mat != mat.T)[0]
        raise AsymmetricMatrix(f"d({i},{j}) != d({j},{i})")
    if np.any(np.diag(mat) != 0):
        raise MetricError("diagonal must be zero")
    off = mat[~np.eye(n, dtype=bool)]
    if np.any(off == 0):
        i, j = np.argwhere((mat == 0) & ~np.eye(n, dtype=bool))[0]
        raise DuplicatePoint(f"points {i} and {j} at distance 0")
    _check_triangle(mat, np.random.default_rng(seed))
    mat.setflags(write=False)
    return MetricSpace(n=n, matrix=mat, min_dist=float(off.min()), max_dist=float(off.max()))


def _condensed_pair(n: int, k: int) -> tuple[int, int]:
    i = int(n - 2 - math.floor(math.sqrt(-8 * k + 4 * n * (n - 1) - 7) / 2.0 - 0.5))
    j = int(k + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2)
    return i, j


def _check_triangle(mat: np.ndarray, rng: np.random.Generator) -> None:
    n = mat.shape[0]
    tol = 1e-12 * max(1.0, float(mat.max()))
    if n <= FULL_TRIANGLE_CHECK_MAX_N:
        for k in range(n):
            bad = mat > mat[:, k][:, None] + mat[k, :][None, :] + tol
            if bad.any():
                i, j = np.argwhere(bad)[0]
                raise TriangleViolation(f"d({i},{j}) > d({i},{k}) + d({k},{j})")
        return
    # sampled check, 10 n^2 triples
    m = 10 * n * n
    for start in range(0, m, 1 << 20):
        size = min(1 << 20, m - start)
        i, j, k = rng.integers(0, n, size=(3, size))
        bad = mat[i, j] > mat[i, k] + mat[k, j] + tol
        if bad.any():
            t = int(np.flatnonzero(bad)[0])
            raise TriangleViolation(f"d({i[t]},{j[t]}) > d({i[t]},{k[t]}) + d({k[t]},{j[t]})")


def greedy_cover_count(dmat: np.ndarray, center: int, r: float) -> int:
    """Number of r-balls the greedy cover uses on B(center, 2r)."""
    ball = np.flatnonzero(dmat[center] <= 2 * r)
    uncovered = np.ones(len(ball), dtype=bool)
    sub = dmat[np.ix_(ball, ball)]
    count = 0
    while uncovered.any():
        c = int(np.flatnonzero(uncovered)[0])
        uncovered &= sub[c] > r
        count += 1
    return count


def compute_params(ms: MetricSpace, *, seed: int = 0, centers: int = 32, radii: int = 24) -> MetricParams:
    """Stretch, base radius and a sampled greedy estimate of the doubling constant."""
    rng = np.random.default_rng(seed)
    dmat = ms.full_matrix() if ms.n <= 2048 else None
    if dmat is None:
        idx = np.sort(rng.choice(ms.n, size=2048, replace=False))
        dmat = ms.block(idx, idx)
    m = dmat.shape[0]
    sample = np.sort(rng.choice(m, size=min(m, centers), replace=False))
    scales = np.geomspace(ms.min_dist / 2, ms.max_dist, num=radii)
    lam = 2
    for c in sample:
        for r in scales:
            lam = max(lam, greedy_cover_count(dmat, int(c), float(r)))
    return MetricParams(lambda_hat=int(lam), stretch=ms.max_dist / ms.min_dist, r0=ms.min_dist / 2)


def read_points(path: str | Path) -> np.ndarray:
    """Parse one point per line, comma or whitespace separated."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(t) for t in line.replace(",", " ").split()])
    if len({len(r) for r in rows}) > 1:
        raise MetricError("points must share one dimension")
    return np.array(rows, dtype=np.float64)


def read_matrix(path: str | Path) -> np.ndarray:
    """First line ``n``, then ``n`` rows of ``n`` reals."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    n = int(lines[0].split()[0])
    rows = [[float(t) for t in ln.replace(",", " ").split()] for ln in lines[1 : n + 1]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise MetricError("matrix file has wrong shape")
    return np.array(rows, dtype=np.float64)


def load_metric(path: str | Path, input_format: str = "points") -> MetricSpace:
    if input_format == "points":
        return build_metric(points=read_points(path))
    if input_format == "matrix":
        return build_metric(matrix=read_matrix(path))
    raise ValueError(f"unknown input format {input_format!r}")
