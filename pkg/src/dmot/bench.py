"""Timing harness: preprocessing cost, query time against n and k, file size."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .instances import generate
from .metric import build_metric
from .partition import PartitionConfig
from .persistence import encode
from .spanner import build_pseudospanner
from .structure import Structure, preprocess


@dataclass
class BenchRow:
    family: str
    n: int
    k: int
    preprocess_s: float
    query_median_s: float
    file_bytes: int
    entries: int


def time_queries(st: Structure, k: int, trials: int, rng: np.random.Generator) -> float:
    """Median wall time of extract plus pseudospanner for random ``S`` of size ``k``."""
    k = min(k, st.n)
    times = []
    for _ in range(trials):
        S = rng.choice(st.n, k, replace=False)
        t0 = time.perf_counter()
        build_pseudospanner(st.extract(S), st.config)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_bench(
    families=("uniform2d",),
    sizes=(1024, 2048, 4096),
    ks=(32,),
    *,
    trials: int = 30,
    seed: int = 0,
    config: PartitionConfig | None = None,
) -> list[BenchRow]:
    rows = []
    for fam in families:
        for n in sizes:
            ms = build_metric(points=generate(fam, n, seed))
            t0 = time.perf_counter()
            st = preprocess(ms, config, seed=seed)
            pre = time.perf_counter() - t0
            data, entries = encode(st)
            del ms
            rng = np.random.default_rng(seed + n)
            for k in ks:
                rows.append(
                    BenchRow(
                        family=fam,
                        n=n,
                        k=min(k, n),
                        preprocess_s=pre,
                        query_median_s=time_queries(st, k, trials, rng),
                        file_bytes=len(data),
                        entries=entries,
                    )
                )
    return rows


def growth(rows: list[BenchRow], *, along: str) -> dict[str, list[float]]:
    """Ratio of consecutive median query times per family, as ``along`` ('n' or 'k') grows."""
    out: dict[str, list[float]] = {}
    for fam in sorted({r.family for r in rows}):
        if along == "n":
            groups: dict[int, list[BenchRow]] = {}
            for r in rows:
                if r.family == fam:
                    groups.setdefault(r.k, []).append(r)
        else:
            groups = {}
            for r in rows:
                if r.family == fam:
                    groups.setdefault(r.n, []).append(r)
        for key, grp in sorted(groups.items()):
            grp.sort(key=lambda r: getattr(r, along))
            ts = [r.query_median_s for r in grp]
            out[f"{fam}/{'k' if along == 'n' else 'n'}={key}"] = [b / a for a, b in zip(ts, ts[1:])]
    return out


def render(rows: list[BenchRow], fmt: str = "human") -> str:
    if fmt == "json":
        return json.dumps(
            {
                "schema": 1,
                "command": "bench",
                "rows": [asdict(r) for r in rows],
                "growth_n": growth(rows, along="n"),
                "growth_k": growth(rows, along="k"),
            },
            indent=2,
        )
    head = f"{'family':<12} {'n':>7} {'k':>5} {'prep s':>9} {'query ms':>9} {'bytes':>11} {'entries':>9}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r.family:<12} {r.n:>7} {r.k:>5} {r.preprocess_s:>9.3f} "
            f"{r.query_median_s * 1e3:>9.3f} {r.file_bytes:>11} {r.entries:>9}"
        )
    for label, g in (("growth over n", growth(rows, along="n")), ("growth over k", growth(rows, along="k"))):
        for key, vals in g.items():
            if vals:
                lines.append(f"{label} {key}: " + " ".join(f"{v:.2f}x" for v in vals))
    return "\n".join(lines)
