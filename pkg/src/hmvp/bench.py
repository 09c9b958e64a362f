"""Benchmark sweep: recursive solver vs dense oracle across levels.

Timed regions exclude instance generation and validation. Each measurement
is the median of several repetitions after one warm-up run, so first-call
effects (allocator, code paths) do not land in the numbers. Per-instance
failures are recorded in the `error` column instead of aborting the sweep.
The sweep itself runs sequentially; timings from interleaved runs would
not be comparable.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .covariance import ValidationConfig, to_dense
from .errors import HmvpError
from .generator import GeneratorConfig, generate
from .hierarchy import template_for
from .oracle import dense_min_variance
from .reduction import build_chain
from .solver import compute_weights, normalize

CSV_HEADER = "level,n,recursive_s,dense_s,inversions,max_dev,error"
DEFAULT_BENCH_COUPLING = 0.25


@dataclass(frozen=True)
class BenchRecord:
    level: int
    n_assets: int
    recursive_time: float
    dense_time: float
    inversions_3x3: int
    max_weight_deviation: float
    error: str = ""

    def csv_row(self) -> str:
        if self.error:
            return f"{self.level},{self.n_assets},,,,,{self.error}"
        return (
            f"{self.level},{self.n_assets},{self.recursive_time:.9f},"
            f"{self.dense_time:.9f},{self.inversions_3x3},"
            f"{self.max_weight_deviation:.3e},"
        )


def _median_time(fn, reps: int) -> float:
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def run_bench(levels: list[int],
              seeds_per_level: int = 1,
              reps: int = 5,
              coupling: float = DEFAULT_BENCH_COUPLING,
              backend: str = "auto",
              config: ValidationConfig | None = None) -> list[BenchRecord]:
    """Time both solvers on generated instances; one record per (level, seed)."""
    records = []
    for level in levels:
        template = template_for(level)
        n = template.node_count(level)
        for offset in range(seeds_per_level):
            seed = 1000 * level + offset
            try:
                cov = generate(
                    GeneratorConfig(level=level, seed=seed, coupling_scale=coupling),
                    template,
                )
                dense = to_dense(cov)

                def solve_recursive():
                    chain = build_chain(cov, config)
                    weights = compute_weights(chain, config)
                    return normalize(weights), chain

                def solve_dense():
                    return dense_min_variance(dense, config)

                with kernels.using_backend(backend):
                    w_rec, chain = solve_recursive()  # warm-up, kept for deviation
                    inversions = chain.inversion_count
                    rec_t = _median_time(solve_recursive, reps)
                w_den = solve_dense()  # warm-up
                den_t = _median_time(solve_dense, reps)
                dev = float(
                    np.max(np.abs(w_rec.values - w_den.weights))
                    / np.max(np.abs(w_den.weights))
                )
                records.append(BenchRecord(level, n, rec_t, den_t, inversions, dev))
            except HmvpError as exc:
                records.append(
                    BenchRecord(level, n, float("nan"), float("nan"), 0,
                                float("nan"), error=str(exc).replace(",", ";"))
                )
    return records


def to_csv(records: list[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(record.csv_row() for record in records)
    return "\n".join(lines) + "\n"


def write_csv(records: list[BenchRecord], path: str | Path) -> None:
    Path(path).write_text(to_csv(records))
