"""Benchmark harness for the coefficient-computation methods.

Each (method, d) row reports the median wall time of the core coefficient
computation over at least three repetitions.  The FFT sampling step is
timed separately (it is asymptotically negligible and common to all
methods), and the tensor-operator baseline is timed cold, including all of
its coupling-coefficient work.  Absolute times are hardware-specific; the
interesting outputs are ratios and fitted log-log slopes.
"""

from __future__ import annotations

import statistics
import time
import tracemalloc
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .angular import SpinDimension, jy_eigenbasis
from .cgc import expansion_coefficients
from .fourier import fourier_coefficients_method_c
from .kcache import CacheError, fourier_coefficients_method_d, open_cache
from .parity import build_parity
from .sampling import sample_fft
from .states import random_density

__all__ = ["BenchRow", "BenchReport", "cache_directory", "default_grid_size", "run_bench"]

METHODS = ("b", "c", "d")


def cache_directory(root, d: int, s: float) -> Path:
    """Per-(d, s) cache directory inside a cache root."""
    return Path(root) / f"d{int(d):04d}_s{float(s)!r}"


def default_grid_size(dim: SpinDimension) -> int:
    """max(512, next power of two >= 4J+2)."""
    n = 512
    while n < 2 * dim.d:
        n *= 2
    return n


@dataclass
class BenchRow:
    method: str
    d: int
    time_s: float
    fft_s: float
    peak_mem_mb: float
    status: str = "ok"


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    repetitions: int = 3

    def to_csv(self, stream) -> None:
        stream.write("method,d,time_s,fft_s,peak_mem_mb,status\n")
        for row in self.rows:
            stream.write(f"{row.method},{row.d},{row.time_s:.9g},{row.fft_s:.9g},"
                         f"{row.peak_mem_mb:.6g},{row.status}\n")
        for method, slope in sorted(self.slopes.items()):
            stream.write(f"# loglog_slope {method} {slope:.4f}\n")


def _median_time(func, repetitions: int) -> float:
    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def _peak_mb(func) -> float:
    tracemalloc.start()
    try:
        func()
        return tracemalloc.get_traced_memory()[1] / 1e6
    finally:
        tracemalloc.stop()


def _thread_limiter(parallel: bool):
    """Single-thread pin for reproducible timings; a flag lifts it."""
    if parallel:
        return nullcontext()
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=1)
    except ImportError:
        return nullcontext()


def run_bench(dims, methods=("c", "d"), repetitions: int = 3, s: float = 0.0,
              cache_root=None, seed: int = 2047, parallel: bool = False,
              measure_memory: bool = True) -> BenchReport:
    """Time the coefficient computation for every (method, d) pair.

    Method d rows need a matching cache under ``cache_root`` and are marked
    ``skipped`` (not fatal) when it is absent.
    """
    methods = [m.lower() for m in methods]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    if repetitions < 3:
        raise ValueError("medians need at least 3 repetitions")

    report = BenchReport(repetitions=repetitions)
    with _thread_limiter(parallel):
        for d in dims:
            dim = SpinDimension.from_d(d)
            rho = random_density(dim, seed)
            basis = jy_eigenbasis(dim)
            parity = build_parity(dim, s)
            n = default_grid_size(dim)
            table = fourier_coefficients_method_c(rho, parity, basis)
            fft_s = _median_time(lambda: sample_fft(table, n), repetitions)

            for method in methods:
                if method == "c":
                    work = lambda: fourier_coefficients_method_c(rho, parity, basis)
                elif method == "b":
                    work = lambda: expansion_coefficients(rho)
                else:
                    if cache_root is None:
                        report.rows.append(BenchRow(method, dim.d, float("nan"),
                                                    fft_s, 0.0, "skipped"))
                        continue
                    try:
                        cache = open_cache(cache_directory(cache_root, dim.d, s),
                                           dim.d, s)
                    except CacheError:
                        report.rows.append(BenchRow(method, dim.d, float("nan"),
                                                    fft_s, 0.0, "skipped"))
                        continue
                    work = lambda: fourier_coefficients_method_d(rho, cache)
                time_s = _median_time(work, repetitions)
                peak = _peak_mb(work) if measure_memory else 0.0
                report.rows.append(BenchRow(method, dim.d, time_s, fft_s, peak))

    for method in methods:
        pts = [(row.d, row.time_s) for row in report.rows
               if row.method == method and row.status == "ok"]
        if len(pts) >= 2:
            log_d = np.log([p[0] for p in pts])
            log_t = np.log([p[1] for p in pts])
            report.slopes[method] = float(np.polyfit(log_d, log_t, 1)[0])
    return report
