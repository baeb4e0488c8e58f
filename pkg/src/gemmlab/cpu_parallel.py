"""Multithreaded CPU matrix multiplication.

The (i, j) output space is flattened into rows*cols independent work units
and partitioned into contiguous chunks handed to a pool of worker threads.
Each unit computes exactly one output element with the same k-ascending
float32 inner loop as the sequential kernel, so the result is bitwise
identical to `matmul_sequential` for every worker count, chunk size, and
schedule.

The per-chunk kernel is compiled with the GIL released; worker threads are
plain `threading` threads, which keeps the partitioning and scheduling logic
in inspectable Python.
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Matrix, ShapeError

log = logging.getLogger("gemmlab")

THREADS_ENV_VAR = "GEMMLAB_THREADS"

SCHEDULE_STATIC = "static"
SCHEDULE_DYNAMIC = "dynamic"
_SCHEDULES = (SCHEDULE_STATIC, SCHEDULE_DYNAMIC)


class InvalidConfigError(ValueError):
    """A CpuParallelConfig field is out of range."""


def default_workers() -> int:
    """Worker count from GEMMLAB_THREADS, else the hardware thread count."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is not None:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        log.warning("ignoring invalid %s=%r", THREADS_ENV_VAR, raw)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class CpuParallelConfig:
    """Worker-pool settings for `matmul_parallel_cpu`.

    workers: thread count; None picks GEMMLAB_THREADS or the hardware count.
    chunk: work units (output elements) per dispatch; None picks one output
        row per unit.
    schedule: "static" assigns chunks round-robin up front; "dynamic" lets
        idle workers pull the next chunk from a shared queue.
    """

    workers: int | None = None
    chunk: int | None = None
    schedule: str = SCHEDULE_STATIC

    def __post_init__(self):
        if self.workers is not None and self.workers < 1:
            raise InvalidConfigError(f"workers must be >= 1, got {self.workers}")
        if self.chunk is not None and self.chunk < 1:
            raise InvalidConfigError(f"chunk must be >= 1, got {self.chunk}")
        if self.schedule not in _SCHEDULES:
            raise InvalidConfigError(
                f"schedule must be one of {_SCHEDULES}, got {self.schedule!r}"
            )


def chunk_ranges(total: int, chunk: int) -> list[tuple[int, int]]:
    """Cover [0, total) with contiguous [start, end) ranges of width chunk."""
    return [(start, min(start + chunk, total))
            for start in range(0, total, chunk)]


def static_assignment(num_chunks: int, workers: int) -> list[list[int]]:
    """Round-robin chunk indices over workers (chunk c goes to worker c % W)."""
    plan: list[list[int]] = [[] for _ in range(workers)]
    for c in range(num_chunks):
        plan[c % workers].append(c)
    return plan


@njit(cache=True, nogil=True)
def _chunk_kernel(a, b, out, cols, kdim, start, end):  # pragma: no cover
    for idx in range(start, end):
        i = idx // cols
        j = idx % cols
        acc = np.float32(0.0)
        for k in range(kdim):
            acc += a[i * kdim + k] * b[k * cols + j]
        out[idx] = acc


def matmul_parallel_cpu(a: Matrix, b: Matrix,
                        cfg: CpuParallelConfig | None = None) -> Matrix:
    """Multithreaded C = A*B, bitwise identical to `matmul_sequential`."""
    if a.cols != b.rows:
        raise ShapeError(
            f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}"
        )
    if cfg is None:
        cfg = CpuParallelConfig()
    workers = cfg.workers if cfg.workers is not None else default_workers()
    chunk = cfg.chunk if cfg.chunk is not None else b.cols

    total = a.rows * b.cols
    out = np.empty(total, dtype=np.float32)
    ranges = chunk_ranges(total, chunk)

    def run_chunks(indices):
        for c in indices:
            start, end = ranges[c]
            _chunk_kernel(a.data, b.data, out, b.cols, a.cols, start, end)

    workers = min(workers, len(ranges))
    if workers == 1:
        run_chunks(range(len(ranges)))
        return Matrix(a.rows, b.cols, out)

    if cfg.schedule == SCHEDULE_STATIC:
        plans = static_assignment(len(ranges), workers)
        targets = [(run_chunks, (plan,)) for plan in plans if plan]
    else:
        cursor = iter(range(len(ranges)))
        lock = threading.Lock()

        def pull_and_run():
            while True:
                with lock:
                    c = next(cursor, None)
                if c is None:
                    return
                start, end = ranges[c]
                _chunk_kernel(a.data, b.data, out, b.cols, a.cols, start, end)

        targets = [(pull_and_run, ()) for _ in range(workers)]

    failures: list[BaseException] = []

    def guarded(fn, args):
        try:
            fn(*args)
        except BaseException as exc:  # noqa: BLE001 - re-raised on the caller
            failures.append(exc)

    threads = [threading.Thread(target=guarded, args=(fn, args))
               for fn, args in targets]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        raise failures[0]
    return Matrix(a.rows, b.cols, out)
