"""Benchmark sweep execution and derived speedup metrics.

A sweep is declared as a `BenchmarkPlan`, executed cell by cell (one
backend at one size at a time, strictly serially so cells cannot contaminate
each other's timings), and reduced to a `SpeedupTable` whose six data
columns mirror the report layout: three timings and three speedup ratios
S = T_reference / T_candidate.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import statistics
import time
from dataclasses import dataclass, field

from .core import Matrix, bitwise_equal, compare, matmul_sequential, random_matrix
from .cpu_parallel import CpuParallelConfig, matmul_parallel_cpu
from .gpu_host import (
    GpuTiming,
    KernelVariant,
    TimingScope,
    matmul_gpu,
    open_device,
)

log = logging.getLogger("gemmlab")

DEFAULT_SIZES = (128, 256, 512, 1024, 2048, 3072, 4096)
DEFAULT_VERIFY_CAP = 1024

# Relative tolerance for GPU-vs-oracle verification: tile-phase reordering
# and possible multiply-add fusion on device, over <= 4096 all-positive
# summands in [0, 1), stays far inside 1e-3.
GPU_VERIFY_REL_TOL = 1e-3

STATUS_OK = "ok"
STATUS_SKIPPED = "skipped"
STATUS_FAILED = "failed"


class ConfigError(ValueError):
    """A BenchmarkPlan field is invalid."""


class MeasurementCorruptError(ValueError):
    """A timing used for speedup computation is zero or negative."""


class Backend(enum.Enum):
    SEQUENTIAL = "seq"
    PARALLEL_CPU = "cpu"
    GPU_NAIVE = "gpu-naive"
    GPU_TILED = "gpu-tiled"


_GPU_BACKENDS = (Backend.GPU_NAIVE, Backend.GPU_TILED)
_BACKEND_ORDER = {b: i for i, b in enumerate(Backend)}


@dataclass(frozen=True)
class BenchmarkPlan:
    """Declarative sweep description.

    Backends always execute in canonical order (sequential first) so the
    oracle product can be reused for verification of the other backends.
    B's seed is seed+1 so the two inputs differ.
    """

    sizes: tuple[int, ...] = DEFAULT_SIZES
    seed: int = 42
    repetitions: int = 3
    warmup_runs: int = 1
    backends: tuple[Backend, ...] = (
        Backend.SEQUENTIAL, Backend.PARALLEL_CPU, Backend.GPU_TILED
    )
    timing_scope: TimingScope = TimingScope.TRANSFERS_AND_KERNEL
    max_sequential_size: int | None = None
    verify_cap: int = DEFAULT_VERIFY_CAP
    cpu: CpuParallelConfig = field(default_factory=CpuParallelConfig)

    def __post_init__(self):
        sizes = tuple(self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise ConfigError("sizes must be non-empty")
        if any(n < 1 for n in sizes):
            raise ConfigError(f"sizes must be positive, got {sizes}")
        if any(b >= a for b, a in zip(sizes, sizes[1:])):
            raise ConfigError(f"sizes must be strictly increasing, got {sizes}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.warmup_runs < 0:
            raise ConfigError(f"warmup_runs must be >= 0, got {self.warmup_runs}")
        backends = tuple(self.backends)
        if not backends:
            raise ConfigError("backends must be non-empty")
        if len(set(backends)) != len(backends):
            raise ConfigError(f"duplicate backends in {backends}")
        object.__setattr__(
            self, "backends",
            tuple(sorted(backends, key=_BACKEND_ORDER.__getitem__)),
        )
        if not isinstance(self.timing_scope, TimingScope):
            raise ConfigError(f"invalid timing scope {self.timing_scope!r}")
        if self.max_sequential_size is not None and self.max_sequential_size < 1:
            raise ConfigError("max_sequential_size must be >= 1 when set")
        if self.verify_cap < 0:
            raise ConfigError(f"verify_cap must be >= 0, got {self.verify_cap}")


@dataclass(frozen=True)
class Measurement:
    """One (backend, size) cell of a sweep.

    verified is None when the oracle check was not attempted (size above the
    verification cap, or the cell did not execute).
    """

    backend: Backend
    n: int
    status: str
    times_ms: tuple[float, ...] = ()
    median_ms: float | None = None
    min_ms: float | None = None
    gpu_phases: GpuTiming | None = None
    verified: bool | None = None
    input_digest: str = ""
    detail: str = ""

    def __post_init__(self):
        if self.status not in (STATUS_OK, STATUS_SKIPPED, STATUS_FAILED):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == STATUS_OK:
            if not self.times_ms:
                raise ValueError("ok measurement requires timed repetitions")
            if self.median_ms is None or self.min_ms is None:
                raise ValueError("ok measurement requires median and min")
            if not (min(self.times_ms) <= self.median_ms <= max(self.times_ms)):
                raise ValueError("median outside observed range")


@dataclass(frozen=True)
class SpeedupRow:
    n: int
    seq_ms: float | None = None
    par_cpu_ms: float | None = None
    gpu_ms: float | None = None
    speedup_cpu_vs_seq: float | None = None
    speedup_gpu_vs_cpu: float | None = None
    speedup_gpu_vs_seq: float | None = None


@dataclass(frozen=True)
class SpeedupTable:
    rows: tuple[SpeedupRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))


def _input_digest(a: Matrix, b: Matrix) -> str:
    h = hashlib.sha256()
    h.update(a.data.tobytes())
    h.update(b.data.tobytes())
    return h.hexdigest()


def _gpu_variant(backend: Backend) -> KernelVariant:
    return (KernelVariant.NAIVE if backend is Backend.GPU_NAIVE
            else KernelVariant.TILED)


def run_plan(plan: BenchmarkPlan) -> list[Measurement]:
    """Execute the sweep and return one Measurement per (size, backend).

    GPU backends on a machine without a device are downgraded to skipped
    cells with a warning; a backend failure is recorded in its cell and the
    sweep continues.
    """
    device = None
    gpu_requested = [b for b in plan.backends if b in _GPU_BACKENDS]
    if gpu_requested:
        device = open_device()
        if device is None:
            log.warning(
                "no GPU compute device available; skipping: %s",
                ", ".join(b.value for b in gpu_requested),
            )

    results: list[Measurement] = []
    for n in plan.sizes:
        a = random_matrix(n, plan.seed)
        b = random_matrix(n, plan.seed + 1)
        digest = _input_digest(a, b)

        oracle: list[Matrix | None] = [None]

        def get_oracle() -> Matrix:
            if oracle[0] is None:
                oracle[0] = matmul_sequential(a, b)
            return oracle[0]

        for backend in plan.backends:
            results.append(
                _run_cell(plan, backend, n, a, b, digest, device, get_oracle,
                          oracle)
            )
    return results


def _run_cell(plan, backend, n, a, b, digest, device, get_oracle, oracle):
    if backend is Backend.SEQUENTIAL and (
        plan.max_sequential_size is not None and n > plan.max_sequential_size
    ):
        return Measurement(
            backend=backend, n=n, status=STATUS_SKIPPED, input_digest=digest,
            detail=f"size {n} above max-sequential-size "
                   f"{plan.max_sequential_size}",
        )
    if backend in _GPU_BACKENDS and device is None:
        return Measurement(
            backend=backend, n=n, status=STATUS_SKIPPED, input_digest=digest,
            detail="no GPU device",
        )

    if backend is Backend.SEQUENTIAL:
        runner = lambda: (matmul_sequential(a, b), None)  # noqa: E731
    elif backend is Backend.PARALLEL_CPU:
        runner = lambda: (matmul_parallel_cpu(a, b, plan.cpu), None)  # noqa: E731
    else:
        variant = _gpu_variant(backend)
        runner = lambda: matmul_gpu(  # noqa: E731
            a, b, variant=variant, scope=plan.timing_scope, device=device
        )

    try:
        for _ in range(plan.warmup_runs):
            runner()

        times: list[float] = []
        phase_samples: list[GpuTiming | None] = []
        first_result: Matrix | None = None
        for rep in range(plan.repetitions):
            t0 = time.perf_counter()
            result, phases = runner()
            wall_ms = (time.perf_counter() - t0) * 1e3
            # GPU cells report the scope window, not the full host call.
            times.append(phases.total_ms if phases is not None else wall_ms)
            phase_samples.append(phases)
            if rep == 0:
                first_result = result

        verified = None
        if n <= plan.verify_cap:
            if backend is Backend.SEQUENTIAL:
                oracle[0] = first_result
                verified = True
            elif backend is Backend.PARALLEL_CPU:
                verified = bitwise_equal(first_result, get_oracle())
            else:
                report = compare(get_oracle(), first_result)
                verified = report.max_rel_diff <= GPU_VERIFY_REL_TOL

        median_ms = float(statistics.median(times))
        gpu_phases = None
        if any(p is not None for p in phase_samples):
            gpu_phases = min(
                (p for p in phase_samples if p is not None),
                key=lambda p: abs(p.total_ms - median_ms),
            )
        return Measurement(
            backend=backend, n=n, status=STATUS_OK,
            times_ms=tuple(times), median_ms=median_ms,
            min_ms=float(min(times)), gpu_phases=gpu_phases,
            verified=verified, input_digest=digest,
        )
    except Exception as exc:  # noqa: BLE001 - recorded per cell
        log.warning("%s at n=%d failed: %s", backend.value, n, exc)
        return Measurement(
            backend=backend, n=n, status=STATUS_FAILED, input_digest=digest,
            detail=f"{type(exc).__name__}: {exc}",
        )


def _require_positive(value: float | None, what: str) -> float | None:
    if value is None:
        return None
    if value <= 0.0:
        raise MeasurementCorruptError(f"{what} is {value} ms; expected > 0")
    return value


def compute_speedups(measurements: list[Measurement]) -> SpeedupTable:
    """Reduce sweep cells to per-size timings and speedup ratios.

    Ratios are computed from median times; a missing operand yields an
    absent (None) ratio, never zero.  When both GPU variants were measured
    the tiled one fills the GPU column.
    """
    by_size: dict[int, dict[Backend, Measurement]] = {}
    order: list[int] = []
    for m in measurements:
        if m.n not in by_size:
            by_size[m.n] = {}
            order.append(m.n)
        if m.status == STATUS_OK:
            by_size[m.n][m.backend] = m

    rows = []
    for n in order:
        cells = by_size[n]

        def median_of(backend: Backend) -> float | None:
            cell = cells.get(backend)
            return None if cell is None else cell.median_ms

        seq = _require_positive(median_of(Backend.SEQUENTIAL), f"seq @ {n}")
        par = _require_positive(median_of(Backend.PARALLEL_CPU), f"cpu @ {n}")
        gpu = median_of(Backend.GPU_TILED)
        if gpu is None:
            gpu = median_of(Backend.GPU_NAIVE)
        gpu = _require_positive(gpu, f"gpu @ {n}")

        rows.append(SpeedupRow(
            n=n,
            seq_ms=seq,
            par_cpu_ms=par,
            gpu_ms=gpu,
            speedup_cpu_vs_seq=(seq / par if seq and par else None),
            speedup_gpu_vs_cpu=(par / gpu if par and gpu else None),
            speedup_gpu_vs_seq=(seq / gpu if seq and gpu else None),
        ))
    return SpeedupTable(rows=tuple(rows))
