"""GPU device discovery, buffer management, kernel dispatch, and timing.

The compute kernels are WGSL shaders shipped as package assets (see
``shaders/``) and dispatched through WebGPU via the optional ``wgpu``
package (install extra ``gemmlab[gpu]``).  A machine without a usable GPU is
a supported configuration, not an error: `probe_device` reports absence and
benchmark sweeps downgrade GPU cells to "skipped".

Timing model
------------
`matmul_gpu` measures one scope window with a monotonic clock:

* ``transfers-kernel``: from the start of the host-to-device writes to
  completion of the result readback.  The readback is the only
  synchronization point, so device-side execution of uploads and kernel is
  absorbed into the window (and mostly surfaces in ``d2h_ms``).
* ``alloc-transfers-kernel``: same, but the window also opens before device
  buffer allocation.
* ``kernel-only``: the queue is drained after the uploads, then the window
  covers kernel submission until the queue is idle again; the readback
  happens after the window.

Phase fields of `GpuTiming` are contiguous host-side sub-intervals
(``alloc_ms``, ``h2d_ms``, ``d2h_ms``).  ``kernel_ms`` comes from device
timestamp queries when the adapter supports them; otherwise it is ``None``
under the two transfer scopes (folded into the total) and equal to the
measured window under ``kernel-only``.
"""

from __future__ import annotations

import enum
import logging
import os
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import Matrix, ShapeError

log = logging.getLogger("gemmlab")

NO_GPU_ENV_VAR = "GEMMLAB_NO_GPU"

TILE = 16
WORKGROUP_INVOCATIONS = TILE * TILE


class DeviceUnavailableError(RuntimeError):
    """No usable GPU compute device."""


class OutOfDeviceMemoryError(RuntimeError):
    """The requested buffers exceed device memory."""


class GpuBackendError(RuntimeError):
    """Shader compilation, validation, or dispatch failed."""


class KernelVariant(enum.Enum):
    NAIVE = "naive"
    TILED = "tiled"


class TimingScope(enum.Enum):
    TRANSFERS_AND_KERNEL = "transfers-kernel"
    ALLOC_TRANSFERS_KERNEL = "alloc-transfers-kernel"
    KERNEL_ONLY = "kernel-only"


@dataclass(frozen=True)
class DeviceInfo:
    """Detected GPU compute device, or its absence.

    dedicated_memory_bytes is 0 when the backend cannot report it (WebGPU
    itself has no VRAM query; the largest allowed buffer is used as the
    allocation bound instead).
    """

    available: bool = False
    name: str = ""
    dedicated_memory_bytes: int = 0
    max_workgroup_size: int = 0

    def __post_init__(self):
        if not self.available and (
            self.name or self.dedicated_memory_bytes or self.max_workgroup_size
        ):
            raise ValueError("absent device must leave all fields at defaults")


@dataclass(frozen=True)
class GpuTiming:
    """Per-phase wall-clock breakdown of one GPU matmul, in milliseconds."""

    alloc_ms: float
    h2d_ms: float
    d2h_ms: float
    total_ms: float
    kernel_ms: float | None = None

    def __post_init__(self):
        phases = [self.alloc_ms, self.h2d_ms, self.d2h_ms, self.total_ms]
        if self.kernel_ms is not None:
            phases.append(self.kernel_ms)
        if any(p < 0.0 for p in phases):
            raise ValueError(f"negative phase in {self}")
        if self.kernel_ms is not None and (
            self.total_ms < self.kernel_ms - 1e-3
        ):
            raise ValueError(
                f"total {self.total_ms} ms below kernel {self.kernel_ms} ms"
            )


def load_shader_source(variant: KernelVariant) -> str:
    """WGSL source of the requested kernel, from the package assets."""
    name = f"matmul_{variant.value}.wgsl"
    return (resources.files("gemmlab") / "shaders" / name).read_text("utf-8")


def workgroup_grid(n: int) -> int:
    """Workgroups per axis: ceil(n / 16)."""
    return (n + TILE - 1) // TILE


def _gpu_disabled_by_env() -> bool:
    return os.environ.get(NO_GPU_ENV_VAR, "") not in ("", "0")


_UNPROBED = object()
_cached_handle: object = _UNPROBED


def open_device():
    """Shared device handle, or None when no GPU is usable.

    The first successful or failed probe is cached for the process;
    GEMMLAB_NO_GPU is honored on every call so tests and CI can force the
    CPU-only path at any point.
    """
    global _cached_handle
    if _gpu_disabled_by_env():
        return None
    if _cached_handle is _UNPROBED:
        try:
            _cached_handle = _WgpuDeviceHandle.open()
        except Exception as exc:  # absence is a value, not an error
            log.debug("GPU probe failed: %s", exc)
            _cached_handle = None
    return _cached_handle


def reset_device_cache() -> None:
    """Drop the cached probe result (test hook)."""
    global _cached_handle
    _cached_handle = _UNPROBED


def probe_device() -> DeviceInfo:
    """Best available GPU compute device, or available=False. Never raises."""
    handle = open_device()
    if handle is None:
        return DeviceInfo()
    return handle.info


def matmul_gpu(
    a: Matrix,
    b: Matrix,
    variant: KernelVariant = KernelVariant.TILED,
    scope: TimingScope = TimingScope.TRANSFERS_AND_KERNEL,
    device=None,
) -> tuple[Matrix, GpuTiming]:
    """C = A*B on the GPU with a per-phase timing breakdown.

    The device handle must expose ``info`` plus ``new_job(n)`` returning a
    job with upload/dispatch/sync/read_result/kernel_elapsed_ms/release;
    the default is the shared wgpu-backed handle from `open_device`.
    """
    if a.rows != a.cols or b.rows != b.cols or a.rows != b.rows:
        raise ShapeError(
            f"GPU path requires equal square matrices, got "
            f"{a.rows}x{a.cols} and {b.rows}x{b.cols}"
        )
    if device is None:
        device = open_device()
    if device is None:
        raise DeviceUnavailableError(
            "no GPU compute device (is the optional wgpu dependency "
            "installed, and is GEMMLAB_NO_GPU unset?)"
        )
    n = a.rows
    needed = 3 * n * n * 4
    limit = device.info.dedicated_memory_bytes
    if limit > 0 and needed > limit:
        raise OutOfDeviceMemoryError(
            f"{needed} bytes of buffers exceed device memory ({limit} bytes)"
        )

    t_open = time.perf_counter()
    job = device.new_job(n)
    try:
        t_alloc_done = time.perf_counter()
        alloc_ms = (t_alloc_done - t_open) * 1e3

        t_h2d0 = time.perf_counter()
        job.upload(a.data, b.data)
        t_h2d1 = time.perf_counter()
        h2d_ms = (t_h2d1 - t_h2d0) * 1e3

        groups = workgroup_grid(n)
        if scope is TimingScope.KERNEL_ONLY:
            job.sync()
            t_k0 = time.perf_counter()
            job.dispatch(variant, groups, groups)
            job.sync()
            t_k1 = time.perf_counter()
            total_ms = (t_k1 - t_k0) * 1e3
            t_d0 = time.perf_counter()
            result = job.read_result()
            t_d1 = time.perf_counter()
            d2h_ms = (t_d1 - t_d0) * 1e3
            kernel_ms = job.kernel_elapsed_ms()
            if kernel_ms is None:
                kernel_ms = total_ms
        else:
            job.dispatch(variant, groups, groups)
            t_d0 = time.perf_counter()
            result = job.read_result()
            t_d1 = time.perf_counter()
            d2h_ms = (t_d1 - t_d0) * 1e3
            start = (
                t_open
                if scope is TimingScope.ALLOC_TRANSFERS_KERNEL
                else t_alloc_done
            )
            total_ms = (t_d1 - start) * 1e3
            kernel_ms = job.kernel_elapsed_ms()
    finally:
        job.release()

    out = np.asarray(result, dtype=np.float32).reshape(-1)
    if out.size != n * n:
        raise GpuBackendError(
            f"backend returned {out.size} elements, expected {n * n}"
        )
    timing = GpuTiming(
        alloc_ms=alloc_ms,
        h2d_ms=h2d_ms,
        d2h_ms=d2h_ms,
        total_ms=total_ms,
        kernel_ms=kernel_ms,
    )
    return Matrix(n, n, out.copy()), timing


class _WgpuDeviceHandle:
    """Real WebGPU device via the optional wgpu package."""

    def __init__(self, device, info: DeviceInfo, pipelines, timestamps: bool):
        self._device = device
        self.info = info
        self._pipelines = pipelines
        self._timestamps = timestamps

    @classmethod
    def open(cls) -> "_WgpuDeviceHandle":
        import wgpu  # optional dependency

        adapter = wgpu.gpu.request_adapter_sync(
            power_preference="high-performance"
        )
        features = []
        timestamps = "timestamp-query" in adapter.features
        if timestamps:
            features.append("timestamp-query")
        device = adapter.request_device_sync(required_features=features)

        limits = dict(device.limits)
        max_invocations = int(
            limits.get("max-compute-invocations-per-workgroup", 0)
        )
        if max_invocations < WORKGROUP_INVOCATIONS:
            raise DeviceUnavailableError(
                f"device supports only {max_invocations} invocations per "
                f"workgroup, {WORKGROUP_INVOCATIONS} required"
            )
        adapter_info = dict(adapter.info)
        name = str(
            adapter_info.get("device")
            or adapter_info.get("description")
            or "GPU"
        )
        info = DeviceInfo(
            available=True,
            name=name,
            dedicated_memory_bytes=int(limits.get("max-buffer-size", 0)),
            max_workgroup_size=max_invocations,
        )

        # Compile and validate both kernels up front.
        pipelines = {}
        for variant in KernelVariant:
            module = device.create_shader_module(
                code=load_shader_source(variant)
            )
            pipelines[variant] = device.create_compute_pipeline(
                layout="auto",
                compute={"module": module, "entry_point": "main"},
            )
        return cls(device, info, pipelines, timestamps)

    def new_job(self, n: int) -> "_WgpuJob":
        return _WgpuJob(self, n)

    def release(self) -> None:
        self._device.destroy()


class _WgpuJob:
    """Buffers and dispatch state for one GPU matmul."""

    def __init__(self, handle: _WgpuDeviceHandle, n: int):
        import wgpu

        self._handle = handle
        self._n = n
        device = handle._device
        nbytes = n * n * 4
        usage = wgpu.BufferUsage
        try:
            self._a_buf = device.create_buffer(
                size=nbytes, usage=usage.STORAGE | usage.COPY_DST
            )
            self._b_buf = device.create_buffer(
                size=nbytes, usage=usage.STORAGE | usage.COPY_DST
            )
            self._c_buf = device.create_buffer(
                size=nbytes, usage=usage.STORAGE | usage.COPY_SRC
            )
            self._params_buf = device.create_buffer(
                size=16, usage=usage.UNIFORM | usage.COPY_DST
            )
            self._scratch = device.create_buffer(
                size=4, usage=usage.COPY_DST | usage.MAP_READ
            )
        except Exception as exc:
            raise OutOfDeviceMemoryError(
                f"device buffer allocation failed for n={n}: {exc}"
            ) from exc
        params = np.zeros(4, dtype=np.uint32)
        params[0] = n
        device.queue.write_buffer(self._params_buf, 0, params.tobytes())
        self._query_set = None
        self._resolve_buf = None
        self._kernel_ms: float | None = None
        if handle._timestamps:
            try:
                self._query_set = device.create_query_set(
                    type="timestamp", count=2
                )
                self._resolve_buf = device.create_buffer(
                    size=16, usage=usage.QUERY_RESOLVE | usage.COPY_SRC
                )
            except Exception:
                self._query_set = None
                self._resolve_buf = None

    def upload(self, a: np.ndarray, b: np.ndarray) -> None:
        queue = self._handle._device.queue
        queue.write_buffer(self._a_buf, 0, a.tobytes())
        queue.write_buffer(self._b_buf, 0, b.tobytes())

    def dispatch(self, variant: KernelVariant, groups_x: int,
                 groups_y: int) -> None:
        device = self._handle._device
        pipeline = self._handle._pipelines[variant]
        try:
            bind_group = device.create_bind_group(
                layout=pipeline.get_bind_group_layout(0),
                entries=[
                    {"binding": 0, "resource": {"buffer": self._a_buf,
                                                "offset": 0,
                                                "size": self._a_buf.size}},
                    {"binding": 1, "resource": {"buffer": self._b_buf,
                                                "offset": 0,
                                                "size": self._b_buf.size}},
                    {"binding": 2, "resource": {"buffer": self._c_buf,
                                                "offset": 0,
                                                "size": self._c_buf.size}},
                    {"binding": 3, "resource": {"buffer": self._params_buf,
                                                "offset": 0,
                                                "size": self._params_buf.size}},
                ],
            )
            encoder = device.create_command_encoder()
            pass_kwargs = {}
            if self._query_set is not None:
                pass_kwargs["timestamp_writes"] = {
                    "query_set": self._query_set,
                    "beginning_of_pass_write_index": 0,
                    "end_of_pass_write_index": 1,
                }
            compute_pass = encoder.begin_compute_pass(**pass_kwargs)
            compute_pass.set_pipeline(pipeline)
            compute_pass.set_bind_group(0, bind_group)
            compute_pass.dispatch_workgroups(groups_x, groups_y, 1)
            compute_pass.end()
            if self._query_set is not None:
                encoder.resolve_query_set(
                    self._query_set, 0, 2, self._resolve_buf, 0
                )
            device.queue.submit([encoder.finish()])
        except (DeviceUnavailableError, OutOfDeviceMemoryError):
            raise
        except Exception as exc:
            raise GpuBackendError(f"kernel dispatch failed: {exc}") from exc

    def sync(self) -> None:
        # Reading any buffer drains the queue; WebGPU has no portable
        # wait-idle primitive exposed here.
        self._handle._device.queue.read_buffer(self._scratch)

    def read_result(self) -> np.ndarray:
        queue = self._handle._device.queue
        data = queue.read_buffer(self._c_buf)
        if self._resolve_buf is not None:
            try:
                stamps = np.frombuffer(
                    queue.read_buffer(self._resolve_buf), dtype=np.uint64
                )
                self._kernel_ms = float(int(stamps[1]) - int(stamps[0])) / 1e6
            except Exception:
                self._kernel_ms = None
        return np.frombuffer(data, dtype=np.float32)

    def kernel_elapsed_ms(self) -> float | None:
        return self._kernel_ms

    def release(self) -> None:
        for buf in (self._a_buf, self._b_buf, self._c_buf,
                    self._params_buf, self._scratch, self._resolve_buf):
            if buf is not None:
                buf.destroy()
