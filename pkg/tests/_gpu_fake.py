"""In-process fake of the GPU device handle for exercising host logic.

The fake emulates both kernels in numpy with the same zero-padded,
k-ascending float32 accumulation the WGSL shaders specify, and can inject
per-phase delays so scope-window arithmetic is observable.
"""

import time

import numpy as np

from gemmlab.gpu_host import DeviceInfo, KernelVariant


def emulate_kernel(a: np.ndarray, b: np.ndarray, n: int,
                   tile: int = 16) -> np.ndarray:
    """Zero-padded tile-phase accumulation (bitwise equal to the naive
    k-loop for non-negative inputs, including n not divisible by tile)."""
    padded = ((n + tile - 1) // tile) * tile
    a_pad = np.zeros((padded, padded), dtype=np.float32)
    b_pad = np.zeros((padded, padded), dtype=np.float32)
    a_pad[:n, :n] = a.reshape(n, n)
    b_pad[:n, :n] = b.reshape(n, n)
    acc = np.zeros((padded, padded), dtype=np.float32)
    for k in range(padded):
        acc += np.outer(a_pad[:, k], b_pad[k, :])
    return acc[:n, :n].reshape(-1).copy()


class FakeJob:
    def __init__(self, handle, n):
        self.handle = handle
        self.n = n
        self._a = None
        self._b = None
        self.dispatches = []
        self.released = False
        time.sleep(handle.alloc_delay)

    def upload(self, a, b):
        time.sleep(self.handle.upload_delay)
        self._a = np.array(a, dtype=np.float32)
        self._b = np.array(b, dtype=np.float32)

    def dispatch(self, variant: KernelVariant, groups_x: int, groups_y: int):
        self.dispatches.append((variant, groups_x, groups_y))
        self.handle.dispatches.append((self.n, variant, groups_x, groups_y))

    def sync(self):
        time.sleep(self.handle.kernel_delay)

    def read_result(self):
        if not self.dispatches:
            raise RuntimeError("read before dispatch")
        time.sleep(self.handle.readback_delay)
        if self.handle.result_override is not None:
            return self.handle.result_override
        return emulate_kernel(self._a, self._b, self.n)

    def kernel_elapsed_ms(self):
        return self.handle.kernel_ms

    def release(self):
        self.released = True


class FakeDeviceHandle:
    def __init__(self, memory_bytes=0, kernel_ms=None, alloc_delay=0.0,
                 upload_delay=0.0, kernel_delay=0.0, readback_delay=0.0,
                 result_override=None):
        self.info = DeviceInfo(
            available=True,
            name="FakeGPU",
            dedicated_memory_bytes=memory_bytes,
            max_workgroup_size=256,
        )
        self.kernel_ms = kernel_ms
        self.alloc_delay = alloc_delay
        self.upload_delay = upload_delay
        self.kernel_delay = kernel_delay
        self.readback_delay = readback_delay
        self.result_override = result_override
        self.dispatches = []
        self.jobs = []

    def new_job(self, n):
        job = FakeJob(self, n)
        self.jobs.append(job)
        return job

    def release(self):
        pass
