"""Dense single-precision matrices, deterministic initialization, and the
sequential reference kernel.

The reference kernel `matmul_sequential` defines the numeric contract every
other backend is checked against: each output element is accumulated in
ascending k order, one float32 multiply and one float32 add per step, no
fused multiply-add, no reassociation.

Random initialization uses a counter-mode splitmix64 stream so that the same
(n, seed) pair yields bit-identical matrices on every platform and in every
process.  The generator is fully specified here:

    gamma = 0x9E3779B97F4A7C15
    out(i) = mix64((seed + (i + 1) * gamma) mod 2^64)        for i = 0, 1, ...

    mix64(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2^64)
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2^64)
        return z ^ (z >> 31)

Element (i, j) of an n x n matrix takes the stream value at index i*n + j,
converted to [0, 1) by keeping the top 24 bits: float32(out >> 40) * 2^-24.
Every such value is exactly representable in single precision, and 1.0 is
never produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class InvalidDimensionError(ValueError):
    """A matrix dimension was zero or negative."""


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class Matrix:
    """Dense row-major float32 matrix with an immutable flat buffer.

    Element (i, j) lives at data[i * cols + j].  The buffer is frozen after
    construction, so instances are safe to share read-only across threads.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        if rows < 1 or cols < 1:
            raise InvalidDimensionError(
                f"matrix dimensions must be >= 1, got {rows}x{cols}"
            )
        data = np.ascontiguousarray(data, dtype=np.float32).reshape(-1)
        if data.size != rows * cols:
            raise ShapeError(
                f"buffer has {data.size} elements, expected {rows * cols} "
                f"for a {rows}x{cols} matrix"
            )
        data.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"

    @property
    def n(self) -> int:
        """Dimension of a square matrix."""
        if self.rows != self.cols:
            raise ShapeError(f"matrix is {self.rows}x{self.cols}, not square")
        return self.rows

    def at(self, i: int, j: int) -> float:
        return float(self.data[i * self.cols + j])

    def to_2d(self) -> np.ndarray:
        """Read-only (rows, cols) view of the buffer."""
        return self.data.reshape(self.rows, self.cols)

    @classmethod
    def from_2d(cls, array) -> "Matrix":
        arr = np.asarray(array, dtype=np.float32)
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-D array, got ndim={arr.ndim}")
        return cls(arr.shape[0], arr.shape[1], arr.reshape(-1).copy())


def bitwise_equal(a: Matrix, b: Matrix) -> bool:
    """True iff both matrices have identical shape and identical f32 bits."""
    if a.rows != b.rows or a.cols != b.cols:
        return False
    return bool(np.array_equal(a.data.view(np.uint32), b.data.view(np.uint32)))


def _splitmix64_stream(count: int, seed: int) -> np.ndarray:
    """First `count` outputs of the splitmix64 stream for `seed`, as uint64."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK64
    return z ^ (z >> np.uint64(31))


def random_matrix(n: int, seed: int) -> Matrix:
    """n x n matrix of uniform [0, 1) float32 values, filled row-major.

    Deterministic and platform-independent: identical (n, seed) pairs yield
    bit-identical matrices (see the module docstring for the generator spec).
    """
    if n < 1:
        raise InvalidDimensionError(f"matrix dimension must be >= 1, got {n}")
    words = _splitmix64_stream(n * n, seed)
    top24 = (words >> np.uint64(40)).astype(np.float32)
    return Matrix(n, n, top24 * np.float32(2.0 ** -24))


def identity_matrix(n: int) -> Matrix:
    if n < 1:
        raise InvalidDimensionError(f"matrix dimension must be >= 1, got {n}")
    return Matrix(n, n, np.eye(n, dtype=np.float32).reshape(-1))


def zero_matrix(n: int) -> Matrix:
    if n < 1:
        raise InvalidDimensionError(f"matrix dimension must be >= 1, got {n}")
    return Matrix(n, n, np.zeros(n * n, dtype=np.float32))


@njit(cache=True, nogil=True)
def _seq_kernel(a, b, out, rows, cols, kdim):  # pragma: no cover - compiled
    for i in range(rows):
        for j in range(cols):
            acc = np.float32(0.0)
            for k in range(kdim):
                acc += a[i * kdim + k] * b[k * cols + j]
            out[i * cols + j] = acc


def matmul_sequential(a: Matrix, b: Matrix) -> Matrix:
    """Reference product C = A*B via the plain triple loop.

    This is the oracle: k-ascending float32 accumulation, one rounding per
    multiply and one per add.  All other backends are compared against it.
    """
    if a.cols != b.rows:
        raise ShapeError(
            f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}"
        )
    out = np.empty(a.rows * b.cols, dtype=np.float32)
    _seq_kernel(a.data, b.data, out, a.rows, b.cols, a.cols)
    return Matrix(a.rows, b.cols, out)


@dataclass(frozen=True)
class ComparisonReport:
    """Elementwise difference summary between two equally shaped matrices.

    max_rel_diff uses |reference| as denominator, floored at 1e-6 to guard
    near-zero division.  worst_index locates the largest absolute difference.
    """

    max_abs_diff: float
    max_rel_diff: float
    worst_index: tuple[int, int]


_REL_FLOOR = 1e-6


def compare(reference: Matrix, candidate: Matrix) -> ComparisonReport:
    """Worst-case absolute and relative difference of candidate vs reference."""
    if reference.rows != candidate.rows or reference.cols != candidate.cols:
        raise ShapeError(
            f"shape mismatch: {reference.rows}x{reference.cols} vs "
            f"{candidate.rows}x{candidate.cols}"
        )
    ref = reference.data.astype(np.float64)
    cand = candidate.data.astype(np.float64)
    abs_diff = np.abs(ref - cand)
    rel_diff = abs_diff / np.maximum(np.abs(ref), _REL_FLOOR)
    flat_worst = int(np.argmax(abs_diff))
    return ComparisonReport(
        max_abs_diff=float(abs_diff[flat_worst]),
        max_rel_diff=float(np.max(rel_diff)),
        worst_index=(flat_worst // reference.cols, flat_worst % reference.cols),
    )
