import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemmlab.core import (
    ComparisonReport,
    InvalidDimensionError,
    Matrix,
    ShapeError,
    bitwise_equal,
    compare,
    identity_matrix,
    matmul_sequential,
    random_matrix,
    zero_matrix,
)

from _oracles import (
    matmul_int64,
    matmul_python_f32,
    splitmix64_reference,
    unit_float_reference,
)

# First four generator outputs for seed=7, produced once from the documented
# generator spec and frozen (f32 bit patterns, so the check is exact).
GOLDEN_SEED7_BITS = (0x3EC797C2, 0x3C898780, 0x3F669840, 0x3F153AEB)


class TestRandomMatrix:
    def test_golden_fixture_seed7(self):
        m = random_matrix(2, 7)
        assert tuple(m.data.view(np.uint32)) == GOLDEN_SEED7_BITS

    def test_matches_reference_generator(self):
        m = random_matrix(5, 1234)
        expected = [unit_float_reference(w)
                    for w in splitmix64_reference(1234, 25)]
        assert m.data.tolist() == expected

    def test_deterministic(self):
        a = random_matrix(4, 42)
        b = random_matrix(4, 42)
        assert bitwise_equal(a, b)

    def test_seed_changes_output(self):
        assert not bitwise_equal(random_matrix(4, 1), random_matrix(4, 2))

    def test_range_half_open(self):
        m = random_matrix(128, 9)
        assert m.data.size == 16384
        assert np.all(m.data >= 0.0)
        assert np.all(m.data < 1.0)

    def test_zero_dimension_rejected(self):
        with pytest.raises(InvalidDimensionError):
            random_matrix(0, 42)

    def test_negative_seed_and_large_seed_are_valid(self):
        a = random_matrix(3, -1)
        b = random_matrix(3, (1 << 64) - 1)
        assert bitwise_equal(a, b)  # seeds reduce mod 2^64


class TestFixtures:
    def test_identity_1x1(self):
        assert identity_matrix(1).data.tolist() == [1.0]

    def test_zero_2x2(self):
        assert zero_matrix(2).data.tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_identity_row_sums(self):
        eye = identity_matrix(3)
        assert eye.to_2d().sum(axis=1).tolist() == [1.0, 1.0, 1.0]

    @pytest.mark.parametrize("ctor", [identity_matrix, zero_matrix])
    def test_zero_dimension_rejected(self, ctor):
        with pytest.raises(InvalidDimensionError):
            ctor(0)


class TestMatrixType:
    def test_buffer_length_must_match(self):
        with pytest.raises(ShapeError):
            Matrix(2, 2, np.zeros(3, dtype=np.float32))

    def test_data_is_frozen(self):
        m = zero_matrix(2)
        with pytest.raises(ValueError):
            m.data[0] = 1.0

    def test_instances_are_immutable(self):
        m = zero_matrix(2)
        with pytest.raises(AttributeError):
            m.rows = 3

    def test_from_2d_round_trip(self):
        m = Matrix.from_2d([[1.0, 2.0], [3.0, 4.0]])
        assert m.at(1, 0) == 3.0
        assert m.to_2d().tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_square_accessor(self):
        assert random_matrix(3, 0).n == 3
        with pytest.raises(ShapeError):
            Matrix(1, 2, np.zeros(2, dtype=np.float32)).n


class TestMatmulSequential:
    def test_hand_computed_2x2(self):
        a = Matrix.from_2d([[1, 2], [3, 4]])
        b = Matrix.from_2d([[5, 6], [7, 8]])
        c = matmul_sequential(a, b)
        assert c.to_2d().tolist() == [[19.0, 22.0], [43.0, 50.0]]

    def test_identity_is_bitwise_noop(self):
        a = random_matrix(33, 5)
        c = matmul_sequential(a, identity_matrix(33))
        assert bitwise_equal(c, a)

    def test_zero_times_any_is_zero(self):
        c = matmul_sequential(zero_matrix(8), random_matrix(8, 3))
        assert not np.any(c.data)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            matmul_sequential(random_matrix(2, 0), random_matrix(3, 0))

    def test_rectangular_product(self):
        a = Matrix.from_2d([[1, 2, 3], [4, 5, 6]])
        b = Matrix.from_2d([[1], [1], [1]])
        c = matmul_sequential(a, b)
        assert (c.rows, c.cols) == (2, 1)
        assert c.data.tolist() == [6.0, 15.0]

    @pytest.mark.parametrize("n", [4, 9, 16])
    def test_matches_integer_brute_force(self, n):
        # Small integer entries accumulate exactly in f32, so equality with a
        # 64-bit integer oracle is exact, not approximate.
        words = np.array(splitmix64_reference(77 + n, 2 * n * n),
                         dtype=np.uint64)
        small = (words & np.uint64(7)).astype(np.float32)
        a = Matrix(n, n, small[: n * n])
        b = Matrix(n, n, small[n * n:])
        got = matmul_sequential(a, b)
        expected = matmul_int64(a.data, b.data, n)
        assert got.data.astype(np.int64).tolist() == expected.tolist()

    @pytest.mark.parametrize("n", [1, 2, 7, 13])
    def test_matches_python_f32_loop_bitwise(self, n):
        a = random_matrix(n, 21)
        b = random_matrix(n, 22)
        got = matmul_sequential(a, b)
        expected = matmul_python_f32(a.data, b.data, n, n, n)
        assert np.array_equal(got.data.view(np.uint32),
                              expected.view(np.uint32))


class TestCompare:
    def test_self_comparison_is_zero(self):
        c = random_matrix(6, 11)
        report = compare(c, c)
        assert report.max_abs_diff == 0.0
        assert report.max_rel_diff == 0.0

    def test_scalar_difference(self):
        report = compare(Matrix.from_2d([[1.0]]), Matrix.from_2d([[1.5]]))
        assert report.max_abs_diff == 0.5
        assert report.max_rel_diff == 0.5
        assert report.worst_index == (0, 0)

    def test_near_zero_reference_uses_floor(self):
        report = compare(Matrix.from_2d([[0.0]]), Matrix.from_2d([[1e-6]]))
        assert report.max_rel_diff == pytest.approx(1.0)

    def test_worst_index_locates_largest_abs_diff(self):
        ref = zero_matrix(3)
        bad = np.zeros(9, dtype=np.float32)
        bad[5] = 2.0
        report = compare(ref, Matrix(3, 3, bad))
        assert report.worst_index == (1, 2)
        assert report.max_abs_diff == 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            compare(zero_matrix(2), zero_matrix(3))

    def test_report_invariants(self):
        report = compare(random_matrix(4, 1), random_matrix(4, 2))
        assert report.max_abs_diff >= 0.0
        assert report.max_rel_diff >= 0.0
        assert isinstance(report, ComparisonReport)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=16),
       seed=st.integers(min_value=0, max_value=2 ** 63))
def test_property_identity_is_bitwise_noop(n, seed):
    a = random_matrix(n, seed)
    assert bitwise_equal(matmul_sequential(a, identity_matrix(n)), a)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=12),
       seed=st.integers(min_value=0, max_value=2 ** 63))
def test_property_self_compare_is_exact(n, seed):
    x = random_matrix(n, seed)
    assert compare(x, x).max_abs_diff == 0.0
