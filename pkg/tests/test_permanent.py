import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memboson.errors import DimensionError, SizeLimitError
from memboson.matrices import direct_sum
from memboson.permanent import (
    benchmark_permanents,
    permanent_naive,
    permanent_parallel,
    permanent_ryser,
)


def random_complex(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestNaive:
    def test_scalar(self):
        assert permanent_naive(np.array([[3.5 + 1j]])) == 3.5 + 1j

    def test_all_ones_2x2(self):
        assert permanent_naive(np.ones((2, 2))) == 2

    def test_definition_2x2(self):
        assert permanent_naive(np.array([[1, 2], [3, 4]])) == 10

    def test_size_guard(self):
        with pytest.raises(SizeLimitError):
            permanent_naive(np.eye(11))

    def test_non_square(self):
        with pytest.raises(DimensionError):
            permanent_naive(np.ones((2, 3)))


class TestRyser:
    def test_identity(self):
        assert permanent_ryser(np.eye(5)) == pytest.approx(1.0)

    def test_all_ones_6x6_is_factorial(self):
        assert permanent_ryser(np.ones((6, 6))) == pytest.approx(720.0)

    def test_matches_naive_8x8(self):
        M = random_complex(8, seed=3)
        a, b = permanent_naive(M), permanent_ryser(M)
        assert abs(a - b) <= 1e-9 * abs(a)

    def test_oracle_equivalence_sweep(self):
        for case in range(200):
            n = 1 + case % 8
            M = random_complex(n, seed=1000 + case)
            a, b = permanent_naive(M), permanent_ryser(M)
            assert abs(a - b) <= 1e-9 * max(abs(a), 1e-300)


class TestParallel:
    def test_workers_one_bit_equal(self):
        M = random_complex(9, seed=12)
        assert permanent_parallel(M, workers=1) == permanent_ryser(M)

    def test_cross_worker_agreement_12x12(self):
        M = random_complex(12, seed=8)
        vals = [permanent_parallel(M, workers=w) for w in (2, 4, 8)]
        for a in vals:
            for b in vals:
                assert abs(a - b) <= 1e-12 * abs(a)

    def test_identity20_workers8(self):
        assert permanent_parallel(np.eye(20), workers=8) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_invalid_workers(self):
        with pytest.raises(DimensionError):
            permanent_parallel(np.eye(2), workers=0)


class TestProperties:
    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=25, deadline=None)
    def test_permutation_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        p = rng.permutation(n)
        q = rng.permutation(n)
        ref = permanent_ryser(M)
        permuted = permanent_ryser(M[p][:, q])
        assert abs(ref - permuted) <= 1e-9 * max(abs(ref), 1e-12)

    @given(
        st.integers(min_value=1, max_value=8),
        st.integers(min_value=0, max_value=10**6),
        st.floats(min_value=-3, max_value=3, allow_nan=False),
    )
    @settings(max_examples=25, deadline=None)
    def test_row_scaling_linearity(self, n, seed, c):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        row = int(rng.integers(n))
        scaled = M.copy()
        scaled[row] *= c
        assert abs(permanent_ryser(scaled) - c * permanent_ryser(M)) <= 1e-9 * max(
            abs(permanent_ryser(M)), 1.0
        )

    @given(
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=0, max_value=10**6),
    )
    @settings(max_examples=20, deadline=None)
    def test_block_factorization(self, na, nb, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((na, na)) + 1j * rng.standard_normal((na, na))
        B = rng.standard_normal((nb, nb)) + 1j * rng.standard_normal((nb, nb))
        whole = permanent_ryser(direct_sum([A, B]))
        parts = permanent_ryser(A) * permanent_ryser(B)
        assert abs(whole - parts) <= 1e-9 * max(abs(parts), 1e-12)


def test_benchmark_rows():
    rows = benchmark_permanents([2, 4], seed=0, repeats=1)
    methods = {m for _, m, _ in rows}
    assert {"naive", "ryser", "parallel4"} <= methods
    assert all(ms >= 0 for _, _, ms in rows)


def test_pure_python_kernel_matches_active_backend():
    # the fallback path must agree with whichever kernel is active
    from memboson import permanent as perm_mod

    for n, seed in [(1, 0), (4, 1), (7, 2), (10, 3)]:
        M = np.ascontiguousarray(random_complex(n, seed))
        py_blocks = perm_mod._ryser_range_py(M, 1, 1 << n, perm_mod._BLOCK)
        py_value = (-1) ** n * perm_mod._pairwise_sum(py_blocks)
        active = permanent_ryser(M)
        assert abs(py_value - active) <= 1e-12 * max(abs(active), 1e-300)
