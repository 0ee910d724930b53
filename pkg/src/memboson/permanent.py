"""Matrix permanents: a brute-force oracle, a Gray-code Ryser kernel, and a
deterministic parallel variant.

The Ryser kernel walks the nonempty column subsets in Gray-code order, so
each step updates the row-sum vector by a single column add/subtract
(O(2^n * n) total). Partial sums are accumulated per fixed-size block of
subset counters and combined by pairwise summation, which keeps rounding
error bounded for n approaching the desk-scale cap and makes the reduction
order independent of how the subset range is split across workers.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DimensionError, SizeLimitError
from .matrices import as_complex_matrix

__all__ = [
    "MAX_NAIVE_DIM",
    "MAX_RYSER_DIM",
    "permanent_naive",
    "permanent_ryser",
    "permanent_parallel",
    "benchmark_permanents",
]

MAX_NAIVE_DIM = 10
MAX_RYSER_DIM = 40

# Per-block subset count for partial-sum accumulation. The block layout is
# relative to each contiguous range's start, so a single range reproduces
# the same blocks whether computed whole or as that range.
_BLOCK = 1 << 16


def _square(M) -> np.ndarray:
    A = as_complex_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"permanent requires a square matrix, got {A.shape}")
    return A


def permanent_naive(M) -> complex:
    """Permanent by explicit permutation expansion; the independent oracle.

    Guarded at n <= 10 (10! = 3.6M terms) to avoid factorial blowup.
    """
    A = _square(M)
    n = A.shape[0]
    if n > MAX_NAIVE_DIM:
        raise SizeLimitError(f"permanent_naive capped at n <= {MAX_NAIVE_DIM}, got {n}")
    rows = np.arange(n)
    total = 0.0 + 0.0j
    perms = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perms, 100_000))
        if not chunk:
            break
        P = np.asarray(chunk, dtype=np.int64)
        total += A[rows[None, :], P].prod(axis=1).sum()
    return complex(total)


def _ryser_range_py(a: np.ndarray, lo: int, hi: int, block: int) -> np.ndarray:
    """Pure-Python mirror of the jitted kernel (fallback path)."""
    n = a.shape[0]
    nblocks = (hi - lo + block - 1) // block
    out = np.zeros(nblocks, dtype=np.complex128)
    g = lo ^ (lo >> 1)
    row = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        if (g >> j) & 1:
            row += a[:, j]
    sign = -1.0 if bin(g).count("1") & 1 else 1.0
    out[0] = sign * row.prod()
    for k in range(lo + 1, hi):
        gnew = k ^ (k >> 1)
        j = (gnew ^ g).bit_length() - 1
        if (gnew >> j) & 1:
            row += a[:, j]
        else:
            row -= a[:, j]
        sign = -sign
        g = gnew
        out[(k - lo) // block] += sign * row.prod()
    return out


try:  # pragma: no cover - exercised implicitly whenever numba is present
    import numba

    @numba.njit(
        "complex128[:](complex128[:,::1], int64, int64, int64)",
        cache=True,
        nogil=True,
    )
    def _ryser_range_nb(a, lo, hi, block):  # pragma: no cover
        n = a.shape[0]
        nblocks = (hi - lo + block - 1) // block
        out = np.zeros(nblocks, dtype=np.complex128)
        g = lo ^ (lo >> 1)
        row = np.zeros(n, dtype=np.complex128)
        for i in range(n):
            s = 0.0 + 0.0j
            for j in range(n):
                if (g >> j) & 1:
                    s += a[i, j]
            row[i] = s
        bits = 0
        t = g
        while t:
            t &= t - 1
            bits += 1
        sign = -1.0 if bits & 1 else 1.0
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        out[0] = sign * prod
        for k in range(lo + 1, hi):
            gnew = k ^ (k >> 1)
            diff = gnew ^ g
            j = 0
            d = diff
            while d > 1:
                d >>= 1
                j += 1
            if (gnew >> j) & 1:
                for i in range(n):
                    row[i] += a[i, j]
            else:
                for i in range(n):
                    row[i] -= a[i, j]
            sign = -sign
            g = gnew
            prod = 1.0 + 0.0j
            for i in range(n):
                prod *= row[i]
            out[(k - lo) // block] += sign * prod
        return out

    _ryser_range = _ryser_range_nb
except Exception:  # numba unavailable or failed to compile
    _ryser_range = _ryser_range_py


def _pairwise_sum(values: np.ndarray) -> complex:
    vals = list(values)
    while len(vals) > 1:
        vals = [
            vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
            for i in range(0, len(vals), 2)
        ]
    return complex(vals[0])


def _range_value(A: np.ndarray, lo: int, hi: int) -> complex:
    return _pairwise_sum(_ryser_range(A, lo, hi, _BLOCK))


def permanent_ryser(M) -> complex:
    """Permanent via Ryser inclusion-exclusion with Gray-code updates."""
    A = _square(M)
    n = A.shape[0]
    if n > MAX_RYSER_DIM:
        raise SizeLimitError(f"permanent_ryser capped at n <= {MAX_RYSER_DIM}, got {n}")
    total = _range_value(A, 1, 1 << n)
    return complex((-1) ** n * total)


def permanent_parallel(M, workers: int = 1) -> complex:
    """Permanent with the subset space split into ``workers`` contiguous
    ranges.

    Each range is evaluated independently (threads; the jitted kernel
    releases the GIL) and the per-range values are summed in fixed range
    order, so the result is bit-identical to :func:`permanent_ryser` at
    ``workers=1`` and within 1e-12 relative of it for any worker count.
    """
    A = _square(M)
    n = A.shape[0]
    if n > MAX_RYSER_DIM:
        raise SizeLimitError(f"permanent_parallel capped at n <= {MAX_RYSER_DIM}, got {n}")
    if workers < 1:
        raise DimensionError(f"workers must be >= 1, got {workers}")
    lo, hi = 1, 1 << n
    count = hi - lo
    workers = min(workers, count)
    bounds = [lo + (count * t) // workers for t in range(workers + 1)]
    if workers == 1:
        partials = [_range_value(A, lo, hi)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_range_value, A, bounds[t], bounds[t + 1])
                for t in range(workers)
            ]
            partials = [f.result() for f in futures]
    total = 0.0 + 0.0j
    for p in partials:
        total += p
    return complex((-1) ** n * total)


def benchmark_permanents(dims, seed: int = 0, repeats: int = 3):
    """Time each permanent method on Haar-like random complex matrices.

    Returns rows ``(n, method, millis)`` suitable for CSV output; methods
    that would exceed their size cap are skipped.
    """
    import time

    from .matrices import haar_random_unitary

    rows = []
    for n in dims:
        A = haar_random_unitary(n, seed + n)
        methods = []
        if n <= MAX_NAIVE_DIM:
            methods.append(("naive", lambda: permanent_naive(A)))
        methods.append(("ryser", lambda: permanent_ryser(A)))
        methods.append(("parallel4", lambda: permanent_parallel(A, 4)))
        for name, fn in methods:
            fn()  # warm-up (JIT compile, cache fill)
            t0 = time.perf_counter()
            for _ in range(repeats):
                fn()
            dt = (time.perf_counter() - t0) / repeats
            rows.append((n, name, dt * 1e3))
    return rows
