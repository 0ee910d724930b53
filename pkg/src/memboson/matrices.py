"""Dense complex matrix helpers: Haar-random unitaries, direct sums,
occupancy submatrices, and a plain-text matrix file format.

All functions are pure and operate on ``numpy`` complex arrays (row-major,
double precision). Nothing here mutates its inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = [
    "as_complex_matrix",
    "haar_random_unitary",
    "unitarity_deviation",
    "direct_sum",
    "submatrix",
    "save_matrix",
    "load_matrix",
]


def as_complex_matrix(M) -> np.ndarray:
    """Coerce input to a finite 2-D complex128 array (C-contiguous copy-free
    when possible)."""
    A = np.ascontiguousarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(np.float64))):
        raise DimensionError("matrix entries must be finite (no NaN/Inf)")
    return A


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    """Draw a ``dim x dim`` unitary from the Haar measure, deterministically
    per seed.

    A standard complex Gaussian matrix is QR-orthonormalized and each column
    is multiplied by the conjugate phase of the corresponding diagonal entry
    of the triangular factor. The phase correction removes the sign/phase
    ambiguity of the QR decomposition, which would otherwise bias the
    distribution away from Haar.
    """
    if dim < 1:
        raise DimensionError(f"dimension must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d.conj() / np.abs(d))


def unitarity_deviation(M) -> float:
    """Max-norm of ``M M^dag - I``; 0 for an exact unitary."""
    A = as_complex_matrix(M)
    n, m = A.shape
    if n != m:
        raise DimensionError(f"matrix must be square, got {n}x{m}")
    return float(np.max(np.abs(A @ A.conj().T - np.eye(n))))


def direct_sum(blocks) -> np.ndarray:
    """Block-diagonal matrix of the given blocks, off-block entries exactly
    zero."""
    mats = [as_complex_matrix(b) for b in blocks]
    if not mats:
        raise DimensionError("direct_sum requires at least one block")
    rows = sum(b.shape[0] for b in mats)
    cols = sum(b.shape[1] for b in mats)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for b in mats:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def submatrix(M, row_multiplicities, col_multiplicities) -> np.ndarray:
    """Matrix with row ``i`` of ``M`` repeated ``row_multiplicities[i]`` times
    and likewise for columns.

    This is the standard construction of the pattern matrix whose permanent
    gives a multi-photon transition amplitude: repeat output rows per
    occupancy, input columns per occupancy.
    """
    A = as_complex_matrix(M)
    rmult = np.asarray(row_multiplicities, dtype=np.int64)
    cmult = np.asarray(col_multiplicities, dtype=np.int64)
    if rmult.shape != (A.shape[0],) or cmult.shape != (A.shape[1],):
        raise DimensionError(
            f"multiplicity lengths {rmult.shape[0]}/{cmult.shape[0]} do not "
            f"match matrix shape {A.shape}"
        )
    if np.any(rmult < 0) or np.any(cmult < 0):
        raise DimensionError("multiplicities must be nonnegative")
    if rmult.sum() != cmult.sum():
        raise DimensionError(
            f"total row multiplicity {rmult.sum()} != total column "
            f"multiplicity {cmult.sum()}"
        )
    return np.repeat(np.repeat(A, rmult, axis=0), cmult, axis=1)


def save_matrix(path, M) -> None:
    """Write a matrix as plain text: header ``rows cols``, then one line per
    row of whitespace-separated ``re,im`` pairs (17 significant digits, exact
    double round trip)."""
    A = as_complex_matrix(M)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
            fh.write("\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DimensionError(f"bad matrix header in {path!r}: {header}")
        rows, cols = int(header[0]), int(header[1])
        out = np.empty((rows, cols), dtype=np.complex128)
        for i in range(rows):
            parts = fh.readline().split()
            if len(parts) != cols:
                raise DimensionError(
                    f"row {i} of {path!r} has {len(parts)} entries, expected {cols}"
                )
            for j, token in enumerate(parts):
                re_s, im_s = token.split(",")
                out[i, j] = complex(float(re_s), float(im_s))
    return out
