"""Dense GF(2) matrix arithmetic with column-tracking Gaussian elimination."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

BinaryMatrix = NDArray[np.uint8]
ColumnPermutation = NDArray[np.intp]


def as_binary_matrix(values: ArrayLike) -> BinaryMatrix:
    """Validate and convert to a 2-D uint8 matrix with entries in {0, 1}."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"Binary matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"Binary matrix needs at least one row and column, got {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("Binary matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


def identity_perm(n: int) -> ColumnPermutation:
    return np.arange(n, dtype=np.intp)


def inverse_perm(perm: ColumnPermutation) -> ColumnPermutation:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm), dtype=perm.dtype)
    return inv


def _check_perm(perm: ArrayLike, size: int) -> ColumnPermutation:
    p = np.asarray(perm, dtype=np.intp)
    if p.ndim != 1 or len(p) != size:
        raise ValueError(f"Permutation size {p.size} does not match {size} columns")
    if not np.array_equal(np.sort(p), np.arange(size)):
        raise ValueError("Permutation is not a bijection")
    return p


def mat_mul(a: ArrayLike, b: ArrayLike) -> BinaryMatrix:
    """Matrix product over GF(2)."""
    a = as_binary_matrix(a)
    b = as_binary_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"Inner dimensions differ: {a.shape} x {b.shape}")
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def vec_mul(v: ArrayLike, g: BinaryMatrix) -> NDArray[np.uint8]:
    """Encode a bit vector (or a stack of them) through a generator."""
    v = np.asarray(v, dtype=np.int64)
    return ((v @ g.astype(np.int64)) & 1).astype(np.uint8)


def apply_column_perm(g: ArrayLike, perm: ArrayLike) -> BinaryMatrix:
    """Column j of the result is column perm[j] of g."""
    g = as_binary_matrix(g)
    p = _check_perm(perm, g.shape[1])
    return g[:, p]


def systematize(
    g: ArrayLike,
    allow_column_swaps: bool = True,
) -> tuple[BinaryMatrix, ColumnPermutation, int]:
    """Reduce g (m x n) to [I_m | rest] by row operations and column swaps.

    Pivot for column p is the first row at or below p with a one. When no such
    row exists the lowest-index later column that has one is swapped in, and
    the swap is recorded in the returned permutation (column j of the output
    spans column perm[j] of the input). Stops early when the remaining rows
    are all zero; the returned rank tells the caller how far it got.
    """
    work = as_binary_matrix(g).copy()
    m, n = work.shape
    if m > n:
        raise ValueError(f"Cannot systematize {m}x{n}: more rows than columns")
    perm = identity_perm(n)

    rank = 0
    for p in range(m):
        rows = np.flatnonzero(work[p:, p])
        if rows.size == 0:
            if not allow_column_swaps:
                raise RuntimeError(f"Elimination needs a column swap at pivot {p}")
            later = np.flatnonzero(work[p:, p + 1:].any(axis=0))
            if later.size == 0:
                break
            c = p + 1 + int(later[0])
            work[:, [p, c]] = work[:, [c, p]]
            perm[[p, c]] = perm[[c, p]]
            rows = np.flatnonzero(work[p:, p])
        pivot = p + int(rows[0])
        if pivot != p:
            work[[p, pivot]] = work[[pivot, p]]
        hits = np.flatnonzero(work[:, p])
        hits = hits[hits != p]
        work[hits] ^= work[p]
        rank += 1

    return work, perm, rank
