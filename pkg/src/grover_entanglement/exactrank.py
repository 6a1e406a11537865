"""Exact rank of small integer matrices by fraction-free elimination."""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


def integer_rank(matrix) -> int:
    """Rank over the rationals of an integer matrix (Bareiss elimination).

    Every intermediate entry stays an integer: each update
    ``(p * a[i][j] - a[i][c] * a[r][j]) // prev`` divides exactly.
    """
    rows = [[int(v) for v in row] for row in np.asarray(matrix, dtype=object).tolist()]
    if not rows or not rows[0]:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    prev = 1
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((i for i in range(rank, n_rows) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, n_rows):
            f = rows[i][col]
            ri = rows[i]
            rr = rows[rank]
            for j in range(col + 1, n_cols):
                ri[j] = (p * ri[j] - f * rr[j]) // prev
            ri[col] = 0
        prev = p
        rank += 1
    return rank


def exact_sign_rank(signs) -> int:
    """Exact rank of a matrix whose entries are all +1 or -1."""
    arr = np.asarray(signs)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-d matrix, got shape {arr.shape}")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise InvalidArgumentError("sign matrix entries must be +1 or -1")
    # rank is transpose-invariant; eliminate along the short side
    if arr.shape[0] > arr.shape[1]:
        arr = arr.T
    return integer_rank(arr.astype(np.int64))
