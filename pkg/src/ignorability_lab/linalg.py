"""Exact rank and null vectors for small rational matrices.

Rank uses Bareiss fraction-free elimination on an integer matrix obtained
by clearing each row's denominators.  Null vectors come from a separate
Gauss-Jordan pass over Fractions, so the two routes check each other.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np


def _integer_rows(matrix: Sequence[Sequence]) -> list[list[int]]:
    rows = []
    for row in matrix:
        row = [Fraction(v) for v in row]
        scale = lcm(*(v.denominator for v in row)) if row else 1
        rows.append([int(v * scale) for v in row])
    return rows


def bareiss_rank(matrix: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination."""
    a = _integer_rows(matrix)
    if not a or not a[0]:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, n_rows):
            for c in range(col + 1, n_cols):
                q, rem = divmod(p * a[r][c] - a[r][col] * a[rank][c], prev)
                assert rem == 0, "Bareiss step must divide exactly"
                a[r][c] = q
            a[r][col] = 0
        prev = p
        rank += 1
    return rank


def rref(matrix: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form over Fractions and the pivot columns."""
    a = [[Fraction(v) for v in row] for row in matrix]
    if not a:
        return a, []
    n_rows, n_cols = len(a), len(a[0])
    pivots, r = [], 0
    for col in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][col]
        a[r] = [v * inv for v in a[r]]
        for i in range(n_rows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == n_rows:
            break
    return a, pivots


def null_vector(matrix: Sequence[Sequence]) -> list[Fraction] | None:
    """A nonzero h with matrix @ h = 0, or None if the columns are independent."""
    a, pivots = rref(matrix)
    n_cols = len(matrix[0]) if matrix else 0
    free = [c for c in range(n_cols) if c not in pivots]
    if not free:
        return None
    j = free[0]
    h = [Fraction(0)] * n_cols
    h[j] = Fraction(1)
    for row, pc in zip(a, pivots):
        h[pc] = -row[j]
    return h


def float_rank(matrix: Sequence[Sequence], tol: float = 1e-10) -> int:
    arr = np.asarray(matrix, dtype=float)
    if arr.size == 0:
        return 0
    return int(np.linalg.matrix_rank(arr, tol=tol * max(1.0, np.abs(arr).max())))


def float_null_vector(matrix: Sequence[Sequence], tol: float = 1e-10) -> list[float] | None:
    arr = np.asarray(matrix, dtype=float)
    if float_rank(arr, tol) == arr.shape[1]:
        return None
    _, _, vt = np.linalg.svd(arr)
    return [float(v) for v in vt[-1]]
