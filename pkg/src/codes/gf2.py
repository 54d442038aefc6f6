"""
Gaussian elimination over GF(2) on numpy uint8 matrices.

All functions take array-likes of 0/1 entries, never modify their
arguments, and return fresh ``np.uint8`` arrays.
"""

from typing import Optional

import numpy as np

from src.codes.bitstring import BitString
from src.utils.errors import DimensionError


def as_matrix(rows, cols: Optional[int] = None) -> np.ndarray:
    """
    Coerce rows (strings, BitStrings or nested lists) to a 2-D uint8 matrix.

    Args:
        rows: Iterable of rows, or an existing array
        cols: Column count, needed only when ``rows`` is empty

    Returns:
        Matrix with entries reduced mod 2
    """
    if isinstance(rows, np.ndarray):
        matrix = rows.astype(np.uint8) % 2
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1)
        return matrix

    converted = []
    for row in rows:
        if isinstance(row, BitString):
            converted.append(row.to_array())
        elif isinstance(row, str):
            converted.append(BitString.from_str(row).to_array())
        else:
            converted.append(np.asarray(row, dtype=np.uint8) % 2)

    if not converted:
        return np.zeros((0, cols or 0), dtype=np.uint8)

    widths = {len(r) for r in converted}
    if len(widths) != 1:
        raise DimensionError(f"Rows have different lengths: {sorted(widths)}")
    return np.vstack(converted).astype(np.uint8)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product mod 2."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"Cannot multiply shapes {a.shape} and {b.shape}")
    return (a @ b % 2).astype(np.uint8)


def rref(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """
    Reduced row echelon form over GF(2).

    Returns:
        Tuple of (reduced matrix, pivot column indices). Zero rows sit at
        the bottom; row i of the result has its leading 1 in pivots[i].
    """
    reduced = np.array(matrix, dtype=np.uint8, copy=True) % 2
    if reduced.ndim != 2:
        raise DimensionError(f"Expected a 2-D matrix, got shape {reduced.shape}")

    num_rows, num_cols = reduced.shape
    pivots: list[int] = []
    row = 0
    for col in range(num_cols):
        if row >= num_rows:
            break
        candidates = np.nonzero(reduced[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot_row = row + int(candidates[0])
        if pivot_row != row:
            reduced[[row, pivot_row]] = reduced[[pivot_row, row]]
        others = reduced[:, col].astype(bool)
        others[row] = False
        reduced[others] ^= reduced[row]
        pivots.append(col)
        row += 1
    return reduced, pivots


def rank(matrix: np.ndarray) -> int:
    return len(rref(matrix)[1])


def row_basis(matrix: np.ndarray) -> np.ndarray:
    """Independent rows spanning the same row space (RREF rows)."""
    reduced, pivots = rref(matrix)
    return reduced[: len(pivots)]


def null_space(matrix: np.ndarray) -> np.ndarray:
    """
    Basis of {v : matrix · vᵀ = 0}, one vector per row.

    The returned basis has one row per free column of the RREF.
    """
    matrix = np.asarray(matrix, dtype=np.uint8)
    num_cols = matrix.shape[1]
    reduced, pivots = rref(matrix)
    free = [c for c in range(num_cols) if c not in pivots]
    basis = np.zeros((len(free), num_cols), dtype=np.uint8)
    for i, free_col in enumerate(free):
        basis[i, free_col] = 1
        for pivot_row, pivot_col in enumerate(pivots):
            basis[i, pivot_col] = reduced[pivot_row, free_col]
    return basis


def solve_left(matrix: np.ndarray, target: np.ndarray) -> Optional[np.ndarray]:
    """
    Find y with y · matrix = target, i.e. express target in the row space.

    Free variables are set to zero, so the solution is deterministic.

    Returns:
        Coefficient vector of length ``matrix.shape[0]``, or None when
        ``target`` is not in the row space.
    """
    matrix = np.asarray(matrix, dtype=np.uint8)
    target = np.asarray(target, dtype=np.uint8).ravel() % 2
    num_rows, num_cols = matrix.shape
    if target.size != num_cols:
        raise DimensionError(f"Target length {target.size} does not match {num_cols} columns")

    augmented = np.hstack([matrix.T, target.reshape(-1, 1)])
    reduced, pivots = rref(augmented)
    if num_rows in pivots:
        return None

    solution = np.zeros(num_rows, dtype=np.uint8)
    for pivot_row, pivot_col in enumerate(pivots):
        solution[pivot_col] = reduced[pivot_row, -1]
    return solution


def solve_right(matrix: np.ndarray, target: np.ndarray) -> Optional[np.ndarray]:
    """Find x with matrix · xᵀ = target (free variables zero), or None."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    return solve_left(matrix.T, target)


def in_row_space(matrix: np.ndarray, vector: np.ndarray) -> bool:
    matrix = np.asarray(matrix, dtype=np.uint8)
    if matrix.shape[0] == 0:
        return not np.any(np.asarray(vector) % 2)
    return solve_left(matrix, vector) is not None


def span(matrix: np.ndarray) -> np.ndarray:
    """
    All 2^rows combinations of the rows, as a (2^rows, cols) matrix.

    Row m of the result is the combination whose coefficient vector is the
    binary expansion of m (most significant coefficient first).
    """
    matrix = np.asarray(matrix, dtype=np.uint8)
    num_rows = matrix.shape[0]
    indices = np.arange(1 << num_rows, dtype=np.int64)
    shifts = np.arange(num_rows - 1, -1, -1, dtype=np.int64)
    coefficients = ((indices[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return matmul(coefficients, matrix) if num_rows else np.zeros((1, matrix.shape[1]), dtype=np.uint8)


def rows_to_ints(matrix: np.ndarray) -> np.ndarray:
    """Pack each row into an integer with column 0 as the most significant bit."""
    matrix = np.asarray(matrix, dtype=np.int64)
    num_cols = matrix.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(num_cols - 1, -1, -1, dtype=np.int64))
    return matrix @ weights
