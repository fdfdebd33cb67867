"""Input validation helpers shared across the package."""

import numpy as np


def check_blocks(x, n_blocks=None, name="x"):
    """Coerce ``x`` to a float64 block array of shape (B, ...).

    Axis 0 indexes the blocks; the remaining axes form the common
    per-block shape.  Raises ValueError if ``x`` is not at least 2-D,
    is empty, or has the wrong number of blocks.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim < 2:
        raise ValueError(f"{name} must have shape (B, ...), got {arr.shape}")
    if arr.shape[0] < 1 or arr.size == 0:
        raise ValueError(f"{name} must contain at least one nonempty block")
    if n_blocks is not None and arr.shape[0] != n_blocks:
        raise ValueError(
            f"{name} has {arr.shape[0]} blocks, expected {n_blocks}"
        )
    return arr


def check_same_shape(x, y, names=("x", "y")):
    if x.shape != y.shape:
        raise ValueError(
            f"{names[0]} and {names[1]} have mismatched shapes "
            f"{x.shape} vs {y.shape}"
        )


def check_matrix(V, n_cols=None, name="V"):
    """Coerce ``V`` to a 2-D float64 matrix, optionally fixing the column count."""
    M = np.asarray(V, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {M.shape}")
    if n_cols is not None and M.shape[1] != n_cols:
        raise ValueError(
            f"{name} has {M.shape[1]} columns, expected {n_cols}"
        )
    return M


def check_block_index(b, n_blocks):
    if not 0 <= b < n_blocks:
        raise IndexError(f"block index {b} out of range for {n_blocks} blocks")
    return int(b)


def check_finite(x, context=""):
    if not np.all(np.isfinite(x)):
        where = f" in {context}" if context else ""
        raise ValueError(f"non-finite values encountered{where}")
    return x
