"""Block-structured vectors and the norms used in the error analysis.

A block vector is a float64 ndarray of shape ``(B, ...)``: axis 0 indexes
the ``B`` blocks, the remaining axes form the common per-block shape
(samples of a function on [0, 1], or a pixel grid).  All inner products
are plain Euclidean sums over every component.
"""

import numpy as np

from .validation import check_blocks, check_matrix, check_same_shape


def inner(x, y):
    """Inner product sum_b <x[b], y[b]> of two block vectors of equal shape."""
    x = check_blocks(x, name="x")
    y = check_blocks(y, name="y")
    check_same_shape(x, y)
    return float(np.vdot(x, y))


def norm(x):
    """Euclidean norm sqrt(sum_b ||x[b]||^2) of a block vector."""
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def lift(V, x):
    """Mix blocks by the matrix ``V``: (lift(V, x))[d] = sum_b V[d, b] x[b].

    Maps a B-block vector to a D-block vector of the same per-block shape.
    """
    x = check_blocks(x, name="x")
    V = check_matrix(V, n_cols=x.shape[0])
    return np.tensordot(V, x, axes=(1, 0))


def lift_adjoint(V, y):
    """Adjoint of :func:`lift`: mixes D blocks back to B blocks using V^T."""
    y = check_blocks(y, name="y")
    V = check_matrix(V)
    if V.shape[0] != y.shape[0]:
        raise ValueError(
            f"y has {y.shape[0]} blocks, expected {V.shape[0]}"
        )
    return np.tensordot(V.T, y, axes=(1, 0))


def lifted_norm(V, x):
    """Norm ||lift(V, x)|| of the V-mixed block vector.

    This is the norm in which block coordinate descent is provably
    monotone; it is a genuine norm whenever ``V`` has full column rank.
    """
    return norm(lift(V, x))
