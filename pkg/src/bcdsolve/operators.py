"""Linear operators: the tensor-product forward map and its building blocks.

The forward operator has the structure ``A = V (x) K`` where ``V`` is a
D x B mixing matrix of full column rank and ``K`` is a linear operator
acting identically on every block.  Applying ``A`` factors as "K on each
block, then mix by V", and the adjoint as "mix by V^T, then K* on each
block"; both factorizations cost B applications of K (or K*) regardless
of D.
"""

import warnings

import numpy as np

from .blocks import lift, lift_adjoint
from .validation import check_block_index, check_blocks, check_matrix


class ConvergenceWarning(UserWarning):
    """Power iteration hit its iteration cap before reaching tolerance."""


class LinearOperator:
    """Matrix-free linear map from R^domain_dim to R^range_dim.

    Subclasses implement :meth:`apply` and :meth:`adjoint_apply`; the
    pair must pass the adjoint test <Kx, y> = <x, K*y>.
    """

    def __init__(self, domain_dim, range_dim):
        self.domain_dim = int(domain_dim)
        self.range_dim = int(range_dim)

    def apply(self, x):
        raise NotImplementedError

    def adjoint_apply(self, y):
        raise NotImplementedError


class MatrixOperator(LinearOperator):
    """Dense-matrix backed operator; the adjoint is the literal transpose."""

    def __init__(self, matrix):
        self.matrix = check_matrix(matrix, name="matrix")
        super().__init__(self.matrix.shape[1], self.matrix.shape[0])

    def apply(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def adjoint_apply(self, y):
        return self.matrix.T @ np.asarray(y, dtype=float)


class IdentityOperator(LinearOperator):
    def __init__(self, dim):
        super().__init__(dim, dim)

    def apply(self, x):
        return np.asarray(x, dtype=float)

    def adjoint_apply(self, y):
        return np.asarray(y, dtype=float)


class CountingOperator(LinearOperator):
    """Wrapper counting apply/adjoint calls; used to audit solver cost."""

    def __init__(self, op):
        self.op = op
        self.n_apply = 0
        self.n_adjoint = 0
        super().__init__(op.domain_dim, op.range_dim)

    def apply(self, x):
        self.n_apply += 1
        return self.op.apply(x)

    def adjoint_apply(self, y):
        self.n_adjoint += 1
        return self.op.adjoint_apply(y)

    @property
    def n_calls(self):
        return self.n_apply + self.n_adjoint

    def reset(self):
        self.n_apply = 0
        self.n_adjoint = 0


def integration_matrix(p):
    """Composite trapezoid matrix for s -> integral_0^s f on p intervals.

    Acts on samples at the p+1 nodes t_j = j/p of [0, 1]; row 0 is zero,
    so the output always vanishes at t = 0.  Exact for constant and
    linear integrands.
    """
    if p < 1:
        raise ValueError(f"interval count p must be >= 1, got {p}")
    w = np.zeros((p + 1, p + 1))
    for j in range(1, p + 1):
        w[j, 0] = 0.5 / p
        w[j, 1:j] = 1.0 / p
        w[j, j] = 0.5 / p
    return w


class IntegrationOperator(MatrixOperator):
    """Discretized cumulative integration on [0, 1] (a smoothing Volterra map).

    The continuous map is bounded with norm below 1/sqrt(2) and has
    non-closed range, which is what makes inversion ill-posed.  The
    discrete adjoint is the transpose of the quadrature matrix, so the
    adjoint test holds to rounding.
    """

    def __init__(self, p):
        self.p = int(p)
        super().__init__(integration_matrix(self.p))


def project_block(x, b):
    """Keep block ``b`` of ``x`` and zero all others (the projector P_b)."""
    x = check_blocks(x, name="x")
    b = check_block_index(b, x.shape[0])
    out = np.zeros_like(x)
    out[b] = x[b]
    return out


def project_column(V, b, y):
    """Blockwise orthogonal projection onto the span of column b of ``V``.

    Applies (v_b v_b^T / ||v_b||^2) (x) Id to the block vector ``y``;
    idempotent and self-adjoint.  Raises on a vanishing column.
    """
    y = check_blocks(y, name="y")
    V = check_matrix(V)
    if V.shape[0] != y.shape[0]:
        raise ValueError(f"y has {y.shape[0]} blocks, expected {V.shape[0]}")
    b = check_block_index(b, V.shape[1])
    v = V[:, b]
    nsq = float(v @ v)
    if nsq == 0.0:
        raise ValueError(f"column {b} of V vanishes")
    coeff = np.tensordot(v, y, axes=(0, 0)) / nsq
    return np.multiply.outer(v, coeff)


class TensorProductOperator:
    """The forward map A = V (x) K on block vectors.

    Parameters
    ----------
    V : array, shape (D, B)
        Mixing matrix.  Must have full column rank and no vanishing
        column; both are checked numerically on construction.
    K : LinearOperator
        The per-block operator.

    Notes
    -----
    ``apply`` maps (B, n) block arrays to (D, m); ``adjoint_apply`` maps
    back.  Both use exactly B applications of K resp. K*.
    """

    #: relative singular-value threshold for the rank check
    rank_rtol = 1e-10

    def __init__(self, V, K):
        V = check_matrix(V, name="V")
        d, b = V.shape
        if d < b:
            raise ValueError(f"V must have at least as many rows as columns, got {V.shape}")
        col_sq = (V ** 2).sum(axis=0)
        if np.any(col_sq == 0.0):
            raise ValueError("V has a vanishing column")
        sv = np.linalg.svd(V, compute_uv=False)
        if sv[-1] <= self.rank_rtol * sv[0]:
            raise ValueError(
                f"V is numerically rank deficient (singular values {sv})"
            )
        self.V = V
        self.K = K
        self.column_norms_sq = col_sq

    @property
    def n_blocks(self):
        return self.V.shape[1]

    @property
    def n_data_blocks(self):
        return self.V.shape[0]

    def apply_blockwise(self, x):
        """K applied to every block: x (B, n) -> (B, m)."""
        x = check_blocks(x, n_blocks=self.n_blocks, name="x")
        return np.stack([self.K.apply(x[b]) for b in range(x.shape[0])])

    def apply(self, x):
        """Forward map: (A x)[d] = sum_b V[d, b] K(x[b])."""
        return lift(self.V, self.apply_blockwise(x))

    def adjoint_apply(self, y):
        """Adjoint map: (A* y)[b] = K*(sum_d V[d, b] y[d])."""
        y = check_blocks(y, n_blocks=self.n_data_blocks, name="y")
        z = lift_adjoint(self.V, y)
        return np.stack([self.K.adjoint_apply(z[b]) for b in range(z.shape[0])])


def operator_norm(op, tol=1e-8, max_iter=10000, seed=0):
    """Largest singular value of ``op`` by power iteration on K* K.

    Deterministically seeded so that derived step-size bounds are
    reproducible.  Returns 0.0 for the zero operator; warns (and returns
    the current estimate) if the relative change has not dropped below
    ``tol`` within ``max_iter`` sweeps.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.domain_dim)
    nv = np.linalg.norm(v)
    v /= nv
    sigma = 0.0
    for _ in range(max_iter):
        w = op.adjoint_apply(op.apply(v))
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        sigma_new = float(np.sqrt(lam))
        v = w / lam
        if abs(sigma_new - sigma) <= tol * sigma_new:
            return sigma_new
        sigma = sigma_new
    warnings.warn(
        f"power iteration did not converge within {max_iter} iterations",
        ConvergenceWarning,
    )
    return sigma
