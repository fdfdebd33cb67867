"""Iterative solvers: Landweber, block coordinate descent, and loping BCD.

The loping variant skips the k-th block update whenever the block
residual falls below ``tau * delta_b``, and terminates once a full
control window of consecutive steps has been skipped — at that point
every block residual is below the threshold, so continuing could only
amplify noise.  For exact data (``delta_b = 0``) no step is ever
skipped and the iteration reduces to plain BCD.

Per-block images ``h[b] = K(x[b])`` are cached so that one cycle of B
block updates costs exactly B applications of K and B of K*, the same
as a single Landweber iteration.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .blocks import lift, lift_adjoint, norm
from .operators import operator_norm
from .trace import RunTrace
from .validation import check_block_index, check_blocks, check_finite


class DivergenceError(RuntimeError):
    """The iteration produced non-finite values (step size too large)."""


# ---------------------------------------------------------------------------
# control sequences


class Control:
    """Block selection schedule b(k).

    Every window of ``window`` consecutive indices must cover all blocks;
    this is what guarantees that a quiet window certifies every block
    residual, not just the recently visited ones.
    """

    def __init__(self, n_blocks, sequence=None, window=None):
        self.n_blocks = int(n_blocks)
        if self.n_blocks < 1:
            raise ValueError("need at least one block")
        if sequence is None:
            self.sequence = None
            self.window = self.n_blocks if window is None else int(window)
        else:
            seq = [check_block_index(b, self.n_blocks) for b in sequence]
            if not seq:
                raise ValueError("custom control sequence is empty")
            self.sequence = seq
            self.window = len(seq) if window is None else int(window)
        if self.window < 1:
            raise ValueError("control window must be >= 1")

    @classmethod
    def cyclic(cls, n_blocks):
        """b(k) = k mod B."""
        return cls(n_blocks)

    @classmethod
    def from_sequence(cls, sequence, n_blocks, window=None):
        """Periodic repetition of an explicit index list."""
        return cls(n_blocks, sequence=sequence, window=window)

    def block(self, k):
        if self.sequence is None:
            return k % self.n_blocks
        return self.sequence[k % len(self.sequence)]

    def violations(self):
        """Windows that fail to cover all blocks, as human-readable strings.

        An empty list means the schedule is valid.  Periodicity makes it
        enough to check one full period of window start positions.
        """
        period = self.n_blocks if self.sequence is None else len(self.sequence)
        wanted = set(range(self.n_blocks))
        bad = []
        for k in range(period):
            window = tuple(self.block(k + i) for i in range(self.window))
            if set(window) != wanted:
                bad.append(f"window at k={k} covers {sorted(set(window))}: {window}")
        return bad


def validate_control(control):
    """Return the list of covering violations of ``control`` (empty if valid)."""
    return control.violations()


# ---------------------------------------------------------------------------
# step size rules


class ConstantStep:
    """Fixed step size.

    The certified choice is ``gamma_min / ||K||**2`` with
    ``gamma_min = 1 - 1/tau``, valid whenever no column of V exceeds
    unit norm (normalize V by its spectral norm to ensure this).
    """

    def __init__(self, value, gamma_min=None, theta_max=1.0):
        if value <= 0:
            raise ValueError(f"step size must be positive, got {value}")
        self.value = float(value)
        self.gamma_min = gamma_min
        self.theta_max = float(theta_max)

    @classmethod
    def for_operator(cls, op, tau=1.5, gamma_min=None):
        if gamma_min is None:
            gamma_min = 1.0 - 1.0 / tau
        if not 0.0 < gamma_min <= 1.0 - 1.0 / tau + 1e-15:
            raise ValueError(f"gamma_min must lie in (0, 1 - 1/tau], got {gamma_min}")
        k_norm = operator_norm(op.K)
        return cls(gamma_min / k_norm ** 2, gamma_min=gamma_min)

    def __call__(self, r, delta_b, grad_norm_sq):
        return self.value


class AdaptiveStep:
    """Residual-driven step size s = theta * A_k.

    ``A_k = r (r - delta_b) / ||g||**2`` where ``g`` is the updated
    block's gradient; only evaluated on steps that are actually taken,
    where ``r >= tau * delta_b > delta_b`` holds.
    """

    def __init__(self, theta=1.0, theta_max=None, gamma_min=None):
        if theta_max is None:
            theta_max = theta
        if not 0.0 < theta <= theta_max < 2.0:
            raise ValueError(
                f"need 0 < theta <= theta_max < 2, got theta={theta}, theta_max={theta_max}"
            )
        self.theta = float(theta)
        self.theta_max = float(theta_max)
        self.gamma_min = gamma_min

    def __call__(self, r, delta_b, grad_norm_sq):
        if r < delta_b:
            raise ValueError(
                f"adaptive step requires residual {r} >= noise level {delta_b}"
            )
        if grad_norm_sq == 0.0:
            return 0.0
        return self.theta * r * (r - delta_b) / grad_norm_sq


# ---------------------------------------------------------------------------
# stopping rule and state


@dataclass
class StopRule:
    """Loping threshold and termination safeguards.

    ``delta`` may be a scalar noise level or one value per block.  The
    window length must match the control's so that a quiet window
    certifies every block.
    """

    tau: float = 1.5
    delta: float = 0.0
    window: int = 1
    max_iter: int = 10 ** 6

    def __post_init__(self):
        if self.tau <= 1.0:
            raise ValueError(f"tau must exceed 1, got {self.tau}")
        if np.any(np.asarray(self.delta) < 0.0):
            raise ValueError("noise levels must be nonnegative")

    def delta_for(self, b, n_blocks):
        d = np.asarray(self.delta, dtype=float)
        if d.ndim == 0:
            return float(d)
        if d.shape != (n_blocks,):
            raise ValueError(
                f"per-block noise levels have shape {d.shape}, expected ({n_blocks},)"
            )
        return float(d[b])


@dataclass
class SolverState:
    """Result of a solver run."""

    x: np.ndarray
    h: np.ndarray | None
    n_steps: int
    trace: RunTrace
    converged: bool
    stop_index: int | None = None
    snapshots: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# elementary operations


def loping_flag(r, tau, delta_b):
    """1 if the update at block residual ``r`` is taken, 0 if it is skipped.

    The comparison is inclusive: ``r == tau * delta_b`` still updates.
    With ``delta_b = 0`` (exact data) the flag is always 1.
    """
    if tau <= 1.0:
        raise ValueError(f"tau must exceed 1, got {tau}")
    if delta_b < 0.0 or r < 0.0:
        raise ValueError("residual and noise level must be nonnegative")
    return 1 if r >= tau * delta_b else 0


def block_residual(V, residual, b):
    """Norm of the blockwise projection of ``residual`` onto column b of V.

    Equals ``norm(project_column(V, b, residual))`` but costs only one
    block combination: ||sum_d V[d, b] residual[d]|| / ||v_b||.
    """
    residual = check_blocks(residual, name="residual")
    v = np.asarray(V, dtype=float)[:, b]
    mixed = np.tensordot(v, residual, axes=(0, 0))
    return float(np.linalg.norm(mixed) / np.linalg.norm(v))


def landweber_step(op, x, y_delta, s):
    """One full-gradient step; returns (x_next, pre-update residual norm)."""
    x = check_blocks(x, n_blocks=op.n_blocks, name="x")
    res = y_delta - op.apply(x)
    x_next = x + s * op.adjoint_apply(res)
    check_finite(x_next, "landweber step")
    return x_next, norm(res)


def bcd_step(op, x, y_delta, b, s, h=None):
    """One block update of block ``b``; returns (x_next, h_next).

    ``h`` is the cached blockwise image K(x[b]); when supplied, the
    forward value A x is assembled from it by mixing alone, so the step
    costs one K* (gradient) plus one K (cache refresh).
    """
    x = check_blocks(x, n_blocks=op.n_blocks, name="x")
    b = check_block_index(b, op.n_blocks)
    if h is None:
        h = op.apply_blockwise(x)
    res = y_delta - lift(op.V, h)
    g = op.K.adjoint_apply(np.tensordot(op.V[:, b], res, axes=(0, 0)))
    x_next = x.copy()
    x_next[b] = x[b] + s * g
    check_finite(x_next[b], "bcd step")
    h_next = h.copy()
    h_next[b] = op.K.apply(x_next[b])
    return x_next, h_next


def adaptive_step_size(op, x, y_delta, b, delta_b, theta):
    """Step size theta * r (r - delta_b) / ||g||^2 for a step at block ``b``.

    Requires ``r >= delta_b`` (guaranteed by the loping flag for taken
    steps).  Returns 0.0 when the gradient vanishes, in which case the
    residual projection vanished as well.
    """
    x = check_blocks(x, n_blocks=op.n_blocks, name="x")
    res = y_delta - op.apply(x)
    r = block_residual(op.V, res, b)
    if r < delta_b:
        raise ValueError(f"residual {r} below noise level {delta_b} at block {b}")
    g = op.K.adjoint_apply(np.tensordot(op.V[:, b], res, axes=(0, 0)))
    gsq = float(np.vdot(g, g))
    rule = AdaptiveStep(theta=theta)
    return rule(r, delta_b, gsq)


# ---------------------------------------------------------------------------
# drivers


def _errors(V, x, reference):
    if reference is None:
        return np.nan, np.nan
    diff = x - reference
    return norm(diff), norm(lift(V, diff))


def run_loping_bcd(
    op,
    x0,
    y_delta,
    control,
    steps,
    stop,
    reference=None,
    snapshot_stride=None,
    debug=False,
):
    """Run the loping BCD iteration until a quiet window or ``max_iter``.

    Parameters
    ----------
    op : TensorProductOperator
        Forward map A = V (x) K.
    x0, y_delta : block arrays
        Initial guess (B blocks) and data (D blocks).
    control : Control
        Block schedule; its window length must equal ``stop.window``.
    steps : callable
        Step rule ``steps(r, delta_b, grad_norm_sq) -> s``.
    stop : StopRule
        Loping threshold tau, per-block noise levels, window length and
        iteration safeguard.
    reference : block array, optional
        When given, per-iteration plain-norm and lifted-norm errors are
        recorded in the trace.
    snapshot_stride : int, optional
        Store a copy of the iterate every this many cycles.
    debug : bool
        Keep the last ``window + 1`` iterates and verify at termination
        that they are bitwise identical (the skipped-step invariant).

    Returns
    -------
    SolverState
        ``converged`` is True when the quiet-window rule fired;
        ``stop_index`` is then the first index of the quiet window.
        Hitting ``max_iter`` leaves ``converged`` False (no exception).
    """
    if control.window != stop.window:
        raise ValueError(
            f"control window {control.window} != stop window {stop.window}"
        )
    x = check_blocks(x0, n_blocks=op.n_blocks, name="x0").copy()
    y_delta = check_blocks(y_delta, n_blocks=op.n_data_blocks, name="y_delta")
    check_finite(x, "x0")
    check_finite(y_delta, "y_delta")
    if reference is not None:
        reference = check_blocks(reference, n_blocks=op.n_blocks, name="reference")

    B = op.n_blocks
    V = op.V
    h = op.apply_blockwise(x)
    trace = RunTrace()
    snapshots = []
    recent = deque(maxlen=stop.window + 1) if debug else None
    quiet = 0
    stop_index = None
    k = 0
    while k < stop.max_iter:
        if snapshot_stride and k % (snapshot_stride * B) == 0:
            snapshots.append((k, x.copy()))
        b = control.block(k)
        res = y_delta - lift(V, h)
        r = block_residual(V, res, b)
        delta_b = stop.delta_for(b, B)
        d = loping_flag(r, stop.tau, delta_b)
        objective = 0.5 * norm(res) ** 2
        if d:
            g = op.K.adjoint_apply(np.tensordot(V[:, b], res, axes=(0, 0)))
            s = steps(r, delta_b, float(np.vdot(g, g)))
            x[b] += s * g
            if not np.all(np.isfinite(x[b])):
                raise DivergenceError(f"non-finite iterate at iteration {k}")
            h[b] = op.K.apply(x[b])
            quiet = 0
        else:
            s = 0.0
            quiet += 1
        if recent is not None:
            recent.append(x.copy())
        err2, errv = _errors(V, x, reference)
        trace.append(k, k // B, b, d, s, r, err2, errv, objective)
        k += 1
        if quiet >= stop.window:
            stop_index = k - stop.window
            break
    if recent is not None and stop_index is not None:
        for snap in recent:
            assert np.array_equal(snap, x), "quiet window altered the iterate"
    return SolverState(
        x=x,
        h=h,
        n_steps=k,
        trace=trace,
        converged=stop_index is not None,
        stop_index=stop_index,
        snapshots=snapshots,
    )


def run_landweber(
    op,
    x0,
    y_delta,
    step_size,
    max_iter,
    tau=1.5,
    delta=None,
    reference=None,
):
    """Run the Landweber iteration with an optional discrepancy stop.

    When ``delta`` is given, the run terminates at the first iterate
    whose full residual satisfies ``||A x - y_delta|| <= tau * delta``
    (checked before updating, so a satisfied initial guess takes zero
    steps); otherwise it runs for exactly ``max_iter`` iterations.
    """
    x = check_blocks(x0, n_blocks=op.n_blocks, name="x0").copy()
    y_delta = check_blocks(y_delta, n_blocks=op.n_data_blocks, name="y_delta")
    check_finite(x, "x0")
    check_finite(y_delta, "y_delta")
    if reference is not None:
        reference = check_blocks(reference, n_blocks=op.n_blocks, name="reference")
    if step_size <= 0:
        raise ValueError(f"step size must be positive, got {step_size}")

    trace = RunTrace()
    converged = False
    stop_index = None
    k = 0
    while k < max_iter:
        res = y_delta - op.apply(x)
        rnorm = norm(res)
        if delta is not None and rnorm <= tau * delta:
            converged = True
            stop_index = k
            break
        x += step_size * op.adjoint_apply(res)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite iterate at iteration {k}")
        err2, errv = _errors(op.V, x, reference)
        trace.append(k, k, -1, 1, step_size, rnorm, err2, errv, 0.5 * rnorm ** 2)
        k += 1
    if delta is None:
        converged = True
    return SolverState(
        x=x,
        h=None,
        n_steps=k,
        trace=trace,
        converged=converged,
        stop_index=stop_index,
    )


# ---------------------------------------------------------------------------
# estimator layer


class LopingBCD(BaseEstimator):
    """Loping block coordinate descent as a fit-shaped estimator.

    Parameters
    ----------
    op : TensorProductOperator
        Forward map; treated as a fixed hyperparameter.
    tau : float
        Loping multiplier (> 1).
    delta : float or array
        Noise level(s); 0 reproduces plain BCD with a fixed budget.
    step_rule : callable, optional
        Defaults to the certified constant step for ``op``.
    control : Control, optional
        Defaults to cyclic over the operator's blocks.
    max_iter : int
        Single-step safeguard budget.

    After :meth:`fit`, the solution is in ``x_`` with the run trace in
    ``trace_``.
    """

    def __init__(self, op, tau=1.5, delta=0.0, step_rule=None, control=None,
                 max_iter=10 ** 6):
        self.op = op
        self.tau = tau
        self.delta = delta
        self.step_rule = step_rule
        self.control = control
        self.max_iter = max_iter

    def fit(self, y, x0=None, reference=None):
        control = self.control or Control.cyclic(self.op.n_blocks)
        steps = self.step_rule or ConstantStep.for_operator(self.op, tau=self.tau)
        stop = StopRule(tau=self.tau, delta=self.delta, window=control.window,
                        max_iter=self.max_iter)
        y = check_blocks(y, n_blocks=self.op.n_data_blocks, name="y")
        if x0 is None:
            x0 = np.zeros((self.op.n_blocks, self.op.K.domain_dim))
        state = run_loping_bcd(self.op, x0, y, control, steps, stop,
                               reference=reference)
        self.x_ = state.x
        self.trace_ = state.trace
        self.n_iter_ = state.n_steps
        self.stop_index_ = state.stop_index
        self.converged_ = state.converged
        return self


class Landweber(BaseEstimator):
    """Landweber iteration as a fit-shaped estimator.

    ``delta=None`` runs a fixed budget of ``max_iter`` iterations;
    otherwise the discrepancy principle stops the run.  The default
    step size matches the constant BCD rule so the two methods are
    directly comparable.
    """

    def __init__(self, op, step_size=None, tau=1.5, delta=None, max_iter=1000):
        self.op = op
        self.step_size = step_size
        self.tau = tau
        self.delta = delta
        self.max_iter = max_iter

    def fit(self, y, x0=None, reference=None):
        step = self.step_size
        if step is None:
            step = ConstantStep.for_operator(self.op, tau=self.tau).value
        y = check_blocks(y, n_blocks=self.op.n_data_blocks, name="y")
        if x0 is None:
            x0 = np.zeros((self.op.n_blocks, self.op.K.domain_dim))
        state = run_landweber(self.op, x0, y, step, self.max_iter,
                              tau=self.tau, delta=self.delta,
                              reference=reference)
        self.x_ = state.x
        self.trace_ = state.trace
        self.n_iter_ = state.n_steps
        self.stop_index_ = state.stop_index
        self.converged_ = state.converged
        return self
