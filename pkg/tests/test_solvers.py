import numpy as np
import pytest
from sklearn.base import clone

from bcdsolve import (
    AdaptiveStep,
    ConstantStep,
    Control,
    IdentityOperator,
    IntegrationOperator,
    Landweber,
    LopingBCD,
    MatrixOperator,
    StopRule,
    TensorProductOperator,
    adaptive_step_size,
    bcd_step,
    block_residual,
    landweber_step,
    loping_flag,
    norm,
    project_column,
    run_landweber,
    run_loping_bcd,
    validate_control,
)

V_BENCH = np.array([[-3.0, 1.0], [-1.0, 0.0]]) / 3.302775637731995


def scalar_op(k=1.0):
    return TensorProductOperator(np.array([[1.0]]), MatrixOperator([[k]]))


# ---------------------------------------------------------------------------
# loping flag


def test_loping_flag_exact_data_never_lopes():
    assert loping_flag(0.7, 1.5, 0.0) == 1
    assert loping_flag(0.0, 1.5, 0.0) == 1


def test_loping_flag_below_threshold():
    assert loping_flag(0.5, 1.5, 1.0) == 0


def test_loping_flag_boundary_inclusive():
    assert loping_flag(1.5, 1.5, 1.0) == 1


def test_loping_flag_invalid_tau():
    with pytest.raises(ValueError):
        loping_flag(1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        loping_flag(1.0, 0.5, 0.5)


# ---------------------------------------------------------------------------
# block residual


def test_block_residual_zero_at_solution():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(10))
    x = np.random.default_rng(0).standard_normal((2, 11))
    res = op.apply(x) - op.apply(x)
    assert block_residual(V_BENCH, res, 0) == 0.0


def test_block_residual_orthonormal_columns():
    rng = np.random.default_rng(1)
    res = rng.standard_normal((3, 5))
    for b in range(3):
        expected = norm(res[b])
        assert block_residual(np.eye(3), res, b) == pytest.approx(expected, rel=1e-14)


def test_block_residual_direct_evaluation_oracle():
    V = np.array([[-3.0, 1.0], [-1.0, 0.0]])
    res = np.array([[1.0], [0.0]])
    assert block_residual(V, res, 0) == pytest.approx(np.sqrt(0.9), rel=1e-14)


def test_block_residual_matches_projection_route():
    rng = np.random.default_rng(2)
    V = rng.standard_normal((4, 3))
    res = rng.standard_normal((4, 6))
    for b in range(3):
        assert block_residual(V, res, b) == pytest.approx(
            norm(project_column(V, b, res)), rel=1e-12
        )


# ---------------------------------------------------------------------------
# single steps


def test_landweber_step_fixed_point():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(10))
    x = np.random.default_rng(3).standard_normal((2, 11))
    y = op.apply(x)
    x_next, rnorm = landweber_step(op, x, y, 0.7)
    assert rnorm == 0.0
    assert np.array_equal(x_next, x)


def test_landweber_step_zero_step():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(10))
    x = np.random.default_rng(4).standard_normal((2, 11))
    y = np.random.default_rng(5).standard_normal((2, 11))
    x_next, _ = landweber_step(op, x, y, 0.0)
    assert np.array_equal(x_next, x)


def test_landweber_step_scalar_recursion():
    # x_{k+1} = x_k - s (x_k - y)
    op = scalar_op()
    x = np.zeros((1, 1))
    x, _ = landweber_step(op, x, np.ones((1, 1)), 1.0)
    assert x[0, 0] == 1.0


def test_landweber_step_rejects_nonfinite():
    op = scalar_op()
    with pytest.raises(ValueError):
        landweber_step(op, np.zeros((1, 1)), np.array([[np.inf]]), 1.0)


def test_bcd_step_single_block_equals_landweber():
    rng = np.random.default_rng(6)
    K = MatrixOperator(rng.standard_normal((4, 4)))
    op = TensorProductOperator(np.array([[1.0]]), K)
    x = rng.standard_normal((1, 4))
    y = rng.standard_normal((1, 4))
    lw, _ = landweber_step(op, x, y, 0.3)
    cd, _ = bcd_step(op, x, y, 0, 0.3)
    assert np.max(np.abs(lw - cd)) < 1e-14


def test_bcd_step_fixed_point():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(8))
    x = np.random.default_rng(7).standard_normal((2, 9))
    y = op.apply(x)
    x_next, h_next = bcd_step(op, x, y, 1, 0.5)
    assert np.array_equal(x_next, x)
    assert np.allclose(h_next, op.apply_blockwise(x), atol=0)


def test_bcd_step_dense_oracle():
    # P_b A^T (A x - y) with A = I_2: only block b moves
    op = TensorProductOperator(np.eye(2), IdentityOperator(1))
    x_next, _ = bcd_step(op, np.zeros((2, 1)), np.ones((2, 1)), 0, 1.0)
    assert np.array_equal(x_next, np.array([[1.0], [0.0]]))


def test_bcd_step_only_selected_block_changes():
    rng = np.random.default_rng(8)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(12))
    x = rng.standard_normal((2, 13))
    y = rng.standard_normal((2, 13))
    x_next, _ = bcd_step(op, x, y, 1, 0.4)
    assert np.array_equal(x_next[0], x[0])
    assert not np.array_equal(x_next[1], x[1])


def test_bcd_step_cached_h_matches_fresh():
    rng = np.random.default_rng(9)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(12))
    x = rng.standard_normal((2, 13))
    y = rng.standard_normal((2, 13))
    h = op.apply_blockwise(x)
    a, _ = bcd_step(op, x, y, 0, 0.4, h=h)
    b, _ = bcd_step(op, x, y, 0, 0.4)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# adaptive step size


def test_adaptive_step_isometry_case():
    op = scalar_op()
    x = np.zeros((1, 1))
    y = np.array([[2.0]])
    for theta in (0.5, 1.0, 1.5):
        assert adaptive_step_size(op, x, y, 0, 0.0, theta) == pytest.approx(theta)


def test_adaptive_step_zero_residual():
    op = scalar_op()
    x = np.ones((1, 1))
    y = op.apply(x)
    assert adaptive_step_size(op, x, y, 0, 0.0, 1.0) == 0.0


def test_adaptive_step_plug_in_oracle():
    # r = 2, delta = 1, |v| = 1, |grad|^2 = 4 -> A = 0.5
    op = scalar_op()
    s = adaptive_step_size(op, np.zeros((1, 1)), np.array([[2.0]]), 0, 1.0, 1.0)
    assert s == pytest.approx(0.5, rel=1e-14)


def test_adaptive_step_requires_residual_above_noise():
    op = scalar_op()
    with pytest.raises(ValueError):
        adaptive_step_size(op, np.zeros((1, 1)), np.array([[0.5]]), 0, 1.0, 1.0)


def test_adaptive_step_rule_validation():
    with pytest.raises(ValueError):
        AdaptiveStep(theta=2.0)
    with pytest.raises(ValueError):
        AdaptiveStep(theta=0.0)
    with pytest.raises(ValueError):
        AdaptiveStep(theta=1.0, theta_max=2.0)


def test_constant_step_validation():
    with pytest.raises(ValueError):
        ConstantStep(0.0)
    with pytest.raises(ValueError):
        ConstantStep.for_operator(scalar_op(), tau=1.5, gamma_min=0.5)


def test_constant_step_certified_value():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(100))
    rule = ConstantStep.for_operator(op, tau=1.5)
    from bcdsolve import operator_norm

    expected = (1.0 - 1.0 / 1.5) / operator_norm(op.K) ** 2
    assert rule.value == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# control sequences


def test_cyclic_control_valid():
    c = Control.cyclic(3)
    assert [c.block(k) for k in range(6)] == [0, 1, 2, 0, 1, 2]
    assert validate_control(c) == []


def test_custom_control_violation_reported():
    c = Control.from_sequence([0, 0, 1, 1], n_blocks=2, window=2)
    report = validate_control(c)
    assert report and "k=0" in report[0]


def test_custom_control_alternating_valid():
    c = Control.from_sequence([0, 1], n_blocks=2, window=2)
    assert validate_control(c) == []


def test_control_rejects_bad_indices():
    with pytest.raises(IndexError):
        Control.from_sequence([0, 2], n_blocks=2)


# ---------------------------------------------------------------------------
# loping BCD driver


def test_exact_data_reduces_to_plain_bcd():
    rng = np.random.default_rng(10)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(15))
    x_true = rng.standard_normal((2, 16))
    y = op.apply(x_true)
    st = run_loping_bcd(
        op, np.zeros((2, 16)), y, Control.cyclic(2), ConstantStep(0.5),
        StopRule(tau=1.5, delta=0.0, window=2, max_iter=40),
    )
    assert st.trace.d == [1] * 40
    assert not st.converged  # budget exhausted, no quiet window with exact data


def test_quiet_start_stops_immediately():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(6))
    x0 = np.zeros((2, 7))
    y = np.full((2, 7), 1e-8)
    st = run_loping_bcd(
        op, x0, y, Control.cyclic(2), ConstantStep(0.5),
        StopRule(tau=1.5, delta=1.0, window=2, max_iter=100), debug=True,
    )
    assert st.stop_index == 0
    assert st.n_steps == 2
    assert np.array_equal(st.x, x0)


def test_six_step_dense_simulation_match():
    rng = np.random.default_rng(11)
    K = MatrixOperator(rng.standard_normal((3, 3)) * 0.5)
    V = rng.standard_normal((3, 2))
    V /= np.linalg.svd(V, compute_uv=False)[0]
    op = TensorProductOperator(V, K)
    x_true = rng.standard_normal((2, 3))
    noise = 0.1 * rng.standard_normal((3, 3))
    yd = op.apply(x_true) + noise
    delta_b = np.array([norm(project_column(V, b, noise)) for b in range(2)])
    s = ConstantStep.for_operator(op, tau=1.5).value
    tau = 1.5

    # independent dense straight-line simulation
    a_dense = np.kron(V, K.matrix)
    q = [
        np.kron(np.outer(V[:, b], V[:, b]) / (V[:, b] @ V[:, b]), np.eye(3))
        for b in range(2)
    ]
    p = [np.kron(np.diag([1.0, 0.0]), np.eye(3)), np.kron(np.diag([0.0, 1.0]), np.eye(3))]
    xk = np.zeros(6)
    expected = []
    for k in range(6):
        b = k % 2
        res = yd.ravel() - a_dense @ xk
        if np.linalg.norm(q[b] @ res) >= tau * delta_b[b]:
            xk = xk + s * (p[b] @ (a_dense.T @ res))
        expected.append(xk.copy())

    for n in range(1, 7):
        st = run_loping_bcd(
            op, np.zeros((2, 3)), yd, Control.cyclic(2), ConstantStep(s),
            StopRule(tau=tau, delta=delta_b, window=2, max_iter=n),
        )
        assert np.max(np.abs(st.x.ravel() - expected[n - 1])) < 1e-12


def test_window_mismatch_rejected():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(5))
    with pytest.raises(ValueError):
        run_loping_bcd(
            op, np.zeros((2, 6)), np.zeros((2, 6)), Control.cyclic(2),
            ConstantStep(0.1), StopRule(tau=1.5, delta=0.0, window=3, max_iter=5),
        )


def test_nonfinite_data_rejected():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(5))
    y = np.zeros((2, 6))
    y[0, 0] = np.nan
    with pytest.raises(ValueError):
        run_loping_bcd(
            op, np.zeros((2, 6)), y, Control.cyclic(2), ConstantStep(0.1),
            StopRule(tau=1.5, delta=0.0, window=2, max_iter=5),
        )


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(tau=1.0, delta=0.0, window=2)
    with pytest.raises(ValueError):
        StopRule(tau=1.5, delta=-1.0, window=2)


# ---------------------------------------------------------------------------
# Landweber driver


def test_landweber_infinite_delta_stops_at_zero():
    op = scalar_op()
    st = run_landweber(op, np.zeros((1, 1)), np.ones((1, 1)), 0.5, 100,
                       delta=np.inf)
    assert st.n_steps == 0
    assert st.stop_index == 0
    assert st.converged


def test_landweber_residual_strictly_decreasing_exact_data():
    # spectral oracle: stable step keeps every error mode contracting
    rng = np.random.default_rng(12)
    K = MatrixOperator(np.eye(4) + 0.2 * rng.standard_normal((4, 4)))
    V = np.array([[2.0, -1.0], [1.0, 2.0]])
    V /= np.linalg.svd(V, compute_uv=False)[0]
    op = TensorProductOperator(V, K)
    a_dense = np.kron(V, K.matrix)
    s = 1.9 / np.linalg.norm(a_dense, 2) ** 2
    y = op.apply(rng.standard_normal((2, 4)))
    st = run_landweber(op, np.zeros((2, 4)), y, s, 50)
    residuals = st.trace.column("residual")
    assert np.all(np.diff(residuals) < 0.0)


def test_landweber_scalar_closed_form():
    op = scalar_op()
    st = run_landweber(op, np.zeros((1, 1)), np.ones((1, 1)), 0.5, 12)
    assert st.x[0, 0] == pytest.approx(1.0 - 2.0 ** -12, abs=1e-15)


def test_landweber_discrepancy_stop_certifies_residual():
    rng = np.random.default_rng(13)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(20))
    x_true = rng.standard_normal((2, 21))
    noise = 0.01 * rng.standard_normal((2, 21))
    yd = op.apply(x_true) + noise
    delta = norm(noise)
    st = run_landweber(op, np.zeros((2, 21)), yd, 0.8, 10 ** 6, tau=1.5, delta=delta)
    assert st.converged
    assert norm(yd - op.apply(st.x)) <= 1.5 * delta


# ---------------------------------------------------------------------------
# estimator layer


def test_loping_bcd_estimator_matches_driver():
    rng = np.random.default_rng(14)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(10))
    x_true = rng.standard_normal((2, 11))
    noise = 0.02 * rng.standard_normal((2, 11))
    yd = op.apply(x_true) + noise
    delta_b = np.array([norm(project_column(V_BENCH, b, noise)) for b in range(2)])
    est = LopingBCD(op, tau=1.5, delta=delta_b, max_iter=5000).fit(yd)
    direct = run_loping_bcd(
        op, np.zeros((2, 11)), yd, Control.cyclic(2),
        ConstantStep.for_operator(op, tau=1.5),
        StopRule(tau=1.5, delta=delta_b, window=2, max_iter=5000),
    )
    assert np.array_equal(est.x_, direct.x)
    assert est.converged_
    assert est.stop_index_ == direct.stop_index


def test_landweber_estimator_matches_driver():
    rng = np.random.default_rng(15)
    op = TensorProductOperator(V_BENCH, IntegrationOperator(10))
    y = op.apply(rng.standard_normal((2, 11)))
    est = Landweber(op, step_size=0.5, max_iter=30).fit(y)
    direct = run_landweber(op, np.zeros((2, 11)), y, 0.5, 30)
    assert np.array_equal(est.x_, direct.x)
    assert est.n_iter_ == 30


def test_estimators_expose_params():
    op = TensorProductOperator(V_BENCH, IntegrationOperator(5))
    est = LopingBCD(op, tau=2.0, delta=0.1)
    params = est.get_params()
    assert params["tau"] == 2.0 and params["op"] is op
    est.set_params(tau=3.0)
    assert est.tau == 3.0
    cloned = clone(est)
    assert cloned.tau == 3.0 and not hasattr(cloned, "x_")
