import numpy as np
import pytest

from bcdsolve import inner, lift, lift_adjoint, lifted_norm, norm

BENCH_V = np.array([[-3.0, 1.0], [-1.0, 0.0]]) / 3.302775637731995


def test_inner_orthonormal_blocks():
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert inner(x, x) == 2.0


def test_inner_zero_vector():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert inner(x, np.zeros_like(x)) == 0.0


def test_inner_direct_summation():
    # oracle: sum_b sum_j x[b][j] * y[b][j] = 1+2+3+4
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    y = np.ones_like(x)
    assert inner(x, y) == 10.0


def test_inner_symmetric_bilinear():
    rng = np.random.default_rng(0)
    x, y, z = (rng.standard_normal((3, 5)) for _ in range(3))
    assert inner(x, y) == pytest.approx(inner(y, x), abs=0)
    assert inner(2.0 * x + 3.0 * z, y) == pytest.approx(
        2.0 * inner(x, y) + 3.0 * inner(z, y), rel=1e-13
    )


def test_inner_shape_mismatch():
    with pytest.raises(ValueError):
        inner(np.ones((2, 3)), np.ones((2, 4)))
    with pytest.raises(ValueError):
        inner(np.ones((2, 3)), np.ones((3, 3)))


def test_norm_zero():
    assert norm(np.zeros((2, 4))) == 0.0


def test_norm_pythagorean():
    assert norm(np.array([[3.0], [4.0]])) == 5.0


def test_norm_direct_summation():
    assert norm(np.ones((2, 2))) == 2.0


def test_norm_positive_definite():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.standard_normal((2, 7))
        assert norm(x) > 0.0
    assert norm(np.zeros((4, 3))) == 0.0


def test_parallelogram_law():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.standard_normal((3, 6))
        y = rng.standard_normal((3, 6))
        lhs = norm(x + y) ** 2 + norm(x - y) ** 2
        rhs = 2.0 * norm(x) ** 2 + 2.0 * norm(y) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_lift_identity():
    x = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(lift(np.eye(2), x), x)


def test_lift_zero():
    assert np.array_equal(lift(BENCH_V, np.zeros((2, 4))), np.zeros((2, 4)))


def test_lift_hand_evaluated():
    V = np.array([[-3.0, 1.0], [-1.0, 0.0]])
    out = lift(V, np.array([[1.0], [1.0]]))
    assert np.array_equal(out, np.array([[-2.0], [-1.0]]))


def test_lift_rectangular():
    V = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    out = lift(V, np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert np.array_equal(out, np.array([[1.0, 2.0], [3.0, 4.0], [4.0, 6.0]]))


def test_lift_shape_mismatch():
    with pytest.raises(ValueError):
        lift(np.eye(3), np.ones((2, 4)))


def test_lift_adjoint_pairing():
    rng = np.random.default_rng(3)
    V = rng.standard_normal((4, 2))
    x = rng.standard_normal((2, 5))
    y = rng.standard_normal((4, 5))
    assert inner(lift(V, x), y) == pytest.approx(
        inner(x, lift_adjoint(V, y)), rel=1e-12
    )


def test_lifted_norm_identity_matches_norm():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((3, 4))
    assert lifted_norm(np.eye(3), x) == norm(x)


def test_lifted_norm_zero():
    assert lifted_norm(BENCH_V, np.zeros((2, 9))) == 0.0


def test_lifted_norm_hand_evaluated():
    V = np.array([[-3.0, 1.0], [-1.0, 0.0]])
    assert lifted_norm(V, np.array([[1.0], [0.0]])) == pytest.approx(
        np.sqrt(10.0), abs=1e-14
    )


def test_lifted_norm_equals_norm_of_lift():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal((2, 8))
        assert lifted_norm(BENCH_V, x) == norm(lift(BENCH_V, x))


def test_lifted_norm_definite_for_full_rank():
    # full column rank: no unit vector is annihilated by the lift
    rng = np.random.default_rng(6)
    for _ in range(100):
        x = rng.standard_normal((2, 6))
        x /= norm(x)
        assert lifted_norm(BENCH_V, x) > 1e-10
