import numpy as np
import pytest

from mlswe.operators import OperatorError, build_lgl, legendre_and_derivative


def test_n1_pinned_values():
    ops = build_lgl(1)
    assert np.array_equal(ops.nodes, [-1.0, 1.0])
    assert np.array_equal(ops.weights, [1.0, 1.0])
    assert np.allclose(ops.D, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)


def test_n2_pinned_values():
    ops = build_lgl(2)
    assert np.allclose(ops.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    assert np.allclose(ops.weights, [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 9, 13, 15])
def test_quadrature_exact_to_2n_minus_1(n):
    rng = np.random.default_rng(100 + n)
    ops = build_lgl(n)
    for _ in range(8):
        coef = rng.uniform(-1.0, 1.0, size=2 * n)  # degree 2n-1
        vals = np.polynomial.polynomial.polyval(ops.nodes, coef)
        quad = ops.weights @ vals
        exact = sum(
            c * (1.0 - (-1.0) ** (k + 1)) / (k + 1) for k, c in enumerate(coef)
        )
        assert abs(quad - exact) < 1e-12 * (1.0 + abs(exact))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_derivative_exact_on_poly(n):
    rng = np.random.default_rng(200 + n)
    ops = build_lgl(n)
    coef = rng.uniform(-1.0, 1.0, size=n + 1)
    vals = np.polynomial.polynomial.polyval(ops.nodes, coef)
    dcoef = np.polynomial.polynomial.polyder(coef)
    dvals = np.polynomial.polynomial.polyval(ops.nodes, dcoef)
    assert np.allclose(ops.D @ vals, dvals, atol=1e-11)


@pytest.mark.parametrize("n", range(1, 16))
def test_sbp_property(n):
    ops = build_lgl(n)
    assert np.allclose(ops.Q + ops.Q.T, ops.B, atol=5e-14)


@pytest.mark.parametrize("n", range(1, 16))
def test_node_weight_structure(n):
    ops = build_lgl(n)
    assert ops.nodes[0] == -1.0 and ops.nodes[-1] == 1.0
    assert np.all(np.diff(ops.nodes) > 0)
    # symmetry
    assert np.allclose(ops.nodes, -ops.nodes[::-1], atol=1e-15)
    assert np.allclose(ops.weights, ops.weights[::-1], atol=1e-15)
    assert abs(np.sum(ops.weights) - 2.0) < 1e-13
    # constants differentiate to zero
    assert np.allclose(ops.D @ np.ones(n + 1), 0.0, atol=1e-13)


def test_modal_transform_roundtrip():
    rng = np.random.default_rng(11)
    for n in (2, 4, 7):
        ops = build_lgl(n)
        nodal = rng.uniform(-1.0, 1.0, size=n + 1)
        modal = ops.to_modal @ nodal
        assert np.allclose(ops.V @ modal, nodal, atol=1e-12)


def test_legendre_endpoint_values():
    for n in (1, 2, 5, 10):
        p, dp = legendre_and_derivative(n, 1.0)
        assert abs(p - 1.0) < 1e-14
        assert abs(dp - 0.5 * n * (n + 1)) < 1e-11 * n * (n + 1)
        p, dp = legendre_and_derivative(n, -1.0)
        assert abs(p - (-1.0) ** n) < 1e-14


def test_degree_bounds():
    with pytest.raises(OperatorError):
        build_lgl(0)
    with pytest.raises(OperatorError):
        build_lgl(31)
    build_lgl(30)  # top of the supported range works
