import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_chebyu

from spectral_parabolic import basis2d, quadrature
from spectral_parabolic.errors import InvalidArgument

from conftest import central_difference_gradient, random_ball_points


def test_chebyshev_examples():
    assert basis2d.chebyshev_u(1, 0.3).values[1] == pytest.approx(0.6, abs=1e-15)
    assert basis2d.chebyshev_u(2, 0.5).values[2] == pytest.approx(0.0, abs=1e-15)
    assert basis2d.chebyshev_u(2, 1.0).derivatives[2] == pytest.approx(8.0, abs=1e-13)


@given(st.integers(0, 30), st.floats(-1, 1))
def test_chebyshev_against_scipy(n, t):
    ev = basis2d.chebyshev_u(n, t)
    ref = eval_chebyu(np.arange(n + 1), t)
    np.testing.assert_allclose(ev.values, ref, atol=1e-11 * (n + 1) ** 2)


@given(st.integers(2, 25), st.floats(-1, 1))
def test_chebyshev_recurrence_residual(n, t):
    u = basis2d.chebyshev_u(n, t).values
    assert abs(u[n] - (2 * t * u[n - 1] - u[n - 2])) < 1e-12 * max(1.0, abs(u[n]))


@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_chebyshev_at_one(n):
    ev = basis2d.chebyshev_u(n, 1.0)
    np.testing.assert_allclose(ev.values, np.arange(1, n + 2), rtol=1e-14)


def test_chebyshev_clamps_rounding_overshoot():
    ev = basis2d.chebyshev_u(4, 1.0 + 5e-13)
    np.testing.assert_allclose(ev.values, np.arange(1, 6), rtol=1e-14)


def test_chebyshev_derivative_vs_fd():
    t, h = 0.37, 1e-6
    d = basis2d.chebyshev_u(8, t).derivatives
    fd = (basis2d.chebyshev_u(8, t + h).values - basis2d.chebyshev_u(8, t - h).values) / (2 * h)
    np.testing.assert_allclose(d, fd, atol=1e-6)


def test_sizes_and_ordering():
    assert basis2d.dimension(3) == 10
    assert basis2d.RidgeBasis(3).evaluate(np.array([0.1, 0.2])).shape == (10,)
    pairs = basis2d.index_pairs(4)
    assert pairs == [(m, k) for m in range(5) for k in range(m + 1)]
    assert [basis2d.flat_index(m, k) for m, k in pairs] == list(range(len(pairs)))
    with pytest.raises(InvalidArgument):
        basis2d.RidgeBasis(-1)


def test_constant_term(rng):
    x = random_ball_points(rng, 20, 2)
    vals = basis2d.ridge_basis(4, x)
    np.testing.assert_allclose(vals[:, 0], 1 / math.sqrt(math.pi), rtol=1e-15)


def test_closed_form_entries(rng):
    x = random_ball_points(rng, 30, 2)
    vals = basis2d.ridge_basis(6, x)
    for m, k in [(1, 0), (3, 2), (6, 5)]:
        h = math.pi / (m + 1)
        ref = eval_chebyu(m, x[:, 0] * math.cos(k * h) + x[:, 1] * math.sin(k * h)) / math.sqrt(math.pi)
        np.testing.assert_allclose(vals[:, basis2d.flat_index(m, k)], ref, atol=1e-13)


@pytest.mark.parametrize("n", [1, 4, 10])
def test_gram_is_identity(n):
    rule = quadrature.disk_rule(n + 1)
    v = basis2d.ridge_basis(n, rule.nodes)
    gram = (v * rule.weights[:, None]).T @ v
    assert np.max(np.abs(gram - np.eye(v.shape[1]))) < 1e-11


def test_blocks_orthogonal_to_lower_degree():
    n = 7
    rule = quadrature.disk_rule(n)
    v = basis2d.ridge_basis(n, rule.nodes)
    x1, x2 = rule.nodes[:, 0], rule.nodes[:, 1]
    for m in range(1, n + 1):
        block = [basis2d.flat_index(m, k) for k in range(m + 1)]
        for i in range(m):
            for j in range(m - i):
                mono = x1 ** i * x2 ** j
                ip = (v[:, block] * (rule.weights * mono)[:, None]).sum(axis=0)
                assert np.max(np.abs(ip)) < 1e-11


def test_bubble_vanishes_on_circle():
    th = 2 * np.pi * np.arange(360) / 360
    x = np.stack([np.cos(th), np.sin(th)], axis=1)
    vals, _ = basis2d.bubble_basis(8, x)
    assert np.max(np.abs(vals)) < 1e-14


def test_bubble_constant_gradient(rng):
    x = random_ball_points(rng, 10, 2)
    _, grads = basis2d.bubble_basis(3, x)
    np.testing.assert_allclose(grads[:, 0, :], -2 * x / math.sqrt(math.pi), atol=1e-15)


def test_bubble_gradient_vs_fd(rng):
    basis = basis2d.RidgeBasis(8)
    x = random_ball_points(rng, 50, 2)
    _, grads = basis.bubble(x)
    fd = central_difference_gradient(lambda p: basis.bubble(p)[0], x)
    assert np.max(np.abs(grads - fd)) < 1e-6


def test_ridge_gradient_vs_fd(rng):
    basis = basis2d.RidgeBasis(6)
    x = random_ball_points(rng, 20, 2)
    _, grads = basis.evaluate_with_gradient(x)
    fd = central_difference_gradient(basis.evaluate, x)
    assert np.max(np.abs(grads - fd)) < 1e-6
