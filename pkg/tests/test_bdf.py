from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biot.bdf import backward_difference, backward_differences, bdf_coefficients, g_norm_identity_check, g_norm_sq

TABLE = {
    1: ("1", "-1"),
    2: ("3/2", "-2", "1/2"),
    3: ("11/6", "-3", "3/2", "-1/3"),
    4: ("25/12", "-4", "3", "-4/3", "1/4"),
    5: ("137/60", "-5", "5", "-10/3", "5/4", "-1/5"),
    6: ("147/60", "-6", "15/2", "-20/3", "15/4", "-6/5", "1/6"),
}


@pytest.mark.parametrize("m", range(1, 7))
def test_coefficients_exact(m):
    assert bdf_coefficients(m) == tuple(F(c) for c in TABLE[m])


@pytest.mark.parametrize("m", range(1, 7))
def test_consistency(m):
    eta = bdf_coefficients(m)
    assert sum(eta) == 0
    # exact on t^q for q <= m: sum_j eta_j (n-j)^q evaluated at n=0 reproduces the derivative
    for q in range(1, m + 1):
        assert sum(c * F(-j) ** q for j, c in enumerate(eta)) == (1 if q == 1 else 0)


@pytest.mark.parametrize("m", [0, 7, -1])
def test_bad_order(m):
    with pytest.raises(ValueError):
        bdf_coefficients(m)


def test_constant_series():
    y = np.ones((6, 3))
    for m in (1, 2):
        np.testing.assert_array_equal(backward_difference(y, 5, m, 0.1), 0)
    # 11/6 and -1/3 are inexact in binary
    np.testing.assert_allclose(backward_difference(y, 5, 3, 0.1), 0, atol=1e-14)


def test_linear_series_bdf2():
    dt = 0.25
    y = dt * np.arange(9)
    np.testing.assert_allclose(backward_differences(y, 2, dt), 1.0, rtol=1e-14)


def test_quadratic_example():
    dt = 0.1
    y = (dt * np.arange(6)) ** 2
    assert backward_difference(y, 4, 2, dt) == pytest.approx(0.8, rel=1e-13)


def test_too_few_predecessors():
    with pytest.raises(ValueError):
        backward_difference(np.zeros(3), 1, 2, 1.0)


def test_batched_matches_single():
    rng = np.random.default_rng(0)
    y = rng.standard_normal((10, 4))
    D = backward_differences(y, 2, 0.3)
    for n in range(2, 10):
        np.testing.assert_allclose(D[n - 2], backward_difference(y, n, 2, 0.3), rtol=1e-14)


def test_g_identity_constant_series():
    assert g_norm_identity_check(np.full(3, 2.0), 2, 0.5) == 0


def test_g_identity_hand_example():
    # (D y^3, y^3) = (3/2*4 - 2*2 + 1/2*1) * 4 = 10 with dt = 1
    y = np.array([1.0, 2.0, 4.0])
    lhs = backward_difference(y, 2, 2, 1.0) * y[2]
    assert lhs == pytest.approx(10.0, abs=1e-14)
    rhs = 0.5 * (g_norm_sq(4.0, 2.0) - g_norm_sq(2.0, 1.0)) + 0.25 * (4 - 4 + 1) ** 2
    assert rhs == pytest.approx(10.0, abs=1e-14)
    assert g_norm_identity_check(y, 2, 1.0) <= 1e-14


def test_g_norm_positive_definite():
    assert np.all(np.linalg.eigvalsh(np.array([[0.5, -1.0], [-1.0, 2.5]])) > 0)
    assert g_norm_sq(np.ones(3), -np.ones(3)) > 0


def test_g_identity_100_random_sequences():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(100):
        y = rng.standard_normal((3, 5))
        dt = rng.uniform(1e-3, 1)
        scale = np.abs(y).max() ** 2 / dt
        worst = max(worst, g_norm_identity_check(y, 2, dt) / scale)
    assert worst <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    y=st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
    dt=st.floats(1e-4, 10),
    w=st.lists(st.floats(0.1, 10), min_size=3, max_size=3),
)
def test_g_identity_weighted(y, dt, w):
    # vector-valued sequence with a diagonal SPD inner product
    series = np.outer(y, [1.0, -0.5, 2.0])
    M = np.diag(w)
    scale = max(1.0, np.abs(series).max()) ** 2 * max(w) / dt
    assert g_norm_identity_check(series, 2, dt, M) <= 1e-12 * scale
