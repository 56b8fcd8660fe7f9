"""Backward differentiation formulas on uniformly spaced time series.

A time series is an array whose first axis is the step index ``n = 0..N``.
"""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np

_TABLE = {
    1: (F(1), F(-1)),
    2: (F(3, 2), F(-2), F(1, 2)),
    3: (F(11, 6), F(-3), F(3, 2), F(-1, 3)),
    4: (F(25, 12), F(-4), F(3), F(-4, 3), F(1, 4)),
    5: (F(137, 60), F(-5), F(5), F(-10, 3), F(5, 4), F(-1, 5)),
    6: (F(147, 60), F(-6), F(15, 2), F(-20, 3), F(15, 4), F(-6, 5), F(1, 6)),
}

G_MATRIX = np.array([[0.5, -1.0], [-1.0, 2.5]])


def bdf_coefficients(m: int) -> tuple[F, ...]:
    """Exact coefficients ``eta_0..eta_m`` of the m-step formula."""
    if m not in _TABLE:
        raise ValueError(f"BDF order must be in 1..6, got {m}")
    return _TABLE[m]


def bdf_weights(m: int) -> np.ndarray:
    return np.array([float(c) for c in bdf_coefficients(m)])


def backward_difference(series, n: int, m: int, dt: float) -> np.ndarray:
    """``(1/dt) * sum_j eta_j y^{n-j}``."""
    if n < m:
        raise ValueError(f"step {n} has fewer than {m} predecessors")
    eta = bdf_weights(m)
    y = np.asarray(series)
    out = eta[0] * y[n]
    for j in range(1, m + 1):
        out = out + eta[j] * y[n - j]
    return out / dt


def backward_differences(series, m: int, dt: float) -> np.ndarray:
    """All differences for ``n = m..N`` stacked along the first axis."""
    y = np.asarray(series)
    eta = bdf_weights(m)
    N = len(y) - 1
    out = eta[0] * y[m:]
    for j in range(1, m + 1):
        out = out + eta[j] * y[m - j : N + 1 - j]
    return out / dt


def g_norm_sq(y_new, y_old, mass=None) -> float:
    """G-norm squared of a consecutive pair, inner product ``mass`` (Euclidean if None).

    G acts on the pair ordered (older, newer); with that ordering the energy
    identity checked below holds exactly.
    """

    def ip(a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return float(np.dot(a.ravel(), (b if mass is None else mass @ b).ravel()))

    g = G_MATRIX
    return g[0, 0] * ip(y_old, y_old) + 2 * g[0, 1] * ip(y_old, y_new) + g[1, 1] * ip(y_new, y_new)


def g_norm_identity_check(series, n: int, dt: float, mass=None) -> float:
    """Absolute residual of the BDF-2 energy identity at step ``n``.

    Compares ``(D y^n, y^n)`` with the telescoping G-norm difference plus the
    numerical dissipation term ``||y^n - 2y^{n-1} + y^{n-2}||^2 / (4 dt)``.
    """
    if n < 2:
        raise ValueError("the identity needs n >= 2")
    y = np.asarray(series, dtype=float)

    def ip(a, b):
        return float(np.dot(a.ravel(), (b if mass is None else mass @ b).ravel()))

    lhs = ip(backward_difference(y, n, 2, dt), y[n])
    jump = y[n] - 2 * y[n - 1] + y[n - 2]
    rhs = (g_norm_sq(y[n], y[n - 1], mass) - g_norm_sq(y[n - 1], y[n - 2], mass)) / (2 * dt) + ip(jump, jump) / (4 * dt)
    return abs(lhs - rhs)
