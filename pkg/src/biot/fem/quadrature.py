"""Quadrature on the reference triangle (0,0), (1,0), (0,1) and on [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

MAX_DEGREE = 30


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, 2)
    weights: np.ndarray  # (nq,)
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi (conical product) rule exact for total degree ``degree``.

    Weights are strictly positive and sum to 1/2.
    """
    if degree < 0 or degree > MAX_DEGREE:
        raise ValueError(f"quadrature degree must be in 0..{MAX_DEGREE}, got {degree}")
    n = max(1, (degree + 2) // 2)
    # s in [0,1] carries the (1 - s) Jacobian of the collapse
    zs, ws = roots_jacobi(n, 1.0, 0.0)
    zr, wr = roots_legendre(n)
    s = 0.5 * (zs + 1.0)
    ws = ws / 4.0
    r = 0.5 * (zr + 1.0)
    wr = wr / 2.0
    S, R = np.meshgrid(s, r, indexing="ij")
    W = np.outer(ws, wr)
    pts = np.column_stack([S.ravel(), ((1.0 - S) * R).ravel()])
    rule = QuadratureRule(points=pts, weights=W.ravel(), degree=degree)
    rule.points.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


@lru_cache(maxsize=None)
def interval_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre on [0, 1]; ``points`` has shape (nq, 1)."""
    n = max(1, (degree + 2) // 2)
    z, w = roots_legendre(n)
    return QuadratureRule(points=(0.5 * (z + 1.0))[:, None], weights=0.5 * w, degree=degree)
