"""Continuous Lagrange elements of degree 1..4 on the reference triangle."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ELEMENT_DEGREE = 4


def _check_degree(k):
    if int(k) != k or not 1 <= k <= MAX_ELEMENT_DEGREE:
        raise ValueError(f"Lagrange degree must be in 1..{MAX_ELEMENT_DEGREE}, got {k}")


@lru_cache(maxsize=None)
def lattice(k: int) -> np.ndarray:
    """Integer node lattice ``(i, j)`` with ``i + j <= k``; node = (i/k, j/k)."""
    _check_degree(k)
    return np.array([(i, j) for j in range(k + 1) for i in range(k + 1 - j)], dtype=np.int64)


def _exponents(k):
    return [(a, b) for d in range(k + 1) for a in range(d, -1, -1) for b in [d - a]]


@lru_cache(maxsize=None)
def _coefficients(k: int) -> np.ndarray:
    nodes = lattice(k) / k
    exps = _exponents(k)
    V = np.array([[x**a * y**b for a, b in exps] for x, y in nodes])
    return np.linalg.inv(V)  # column i: monomial coefficients of basis i


class ReferenceElement:
    """Nodal basis of P_k on the reference triangle."""

    def __init__(self, k: int):
        _check_degree(k)
        self.degree = k
        self.lattice = lattice(k)
        self.nodes = self.lattice / k
        self.size = len(self.nodes)
        self._exps = _exponents(k)
        self._coef = _coefficients(k)

    def tabulate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(npts, nb)`` and reference gradients ``(npts, nb, 2)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        mono = np.empty((len(pts), len(self._exps)))
        dx = np.zeros_like(mono)
        dy = np.zeros_like(mono)
        for c, (a, b) in enumerate(self._exps):
            mono[:, c] = x**a * y**b
            if a:
                dx[:, c] = a * x ** (a - 1) * y**b
            if b:
                dy[:, c] = b * x**a * y ** (b - 1)
        vals = mono @ self._coef
        grads = np.stack([dx @ self._coef, dy @ self._coef], axis=-1)
        return vals, grads


@lru_cache(maxsize=None)
def reference_element(k: int) -> ReferenceElement:
    return ReferenceElement(k)


def lagrange_basis(k: int, point) -> tuple[np.ndarray, np.ndarray]:
    """Basis values ``(nb,)`` and gradients ``(nb, 2)`` at a single reference point."""
    vals, grads = reference_element(k).tabulate(np.asarray(point, dtype=float)[None, :])
    return vals[0], grads[0]
