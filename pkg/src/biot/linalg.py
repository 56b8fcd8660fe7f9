"""Sparse solves with a residual guarantee, and small dense symmetric eigenproblems."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_REFINEMENTS = 4


class LinearSolveError(RuntimeError):
    pass


def as_csr(A) -> sp.csr_matrix:
    """CSR copy with sorted, unique column indices."""
    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.sort_indices()
    return A


class Factorization:
    """LU factorization reused across right-hand sides.

    The matrix is scaled symmetrically by ``1/sqrt(|diag|)`` before SuperLU
    (COLAMD ordering). Each solve is refined against the unscaled matrix while
    the residual keeps dropping; :class:`LinearSolveError` is raised unless
    ``||A x - b|| <= tol * ||b||``.
    """

    def __init__(self, A, tol: float = DEFAULT_TOL, name: str = "system"):
        self.A = as_csr(A)
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"{name}: matrix must be square, got {self.A.shape}")
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        self.tol = tol
        self.name = name
        self.max_residual = 0.0
        self.num_solves = 0
        diag = np.abs(self.A.diagonal())
        self._scale = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
        S = sp.diags(self._scale)
        try:
            self._lu = spla.splu((S @ self.A @ S).tocsc(), permc_spec="COLAMD")
        except RuntimeError as exc:  # singular pivot
            raise LinearSolveError(f"{name}: factorization failed ({exc})") from exc

    @property
    def shape(self):
        return self.A.shape

    def _raw_solve(self, r):
        s = self._scale if r.ndim == 1 else self._scale[:, None]
        return s * self._lu.solve(s * r)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.A.shape[0]:
            raise ValueError(f"{self.name}: rhs has length {b.shape[0]}, expected {self.A.shape[0]}")
        bnorm = np.linalg.norm(b, axis=0)
        if np.all(bnorm == 0):
            return np.zeros_like(b)
        self.num_solves += 1
        x = self._raw_solve(b)
        rel = self._relres(x, b, bnorm)
        for _ in range(MAX_REFINEMENTS):
            x_new = x + self._raw_solve(b - self.A @ x)
            rel_new = self._relres(x_new, b, bnorm)
            if not rel_new < rel:
                break
            improved = rel_new < 0.5 * rel
            x, rel = x_new, rel_new
            if not improved:
                break
        if not rel <= self.tol:
            raise LinearSolveError(f"{self.name}: relative residual {rel:.3e} exceeds {self.tol:.1e}")
        self.max_residual = max(self.max_residual, rel)
        return x

    def _relres(self, x, b, bnorm):
        r = np.linalg.norm(self.A @ x - b, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(bnorm > 0, r / np.where(bnorm > 0, bnorm, 1.0), r)
        return float(np.max(rel)) if np.ndim(rel) else float(rel)


def sparse_solve(A, b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve ``A x = b`` with ``||A x - b|| <= tol ||b||``."""
    return Factorization(A, tol=tol).solve(b)


def sym_eig(G, tol: float = 1e-12):
    """Eigenvalues in descending order and orthonormal eigenvectors (columns) of a symmetric matrix."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    scale = np.max(np.abs(G)) if G.size else 0.0
    if np.max(np.abs(G - G.T), initial=0.0) > tol * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (G + G.T))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]
