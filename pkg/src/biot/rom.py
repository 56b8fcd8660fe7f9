"""POD reduced bases and the ROM-accelerated global-in-time iteration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.special import roots_legendre

from .discretization import BiotDiscretization
from .git_fom import DecoupledSolver, StoppingRule, run_iterations
from .linalg import sym_eig

log = logging.getLogger(__name__)

DEFAULT_LEGENDRE_DEGREE = 58
POD_METHODS = ("qr", "gram")


@dataclass(frozen=True)
class IndexSet:
    indices: np.ndarray
    strategy: str

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or not len(idx) or np.any(np.diff(idx) <= 0):
            raise ValueError("index set must be a non-empty strictly increasing sequence")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)


def legendre_indices(N: int, degree: int = DEFAULT_LEGENDRE_DEGREE) -> np.ndarray:
    """Roots of P_degree in [-1, 0) mapped affinely onto [2, N], rounded and deduplicated."""
    if degree < 2:
        raise ValueError("Legendre degree must be at least 2")
    roots = np.sort(roots_legendre(degree)[0])
    half = roots[roots < 0]
    mapped = np.rint(2 + (half + 1.0) * (N - 2)).astype(np.int64)
    return np.unique(np.concatenate([[2], mapped, [N]]))


def build_index_set(strategy: str, N: int) -> IndexSet:
    """``full``, ``stride:<s>`` or ``legendre[:<degree>]`` over the steps 2..N."""
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    name, _, arg = strategy.partition(":")
    if name == "full" and not arg:
        idx = np.arange(2, N + 1)
    elif name == "stride":
        try:
            s = int(arg)
        except ValueError:
            raise ValueError(f"bad stride in {strategy!r}") from None
        if s < 1 or N % s:
            raise ValueError(f"stride {s} must be positive and divide N={N}")
        idx = np.union1d([2], np.arange(s, N + 1, s))
        idx = idx[idx >= 2]
    elif name == "legendre":
        try:
            deg = int(arg) if arg else DEFAULT_LEGENDRE_DEGREE
        except ValueError:
            raise ValueError(f"bad Legendre degree in {strategy!r}") from None
        idx = legendre_indices(N, deg)
    else:
        raise ValueError(f"unknown index-set strategy {strategy!r}")
    return IndexSet(idx, strategy)


@dataclass
class PodBasis:
    modes: np.ndarray  # (dim, N_r), orthonormal in `inner`
    gammas: np.ndarray  # full spectrum, descending
    inner: str
    matrix: object

    @property
    def size(self) -> int:
        return self.modes.shape[1]

    @property
    def dim(self) -> int:
        return self.modes.shape[0]

    def normalized_spectrum(self) -> np.ndarray:
        g = self.gammas
        return g / g[0] if len(g) and g[0] > 0 else g

    def coefficients(self, v) -> np.ndarray:
        """Coordinates of the orthogonal projection (works on (dim,) or (k, dim) input)."""
        v = np.asarray(v)
        return (self.matrix @ v.T).T @ self.modes

    def prolong(self, c) -> np.ndarray:
        return np.asarray(c) @ self.modes.T

    def project(self, v) -> np.ndarray:
        return self.prolong(self.coefficients(v))

    def orthonormality_error(self) -> float:
        G = self.modes.T @ (self.matrix @ self.modes)
        return float(np.max(np.abs(G - np.eye(self.size)), initial=0.0))


def _weighted_qr(S, M, drop_tol: float = 1e-12):
    """``S^T = Q R`` with ``Q^T M Q = I`` by classical Gram-Schmidt.

    Each column is reorthogonalized until its norm stops collapsing (at most 4 passes);
    columns whose remainder falls below ``drop_tol`` times the largest snapshot norm are
    treated as dependent, since normalizing roundoff would destroy orthogonality.
    """
    k, dim = S.shape
    Q = np.zeros((dim, k))
    R = np.zeros((k, k))
    r = 0
    scale = max(np.sqrt(max(float(s @ (M @ s)), 0.0)) for s in S)
    for j in range(k):
        v = S[j].astype(float).copy()
        nrm = np.sqrt(max(float(v @ (M @ v)), 0.0))
        for _ in range(4):
            h = Q[:, :r].T @ (M @ v)
            v -= Q[:, :r] @ h
            R[:r, j] += h
            prev, nrm = nrm, np.sqrt(max(float(v @ (M @ v)), 0.0))
            if nrm > 0.5 * prev:
                break
        if nrm <= drop_tol * scale:
            continue
        Q[:, r] = v / nrm
        R[r, j] = nrm
        r += 1
    return Q[:, :r], R[:r]


def compute_pod(snapshots, inner_matrix, n_r: int, inner: str = "L2", method: str = "qr") -> PodBasis:
    """Leading ``n_r`` POD modes of the rows of ``snapshots`` in the inner product ``inner_matrix``.

    ``gram`` forms the snapshot Gram matrix and scales eigenvector combinations by
    ``1/sqrt(gamma)``. ``qr`` yields the same modes and spectrum from an orthonormal
    factorization of the snapshots, which keeps orthonormality when gamma spans many decades.
    """
    S = np.atleast_2d(np.asarray(snapshots, dtype=float))
    k = S.shape[0]
    if not 1 <= n_r <= k:
        raise ValueError(f"N_r={n_r} must lie in 1..{k} (number of snapshots)")
    if not np.any(S):
        raise ValueError("all snapshots are zero")
    if method not in POD_METHODS:
        raise ValueError(f"unknown POD method {method!r}; expected one of {POD_METHODS}")
    M = inner_matrix
    if method == "gram":
        MS = (M @ S.T).T
        gram = S @ MS.T
        gram = 0.5 * (gram + gram.T)
        gammas, vecs = sym_eig(gram, tol=1e-10)
        floor = 1e-14 * gammas[0]
        keep = min(n_r, int(np.sum(gammas > floor)))
        if keep < n_r:
            log.warning("POD: only %d of %d requested modes have a nonzero eigenvalue", keep, n_r)
        modes = S.T @ (vecs[:, :keep] / np.sqrt(gammas[:keep]))
        return PodBasis(modes, gammas, inner, M)
    Q, R = _weighted_qr(S, M)
    U, sig, _ = np.linalg.svd(R, full_matrices=False)
    gammas = np.zeros(k)
    gammas[: len(sig)] = sig**2
    keep = min(n_r, len(sig))
    if keep < n_r:
        log.warning("POD: snapshot set has rank %d < requested N_r=%d", keep, n_r)
    return PodBasis(Q @ U[:, :keep], gammas, inner, M)


@dataclass
class ReducedOperator:
    A1: np.ndarray  # Phi^T A1 Phi
    B: np.ndarray  # Psi^T B Phi
    A2: np.ndarray  # Psi^T A2 Psi
    C: np.ndarray  # Psi^T C, applied to full pressure vectors
    phi: PodBasis
    psi: PodBasis

    def __post_init__(self):
        K = np.block([[self.A1, -self.B.T], [self.B, self.A2]])
        self.matrix = K
        self._lu = sla.lu_factor(K)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def rhs(self, F, p) -> np.ndarray:
        """Stacked reduced right-hand sides; ``F`` and ``p`` are (k, dim) arrays."""
        return np.vstack([(self.phi.modes.T @ np.asarray(F).T), self.C @ np.asarray(p).T])

    def solve(self, F, p):
        """Reduced solves for k steps, returned prolonged as ``(u, xi)`` of shape (k, dim)."""
        c = sla.lu_solve(self._lu, self.rhs(F, p))
        n = self.phi.size
        return self.phi.prolong(c[:n].T), self.psi.prolong(c[n:].T)

    def residual(self, F, p, u, xi) -> float:
        """Residual of the reduced equations for prolonged solutions, relative to the rhs."""
        b = self.rhs(np.atleast_2d(F), np.atleast_2d(p))
        cu = self.phi.coefficients(np.atleast_2d(u)).T
        cx = self.psi.coefficients(np.atleast_2d(xi)).T
        r = self.matrix @ np.vstack([cu, cx]) - b
        return float(np.linalg.norm(r) / max(np.linalg.norm(b), np.finfo(float).tiny))


def project_stokes(disc: BiotDiscretization, phi: PodBasis, psi: PodBasis) -> ReducedOperator:
    if phi.dim != disc.V.dim or psi.dim != disc.W.dim:
        raise ValueError(f"basis dimensions ({phi.dim}, {psi.dim}) do not match the spaces {disc.V.dim}, {disc.W.dim}")
    P, X = phi.modes, psi.modes
    A1 = P.T @ (disc.A1 @ P)
    A2 = X.T @ (disc.A2 @ X)
    return ReducedOperator(
        A1=0.5 * (A1 + A1.T),
        B=X.T @ (disc.B @ P),
        A2=0.5 * (A2 + A2.T),
        C=(disc.C.T @ X).T,
        phi=phi,
        psi=psi,
    )


def rom_error_metric(xi_rom, xi_full, mass, indices=None) -> float:
    """``max_n ||xi_rom^n - xi_full^n||^2_L2`` over ``indices`` (all rows if None)."""
    xi_rom = np.asarray(xi_rom)
    xi_full = np.asarray(xi_full)
    idx = np.arange(len(xi_rom)) if indices is None else np.asarray(indices, dtype=int)
    if not len(idx):
        raise ValueError("no comparable indices")
    e = xi_rom[idx] - xi_full[idx]
    return float(np.max(np.einsum("ni,in->n", e, mass @ e.T)))


def run_rom_iteration(
    solver: DecoupledSolver,
    index_set: IndexSet,
    n_r: int,
    stopping: StoppingRule | None = None,
    initial_guess="first",
    validate: bool = False,
    enrich_initial: bool = False,
    pod_method: str = "qr",
    checkpoint=None,
    resume: bool = False,
    reference=None,
    on_iteration=None,
):
    """Global-in-time iteration whose Stokes sweep is replaced by snapshots at ``index_set`` plus reduced solves."""
    disc = solver.disc
    idx = index_set.indices
    if idx[0] < 2 or idx[-1] > solver.N:
        raise ValueError(f"index set must lie in 2..{solver.N}")
    n_snap = len(idx) + (2 if enrich_initial else 0)
    if not 1 <= n_r <= n_snap:
        raise ValueError(f"N_r={n_r} must lie in 1..{n_snap}")
    steps = np.arange(2, solver.N + 1)
    F_all = np.array([disc.loads(solver.times[n])[0] for n in steps])
    for n in steps:
        ub = disc.u_boundary_values(solver.times[n])
        if ub is not None and np.any(ub):
            raise NotImplementedError("reduced solves need homogeneous displacement boundary data")

    def rom_stokes(p, i):
        U_snap, XI_snap = solver.stokes_sweep(p, steps=idx)
        su, sx = U_snap[idx], XI_snap[idx]
        if enrich_initial:
            su = np.vstack([U_snap[:2], su])
            sx = np.vstack([XI_snap[:2], sx])
        phi = compute_pod(su, disc.h1_V, n_r, "H1", pod_method)
        psi = compute_pod(sx, disc.mass_W, n_r, "L2", pod_method)
        red = project_stokes(disc, phi, psi)
        U = solver.series_template("u")
        XI = solver.series_template("xi")
        U[2:], XI[2:] = red.solve(F_all, p[2:])
        if validate:
            _, XI_full = solver.stokes_sweep(p)
            eps = rom_error_metric(XI, XI_full, disc.mass_W, steps)
        else:
            eps = rom_error_metric(XI, XI_snap, disc.mass_W, idx)
        extra = {
            "eps_rom": eps,
            "eps_over": "all" if validate else "snapshots",
            "n_snapshots": int(len(su)),
            "n_r": int(phi.size),
            "orthonormality": max(phi.orthonormality_error(), psi.orthonormality_error()),
            "spectrum_u": phi.normalized_spectrum().tolist(),
            "spectrum_xi": psi.normalized_spectrum().tolist(),
        }
        return U, XI, extra

    return run_iterations(solver, rom_stokes, initial_guess, stopping, checkpoint, resume, reference, on_iteration)
