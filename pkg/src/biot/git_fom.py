"""Global-in-time iterative decoupling: a diffusion sweep then a generalized Stokes sweep, repeated."""

from __future__ import annotations

import json
import logging
import os
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .bdf import bdf_weights
from .discretization import BiotDiscretization
from .fem import DirichletSystem
from .linalg import Factorization, LinearSolveError
from .monolithic import StepSolveError, bootstrap_first_step

log = logging.getLogger(__name__)

STOPPING_KINDS = ("fixed_iterations", "increment_tolerance")
INITIAL_GUESSES = ("first", "zero")


class DivergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class StoppingRule:
    """``fixed_iterations`` runs exactly ``max_iterations``; ``increment_tolerance`` stops once
    ``max_n ||xi^{n,i} - xi^{n,i-1}||_L2 <= tol`` or at ``max_iterations``."""

    kind: str = "increment_tolerance"
    tol: float = 1e-10
    max_iterations: int = 50

    def __post_init__(self):
        if self.kind not in STOPPING_KINDS:
            raise ValueError(f"unknown stopping rule {self.kind!r}; expected one of {STOPPING_KINDS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.kind == "increment_tolerance" and not self.tol > 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def fixed(cls, n: int) -> "StoppingRule":
        return cls("fixed_iterations", max_iterations=n)

    def done(self, i: int, metric: float) -> bool:
        if i >= self.max_iterations:
            return True
        return self.kind == "increment_tolerance" and metric <= self.tol


@dataclass
class IterationRecord:
    i: int
    increment: float
    S: float | None = None  # sum_n ||D2 (xi^{n,i} - xi_h^n)||^2 against a reference
    ref_errors: tuple | None = None  # final-time (u H1semi, xi L2, p H1semi) against the reference
    exact_errors: tuple | None = None  # final-time errors against the exact solution
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "i": self.i,
            "increment": self.increment,
            "S": self.S,
            "ref_errors": None if self.ref_errors is None else list(self.ref_errors),
            "exact_errors": None if self.exact_errors is None else list(self.exact_errors),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d):
        tup = lambda v: None if v is None else tuple(v)  # noqa: E731
        return cls(d["i"], d["increment"], d["S"], tup(d["ref_errors"]), tup(d["exact_errors"]), d.get("extra", {}))


@dataclass
class IterationState:
    """Latest iterate plus the per-iteration history."""

    i: int
    xi: np.ndarray
    p: np.ndarray | None
    u: np.ndarray | None
    metric: float
    history: list = field(default_factory=list)

    @property
    def converged_metric(self):
        return self.metric


class DecoupledSolver:
    """Factorized sub-problems and fixed initial data for a run of ``num_steps`` steps of size ``dt``."""

    def __init__(self, disc: BiotDiscretization, dt: float, num_steps: int, bootstrap: str = "exact", initial=None):
        if num_steps < 2:
            raise ValueError("need at least two time steps")
        self.disc = disc
        self.dt = float(dt)
        self.N = int(num_steps)
        self.times = self.dt * np.arange(self.N + 1)
        self.eta = bdf_weights(2)
        d = disc
        if initial is None:
            s0 = d.initial_state()
            s1 = bootstrap_first_step(d, dt, bootstrap, s0)
            initial = (s0, s1)
        self.initial = tuple(tuple(np.asarray(a, dtype=float).copy() for a in s) for s in initial)

        s = self.eta[0] / self.dt
        self._diff_bc = DirichletSystem(s * d.A3 + d.D, d.p_dofs)
        self.diffusion = Factorization(self._diff_bc.matrix, name="diffusion")
        stokes = sp.bmat([[d.A1, -d.B.T], [d.B, d.A2]], format="csr")
        self._stokes_bc = DirichletSystem(stokes, d.u_dofs)
        self.stokes = Factorization(self._stokes_bc.matrix, name="generalized Stokes")

    @property
    def sizes(self):
        return self.disc.sizes

    def series_template(self, which: str) -> np.ndarray:
        """``(N+1, dim)`` array with the fixed n = 0, 1 data of field ``u``, ``xi`` or ``p``."""
        k = {"u": 0, "xi": 1, "p": 2}[which]
        out = np.zeros((self.N + 1, self.sizes[k]))
        out[0] = self.initial[0][k]
        out[1] = self.initial[1][k]
        return out

    def initial_guess(self, kind="first") -> np.ndarray:
        xi = self.series_template("xi")
        if isinstance(kind, str):
            if kind == "first":
                xi[2:] = xi[1]
            elif kind != "zero":
                raise ValueError(f"unknown initial guess {kind!r}; expected one of {INITIAL_GUESSES} or an array")
            return xi
        arr = np.asarray(kind, dtype=float)
        if arr.shape != xi.shape:
            raise ValueError(f"initial xi series has shape {arr.shape}, expected {xi.shape}")
        xi[2:] = arr[2:]
        return xi

    def diffusion_sweep(self, xi_prev) -> np.ndarray:
        """Pressure series from the previous total-pressure series (sequential over n)."""
        d = self.disc
        xi_prev = np.asarray(xi_prev)
        if xi_prev.shape != (self.N + 1, d.W.dim):
            raise ValueError(f"xi series has shape {xi_prev.shape}, expected {(self.N + 1, d.W.dim)}")
        eta, dt = self.eta, self.dt
        # c(q, D xi) for every n at once
        dxi = eta[0] * xi_prev[2:] + eta[1] * xi_prev[1:-1] + eta[2] * xi_prev[:-2]
        coupling = (d.C.T @ dxi.T).T / dt
        P = self.series_template("p")
        for n in range(2, self.N + 1):
            _, G = d.loads(self.times[n])
            b = G + coupling[n - 2] - d.A3 @ (eta[1] * P[n - 1] + eta[2] * P[n - 2]) / dt
            b = self._diff_bc.rhs(b, d.p_boundary_values(self.times[n]))
            try:
                P[n] = self.diffusion.solve(b)
            except LinearSolveError as exc:
                raise StepSolveError(n, exc) from exc
        return P

    def stokes_rhs(self, p_series, steps) -> np.ndarray:
        """Constrained right-hand sides, one column per step in ``steps``."""
        d = self.disc
        nu = d.V.dim
        cols = np.empty((nu + d.W.dim, len(steps)))
        cp = d.C @ np.asarray(p_series)[steps].T
        for j, n in enumerate(steps):
            F, _ = d.loads(self.times[n])
            b = np.concatenate([F, cp[:, j]])
            cols[:, j] = self._stokes_bc.rhs(b, d.u_boundary_values(self.times[n]))
        return cols

    def stokes_sweep(self, p_series, steps=None):
        """``(u, xi)`` series from a pressure series; steps are independent of each other."""
        steps = np.arange(2, self.N + 1) if steps is None else np.asarray(steps, dtype=int)
        if len(steps) and (steps.min() < 2 or steps.max() > self.N):
            raise ValueError("Stokes steps must lie in 2..N")
        U = self.series_template("u")
        XI = self.series_template("xi")
        if not len(steps):
            return U, XI
        try:
            x = self.stokes.solve(self.stokes_rhs(p_series, steps))
        except LinearSolveError as exc:
            raise StepSolveError(int(steps[0]), exc) from exc
        nu = self.disc.V.dim
        U[steps] = x[:nu].T
        XI[steps] = x[nu:].T
        return U, XI

    def increment(self, xi_new, xi_old) -> float:
        diff = np.asarray(xi_new)[2:] - np.asarray(xi_old)[2:]
        MW = self.disc.mass_W
        sq = np.einsum("ni,in->n", diff, MW @ diff.T)
        return float(np.sqrt(max(sq.max(initial=0.0), 0.0)))


def diag_error_vs_monolithic(disc: BiotDiscretization, dt: float, series, reference):
    """``(S, (e_u, e_xi, e_p))``: summed squared BDF-2 differences of the total-pressure error over
    n = 2..N and final-time errors (H1 seminorm, L2, H1 seminorm)."""
    u, xi, p = (np.asarray(a) for a in series)
    ur, xir, pr = (np.asarray(a) for a in reference)
    for a, b, name in ((u, ur, "u"), (xi, xir, "xi"), (p, pr, "p")):
        if a.shape != b.shape:
            raise ValueError(f"mismatched discretizations for {name}: {a.shape} vs {b.shape}")
    return xi_bdf_error(disc, dt, xi, xir), (
        disc.u_h1semi(u[-1] - ur[-1]),
        disc.xi_l2(xi[-1] - xir[-1]),
        disc.p_h1semi(p[-1] - pr[-1]),
    )


def xi_bdf_error(disc: BiotDiscretization, dt: float, xi, xi_ref) -> float:
    e = np.asarray(xi) - np.asarray(xi_ref)
    if e.shape[0] < 3:
        return 0.0
    eta = bdf_weights(2)
    de = (eta[0] * e[2:] + eta[1] * e[1:-1] + eta[2] * e[:-2]) / dt
    return float(np.einsum("ni,in->", de, disc.mass_W @ de.T))


# -- checkpointing ---------------------------------------------------------------


def _atomic_write(path: Path, writer):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(directory, state: IterationState):
    directory = Path(directory)
    _atomic_write(directory / "xi.npz", lambda fh: np.savez(fh, xi=state.xi, iteration=state.i, metric=state.metric))
    manifest = {"iteration": state.i, "metric": state.metric, "file": "xi.npz", "history": [r.as_dict() for r in state.history]}
    _atomic_write(directory / "manifest.json", lambda fh: fh.write(json.dumps(manifest, indent=1).encode()))


def load_checkpoint(directory) -> IterationState:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    with np.load(directory / manifest["file"]) as data:
        xi = data["xi"].copy()
        i = int(data["iteration"])
    if i != manifest["iteration"]:
        raise ValueError(f"checkpoint in {directory} is inconsistent (iteration {i} vs {manifest['iteration']})")
    history = [IterationRecord.from_dict(r) for r in manifest["history"]]
    return IterationState(i, xi, None, None, float(manifest["metric"]), history)


# -- driver ------------------------------------------------------------------------

StokesStep = Callable[[np.ndarray, int], tuple]


def run_iterations(
    solver: DecoupledSolver,
    stokes_step: StokesStep,
    initial_guess="first",
    stopping: StoppingRule | None = None,
    checkpoint=None,
    resume: bool = False,
    reference=None,
    on_iteration=None,
) -> IterationState:
    """Alternate the diffusion sweep and ``stokes_step(p, i) -> (u, xi, extra)`` until ``stopping``."""
    stopping = stopping or StoppingRule()
    disc = solver.disc
    stall = 0
    if resume:
        if checkpoint is None:
            raise ValueError("resume requested without a checkpoint directory")
        state = load_checkpoint(checkpoint)
        if state.xi.shape != (solver.N + 1, disc.W.dim):
            raise ValueError(f"checkpoint xi series has shape {state.xi.shape}, expected {(solver.N + 1, disc.W.dim)}")
        log.info("resuming from iteration %d", state.i)
        incs = [r.increment for r in state.history]
        while stall < len(incs) - 1 and incs[-1 - stall] >= incs[-2 - stall]:
            stall += 1
    else:
        state = IterationState(0, solver.initial_guess(initial_guess), None, None, np.inf, [])
    while not (state.i > 0 and stopping.done(state.i, state.metric)):
        i = state.i + 1
        p = solver.diffusion_sweep(state.xi)
        u, xi, extra = stokes_step(p, i)
        metric = solver.increment(xi, state.xi)
        rec = IterationRecord(i, metric, extra=dict(extra or {}))
        if reference is not None:
            rec.S, rec.ref_errors = diag_error_vs_monolithic(disc, solver.dt, (u, xi, p), reference)
        if disc.case.has_exact:
            rec.exact_errors = disc.exact_errors(u[-1], xi[-1], p[-1], solver.times[-1])
        if state.history and metric >= state.history[-1].increment:
            stall += 1
            if stall >= 3:
                warnings.warn(f"increment did not decrease for {stall} consecutive iterations (now {metric:.3e})", DivergenceWarning, stacklevel=2)
        else:
            stall = 0
        state = IterationState(i, xi, p, u, metric, state.history + [rec])
        log.info("iteration %d: increment %.3e%s", i, metric, "" if rec.S is None else f", S {rec.S:.3e}")
        if checkpoint is not None:
            save_checkpoint(checkpoint, state)
        if on_iteration is not None:
            on_iteration(state)
    return state


def iterate(solver: DecoupledSolver, initial_guess="first", stopping: StoppingRule | None = None, checkpoint=None, resume=False, reference=None, on_iteration=None) -> IterationState:
    """Full-order global-in-time iteration."""

    def full_stokes(p, i):
        u, xi = solver.stokes_sweep(p)
        return u, xi, {}

    return run_iterations(solver, full_stokes, initial_guess, stopping, checkpoint, resume, reference, on_iteration)
