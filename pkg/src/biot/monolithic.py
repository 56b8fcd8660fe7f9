"""Fully coupled BDF time stepping of the three-field system."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .bdf import bdf_weights
from .discretization import BiotDiscretization
from .fem import DirichletSystem
from .linalg import Factorization, LinearSolveError

log = logging.getLogger(__name__)

BOOTSTRAP_MODES = ("exact", "bdf1")


class StepSolveError(LinearSolveError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step


class CoupledSystem:
    """Block system in (u, xi, p) for an m-step BDF with step ``dt``; factorized once."""

    def __init__(self, disc: BiotDiscretization, dt: float, m: int = 2):
        self.disc = disc
        self.dt = float(dt)
        self.m = m
        self.eta = bdf_weights(m)
        s = self.eta[0] / self.dt
        d = disc
        self.matrix = sp.bmat(
            [
                [d.A1, -d.B.T, None],
                [d.B, d.A2, -d.C],
                [None, -s * d.C.T, s * d.A3 + d.D],
            ],
            format="csr",
        )
        nu, nxi, _ = d.sizes
        self.offsets = (0, nu, nu + nxi)
        self.dofs = np.concatenate([d.u_dofs, d.p_dofs + nu + nxi])
        self._bc = DirichletSystem(self.matrix, self.dofs)
        self.lu = Factorization(self._bc.matrix, name=f"coupled BDF-{m}")

    def split(self, x):
        a, b, c = self.offsets
        return x[:b], x[b:c], x[c:]

    def rhs(self, t: float, xi_hist, p_hist) -> np.ndarray:
        """Right-hand side; ``xi_hist[j-1]``, ``p_hist[j-1]`` hold step ``n - j`` for ``j = 1..m``."""
        d = self.disc
        F, G = d.loads(t)
        hist = np.zeros_like(G)
        for j in range(1, self.m + 1):
            hist += self.eta[j] * (d.A3 @ p_hist[j - 1] - d.C.T @ xi_hist[j - 1])
        return np.concatenate([F, np.zeros(d.W.dim), G - hist / self.dt])

    def boundary_values(self, t: float):
        d = self.disc
        ub = d.u_boundary_values(t)
        pb = d.p_boundary_values(t)
        if ub is None and pb is None:
            return None
        ub = np.zeros(len(d.u_dofs)) if ub is None else ub
        pb = np.zeros(len(d.p_dofs)) if pb is None else pb
        return np.concatenate([ub, pb])

    def step(self, t: float, xi_hist, p_hist):
        b = self._bc.rhs(self.rhs(t, xi_hist, p_hist), self.boundary_values(t))
        return self.split(self.lu.solve(b))


@dataclass
class MonolithicResult:
    times: np.ndarray
    u: np.ndarray
    xi: np.ndarray
    p: np.ndarray
    max_residual: float = 0.0
    errors: list = field(default_factory=list)  # (n, t, e_u, e_xi, e_p, e_div) per step with exact data

    @property
    def final_errors(self):
        return self.errors[-1][2:5] if self.errors else None


def bootstrap_first_step(disc: BiotDiscretization, dt: float, mode: str = "exact", state0=None):
    """States at n = 1, either the exact interpolants or one BDF-1 step from n = 0."""
    if mode not in BOOTSTRAP_MODES:
        raise ValueError(f"unknown bootstrap mode {mode!r}; expected one of {BOOTSTRAP_MODES}")
    if mode == "exact":
        if not disc.case.has_exact:
            raise ValueError("exact bootstrap requires a case with a manufactured solution")
        return disc.exact_interpolants(dt)
    u0, xi0, p0 = disc.initial_state() if state0 is None else state0
    system = CoupledSystem(disc, dt, m=1)
    try:
        return system.step(dt, [xi0], [p0])
    except LinearSolveError as exc:
        raise StepSolveError(1, exc) from exc


def run_monolithic(disc: BiotDiscretization, dt: float, num_steps: int, bootstrap: str = "exact", record_errors: bool | None = None, system: CoupledSystem | None = None) -> MonolithicResult:
    """BDF-2 over ``n = 2..num_steps`` after the n = 0 initial data and the bootstrap step."""
    if num_steps < 2:
        raise ValueError("need at least two time steps")
    if record_errors is None:
        record_errors = disc.case.has_exact
    nu, nxi, np_ = disc.sizes
    times = dt * np.arange(num_steps + 1)
    U = np.zeros((num_steps + 1, nu))
    XI = np.zeros((num_steps + 1, nxi))
    P = np.zeros((num_steps + 1, np_))
    state0 = disc.initial_state()
    U[0], XI[0], P[0] = state0
    U[1], XI[1], P[1] = bootstrap_first_step(disc, dt, bootstrap, state0)
    if system is None:
        system = CoupledSystem(disc, dt, m=2)
    result = MonolithicResult(times, U, XI, P)
    if record_errors:
        for n in (0, 1):
            result.errors.append(step_errors(disc, n, times[n], U[n], XI[n], P[n]))
    for n in range(2, num_steps + 1):
        try:
            U[n], XI[n], P[n] = system.step(times[n], [XI[n - 1], XI[n - 2]], [P[n - 1], P[n - 2]])
        except LinearSolveError as exc:
            raise StepSolveError(n, exc) from exc
        if record_errors:
            result.errors.append(step_errors(disc, n, times[n], U[n], XI[n], P[n]))
    result.max_residual = system.lu.max_residual
    log.info("monolithic dt=%g: max relative residual %.2e", dt, result.max_residual)
    return result


def step_errors(disc, n, t, u, xi, p):
    return (n, t, *disc.exact_errors(u, xi, p, t), disc.div_error(u, t))


def constraint_residual(disc: BiotDiscretization, u, xi, p) -> float:
    """Norm of ``B u + A2 xi - C p``."""
    return float(np.linalg.norm(disc.B @ u + disc.A2 @ xi - disc.C @ p))
