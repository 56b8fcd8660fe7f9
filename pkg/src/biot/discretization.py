"""Finite element discretization of a Biot case: spaces, operators, loads and norms."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .fem import (
    FunctionSpace,
    assemble_boundary_load,
    assemble_form,
    assemble_load,
    error_norm,
    h1_matrix,
    load_degree,
    mass_matrix,
    stiffness_matrix,
    triangle_rule,
)
from .mesh import BoundaryTag, build_rect_mesh, tag_boundary
from .problem import Case, initial_total_pressure


class BiotDiscretization:
    """Taylor-Hood (P_k, P_{k-1}) for displacement and total pressure, P_l for pressure."""

    def __init__(self, case: Case, nx: int = 32, ny: int | None = None, degree_u: int = 2, degree_p: int | None = None, backend=None):
        ny = nx if ny is None else ny
        degree_p = degree_u if degree_p is None else degree_p
        if degree_u < 2:
            raise ValueError(f"displacement degree must be at least 2, got {degree_u}")
        if degree_p < 1:
            raise ValueError(f"pressure degree must be at least 1, got {degree_p}")
        self.case = case
        self.params = case.params
        self.backend = backend
        self.mesh = tag_boundary(build_rect_mesh(nx, ny), case.boundary)
        self.V = FunctionSpace(self.mesh, degree_u, rank=1)
        self.W = FunctionSpace(self.mesh, degree_u - 1)
        self.M = FunctionSpace(self.mesh, degree_p)
        prm = self.params
        self.A1 = assemble_form("a1", self.V, self.V, prm, backend)
        self.B = assemble_form("b", self.V, self.W, prm, backend)
        self.A2 = assemble_form("a2", self.W, self.W, prm, backend)
        self.C = assemble_form("c", self.M, self.W, prm, backend)
        self.A3 = assemble_form("a3", self.M, self.M, prm, backend)
        self.D = assemble_form("d", self.M, self.M, prm, backend)
        self.u_dofs = self.V.dirichlet_dofs
        self.p_dofs = self.M.dirichlet_dofs
        self._load_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.V.dim, self.W.dim, self.M.dim

    # -- inner products and norms --------------------------------------------

    @cached_property
    def mass_W(self):
        return mass_matrix(self.W, backend=self.backend)

    @cached_property
    def stiff_V(self):
        return stiffness_matrix(self.V, backend=self.backend)

    @cached_property
    def stiff_M(self):
        return stiffness_matrix(self.M, backend=self.backend)

    @cached_property
    def h1_V(self):
        return h1_matrix(self.V, backend=self.backend)

    def xi_l2(self, e) -> float:
        return float(np.sqrt(max(e @ (self.mass_W @ e), 0.0)))

    def u_h1semi(self, e) -> float:
        return float(np.sqrt(max(e @ (self.stiff_V @ e), 0.0)))

    def p_h1semi(self, e) -> float:
        return float(np.sqrt(max(e @ (self.stiff_M @ e), 0.0)))

    # -- data --------------------------------------------------------------------

    def loads(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Right-hand sides ``(f, v) + <traction, v>`` and ``(g, q) + <flux, q>`` at time ``t``."""
        key = 0.0 if self.case.time_independent_loads else float(t)
        if key not in self._load_cache:
            case = self.case
            F = assemble_load(case.body_force(t), self.V, backend=self.backend)
            G = assemble_load(case.source(t), self.M, backend=self.backend)
            traction = case.traction(t)
            if traction is not None:
                F += assemble_boundary_load(traction, self.V, BoundaryTag.TRACTION_FREE)
            flux = case.flux(t)
            if flux is not None:
                G += assemble_boundary_load(flux, self.M, BoundaryTag.NO_FLUX)
            self._load_cache[key] = (F, G)
        return self._load_cache[key]

    def clear_load_cache(self):
        self._load_cache.clear()

    def u_boundary_values(self, t):
        fn = self.case.dirichlet_u(t)
        if fn is None or not len(self.u_dofs):
            return None
        return self.V.interpolate(fn)[self.u_dofs]

    def p_boundary_values(self, t):
        fn = self.case.dirichlet_p(t)
        if fn is None or not len(self.p_dofs):
            return None
        return self.M.interpolate(fn)[self.p_dofs]

    def initial_state(self):
        """``(u0, xi0, p0)`` from the initial displacement and pressure."""
        u0 = self.V.interpolate(self.case.initial_u())
        p0 = self.M.interpolate(self.case.initial_p())
        xi0 = initial_total_pressure(u0, p0, self.V, self.W, self.M, self.params)
        return u0, xi0, p0

    def _require_exact(self):
        if not self.case.has_exact:
            raise ValueError(f"case {self.case.name!r} has no exact solution")

    def exact_interpolants(self, t: float):
        self._require_exact()
        c = self.case
        u = self.V.interpolate(lambda x, y: c.displacement(x, y, t))
        xi = self.W.interpolate(lambda x, y: c.total_pressure(x, y, t))
        p = self.M.interpolate(lambda x, y: c.pressure(x, y, t))
        return u, xi, p

    def exact_errors(self, u, xi, p, t: float) -> tuple[float, float, float]:
        """``|u - u_h|_H1``, ``||xi - xi_h||_L2``, ``|p - p_h|_H1`` at time ``t``."""
        self._require_exact()
        c = self.case
        eu = error_norm(u, self.V, lambda x, y: c.displacement_grad(x, y, t), "H1semi")
        exi = error_norm(xi, self.W, lambda x, y: c.total_pressure(x, y, t), "L2")
        ep = error_norm(p, self.M, lambda x, y: c.pressure_grad(x, y, t), "H1semi")
        return eu, exi, ep

    def div_error(self, u, t: float) -> float:
        """``||div(u - u_h)||_L2``, reported next to the H1 seminorm."""
        self._require_exact()
        rule = triangle_rule(load_degree(self.V))
        x = self.V.geometry.map_points(rule.points)
        _, g = self.V.cell_values(u, rule.points)
        G = self.case.displacement_grad(x[..., 0], x[..., 1], t)
        e = g[..., 0, 0] + g[..., 1, 1] - G[0, 0] - G[1, 1]
        local = np.einsum("q,eq->e", rule.weights, e**2) * self.V.geometry.detJ
        return float(np.sqrt(local.sum()))
