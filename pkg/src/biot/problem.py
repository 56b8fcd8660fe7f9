"""Physical parameters and the problem cases: manufactured solution, injection wells, constants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse.linalg as spla

from . import _manufactured as mf
from .mesh import Mesh, right_side_spec

Conductivity = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class BiotParameters:
    lam: float
    mu: float
    alpha: float
    c0: float
    k_p: Conductivity

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0 and self.alpha > 0 and self.c0 >= 0):
            raise ValueError(f"invalid Biot parameters: {self}")
        if not callable(self.k_p) and not self.k_p > 0:
            raise ValueError(f"hydraulic conductivity must be positive, got {self.k_p}")

    @classmethod
    def from_young(cls, E, nu, alpha, c0, k_p):
        lam = E * nu / ((1 + nu) * (1 - 2 * nu))
        mu = E / (2 * (1 + nu))
        return cls(lam=lam, mu=mu, alpha=alpha, c0=c0, k_p=k_p)

    @property
    def storage(self) -> float:
        """Coefficient ``c0 + alpha^2 / lam`` of the pressure mass term."""
        return self.c0 + self.alpha**2 / self.lam

    def cell_conductivity(self, mesh: Mesh) -> np.ndarray:
        """k_p per cell, sampled at the centroid."""
        if not callable(self.k_p):
            return np.full(mesh.num_cells, float(self.k_p))
        c = mesh.centroids()
        kp = np.broadcast_to(np.asarray(self.k_p(c[:, 0], c[:, 1]), dtype=float), (mesh.num_cells,))
        if np.any(kp <= 0):
            raise ValueError("hydraulic conductivity must be positive everywhere")
        return kp.copy()


def _zero_vector(x, y):
    return np.zeros((2,) + np.shape(x))


def _zero(x, y):
    return np.zeros(np.shape(x))


class Case:
    """Data of a Biot problem on the unit square.

    Time-dependent data are exposed as factories ``data(t) -> fn(x, y)``.
    ``None`` for traction, flux or Dirichlet data means homogeneous.
    """

    name = "case"
    params: BiotParameters
    has_exact = False
    time_independent_loads = False

    @property
    def boundary(self):
        return right_side_spec(1.0)

    def body_force(self, t):
        return _zero_vector

    def source(self, t):
        return _zero

    def traction(self, t):
        return None

    def flux(self, t):
        return None

    def dirichlet_u(self, t):
        return None

    def dirichlet_p(self, t):
        return None

    def initial_u(self):
        return _zero_vector

    def initial_p(self):
        return _zero


class ManufacturedCase(Case):
    """Smooth exact solution with displacement and pressure vanishing at t = 0 and on x=0, y=0, y=1."""

    name = "example1"
    has_exact = True

    def __init__(self, params: BiotParameters | None = None):
        if params is None:
            params = BiotParameters(lam=1e2, mu=1e2, alpha=1.0, c0=1e-2, k_p=1e-2)
        if callable(params.k_p):
            raise ValueError("the manufactured case needs a constant conductivity")
        self.params = params

    def _coeffs(self):
        p = self.params
        return (p.lam, p.mu, p.alpha, p.c0, float(p.k_p))

    def displacement(self, x, y, t):
        return np.array(np.broadcast_arrays(*mf.displacement(x, y, t)))

    def displacement_grad(self, x, y, t):
        g = np.broadcast_arrays(*mf.displacement_grad(x, y, t))
        return np.array([[g[0], g[1]], [g[2], g[3]]])

    def pressure(self, x, y, t):
        return mf.pressure(x, y, t)[0]

    def pressure_grad(self, x, y, t):
        return np.array(np.broadcast_arrays(*mf.pressure_grad(x, y, t)))

    def total_pressure(self, x, y, t):
        return np.broadcast_to(mf.total_pressure(x, y, t, *self._coeffs())[0], np.shape(x))

    def body_force(self, t):
        return lambda x, y: np.array(np.broadcast_arrays(*mf.body_force(x, y, t, *self._coeffs())))

    def source(self, t):
        return lambda x, y: np.broadcast_to(mf.source(x, y, t, *self._coeffs())[0], np.shape(x))

    def traction(self, t):
        mu = self.params.mu

        def h(x, y, nx, ny):
            G = self.displacement_grad(x, y, t)
            xi = self.total_pressure(x, y, t)
            s00 = 2 * mu * G[0, 0] - xi
            s11 = 2 * mu * G[1, 1] - xi
            s01 = mu * (G[0, 1] + G[1, 0])
            return np.array([s00 * nx + s01 * ny, s01 * nx + s11 * ny])

        return h

    def flux(self, t):
        kp = float(self.params.k_p)

        def h(x, y, nx, ny):
            g = self.pressure_grad(x, y, t)
            return kp * (g[0] * nx + g[1] * ny)

        return h

    def dirichlet_u(self, t):
        return lambda x, y: self.displacement(x, y, t)

    def dirichlet_p(self, t):
        return lambda x, y: self.pressure(x, y, t)

    def initial_u(self):
        return lambda x, y: self.displacement(x, y, 0.0)

    def initial_p(self):
        return lambda x, y: self.pressure(x, y, 0.0)


EXACT_FIELDS = ("u", "p", "xi", "grad_u", "grad_p")


def eval_exact(case: ManufacturedCase, field: str, x, y, t):
    """Pointwise exact field values; ``grad_u`` is indexed (component, derivative)."""
    fns = {
        "u": case.displacement,
        "p": case.pressure,
        "xi": case.total_pressure,
        "grad_u": case.displacement_grad,
        "grad_p": case.pressure_grad,
    }
    if field not in fns:
        raise ValueError(f"unknown field {field!r}; expected one of {EXACT_FIELDS}")
    return fns[field](np.asarray(x, dtype=float), np.asarray(y, dtype=float), t)


def eval_sources(case: ManufacturedCase, x, y, t):
    """Body force ``f`` (shape (2, ...)) and fluid source ``g`` of the manufactured case."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return case.body_force(t)(x, y), case.source(t)(x, y)


class WellCase(Case):
    """Injection at (0.25, 0.5) and production at (0.75, 0.5) in a layered medium."""

    name = "example2"
    time_independent_loads = True
    channel = (0.375, 0.625)
    wells = ((0.25, 0.5), (0.75, 0.5))

    def __init__(self, k_high=0.1, k_low=1e-5, lam=1e2, mu=1e2, alpha=1.0, c0=1e-2, rate=1e-2, width=1000.0):
        self.k_high = k_high
        self.k_low = k_low
        self.rate = rate
        self.width = width
        self.params = BiotParameters(lam=lam, mu=mu, alpha=alpha, c0=c0, k_p=self.conductivity)

    def conductivity(self, x, y):
        lo, hi = self.channel
        y = np.asarray(y)
        return np.where((y >= lo) & (y <= hi), self.k_high, self.k_low)

    def well_source(self, x, y):
        (x1, y1), (x2, y2) = self.wells
        a = self.width
        return self.rate * (np.exp(-a * (x - x1) ** 2 - a * (y - y1) ** 2) - np.exp(-a * (x - x2) ** 2 - a * (y - y2) ** 2))

    def source(self, t):
        return self.well_source


class ConstantCase(Case):
    """Constant body force and source with zero initial and boundary data."""

    name = "custom"
    time_independent_loads = True

    def __init__(self, params: BiotParameters, f=(0.0, 0.0), g=0.0, boundary=None):
        self.params = params
        self.f = tuple(float(v) for v in f)
        self.g = float(g)
        self._boundary = boundary

    @property
    def boundary(self):
        return self._boundary if self._boundary is not None else right_side_spec(1.0)

    def body_force(self, t):
        f = self.f
        return lambda x, y: np.array([np.full(np.shape(x), f[0]), np.full(np.shape(x), f[1])])

    def source(self, t):
        g = self.g
        return lambda x, y: np.full(np.shape(x), g)


def initial_total_pressure(u0, p0, V, W, M, params: BiotParameters) -> np.ndarray:
    """L2 projection of ``alpha * p0 - lam * div u0`` onto ``W``."""
    from .fem import assemble_form, mass_matrix

    B = assemble_form("b", V, W, params)
    C = assemble_form("c", M, W, params)
    rhs = params.lam * (C @ p0 - B @ u0)
    if not np.any(rhs):
        return np.zeros(W.dim)
    return spla.spsolve(mass_matrix(W).tocsc(), rhs)
