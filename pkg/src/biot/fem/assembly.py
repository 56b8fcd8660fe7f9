"""Global assembly of bilinear forms, loads, Dirichlet constraints and error norms."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..mesh import BoundaryTag
from .kernels import kernel
from .quadrature import interval_rule, triangle_rule
from .space import FunctionSpace

FORMS = ("a1", "b", "a2", "c", "a3", "d")

# (trial rank, test rank) of each form
_SIGNATURES = {"a1": (1, 1), "b": (1, 0), "a2": (0, 0), "c": (0, 0), "a3": (0, 0), "d": (0, 0)}


def _scatter(local, test: FunctionSpace, trial: FunctionSpace) -> sp.csr_matrix:
    ne, nt, ns = local.shape
    rows = np.broadcast_to(test.cell_dofs[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(trial.cell_dofs[:, None, :], local.shape).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(test.dim, trial.dim)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def _check_mesh(*spaces):
    mesh = spaces[0].mesh
    if any(s.mesh is not mesh for s in spaces[1:]):
        raise ValueError("function spaces live on different meshes")


def _tables(space, rule):
    return space.element.tabulate(rule.points)


def mass_matrix(space: FunctionSpace, test: FunctionSpace | None = None, coef=1.0, backend=None):
    """``int coef * phi_j * psi_i``; vector spaces couple equal components only."""
    test = space if test is None else test
    _check_mesh(space, test)
    if space.rank != test.rank:
        raise ValueError("mass matrix needs spaces of equal rank")
    rule = triangle_rule(space.degree + test.degree)
    vt, _ = _tables(test, rule)
    vs, _ = _tables(space, rule)
    scale = np.broadcast_to(coef, (space.mesh.num_cells,)) * space.geometry.detJ
    local = kernel("mass", backend)(vt, vs, rule.weights, np.ascontiguousarray(scale, dtype=float))
    if space.rank:
        local = _componentwise(local)
    return _scatter(local, test, space)


def _componentwise(local):
    ne, nt, ns = local.shape
    out = np.zeros((ne, nt, 2, ns, 2))
    out[:, :, 0, :, 0] = local
    out[:, :, 1, :, 1] = local
    return out.reshape(ne, 2 * nt, 2 * ns)


def _grad_outer(space, test, coef, backend):
    rule = triangle_rule(space.degree + test.degree)
    _, gt = _tables(test, rule)
    _, gs = _tables(space, rule)
    scale = np.broadcast_to(coef, (space.mesh.num_cells,)) * space.geometry.detJ
    return kernel("grad_outer", backend)(gt, gs, rule.weights, space.geometry.invJ, np.ascontiguousarray(scale, dtype=float))


def stiffness_matrix(space: FunctionSpace, coef=1.0, backend=None):
    """``int coef * grad phi_j . grad phi_i`` (componentwise for vector spaces)."""
    G = _grad_outer(space, space, coef, backend)
    local = G[..., 0, 0] + G[..., 1, 1]
    if space.rank:
        local = _componentwise(local)
    return _scatter(local, space, space)


def h1_matrix(space: FunctionSpace, backend=None):
    """Gram matrix of the full H1 inner product."""
    return (mass_matrix(space, backend=backend) + stiffness_matrix(space, backend=backend)).tocsr()


def _strain_local(G, two_mu):
    # test (i, c), trial (j, d): mu * (delta_cd grad_i . grad_j + d_d phi_i d_c phi_j)
    ne, nt, ns = G.shape[:3]
    out = np.empty((ne, nt, 2, ns, 2))
    trace = G[..., 0, 0] + G[..., 1, 1]
    for c in range(2):
        for d in range(2):
            out[:, :, c, :, d] = 0.5 * two_mu * ((c == d) * trace + G[..., d, c])
    return out.reshape(ne, 2 * nt, 2 * ns)


def assemble_form(form: str, trial: FunctionSpace, test: FunctionSpace, params, backend=None) -> sp.csr_matrix:
    """Sparse Galerkin matrix (rows: test dofs, columns: trial dofs) of one Biot form."""
    if form not in _SIGNATURES:
        raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")
    _check_mesh(trial, test)
    ranks = _SIGNATURES[form]
    if (trial.rank, test.rank) != ranks:
        raise ValueError(f"form {form} expects (trial, test) ranks {ranks}, got {(trial.rank, test.rank)}")
    if form in ("a1", "a2", "a3", "d") and trial is not test:
        raise ValueError(f"form {form} is defined on a single space")

    lam, mu, alpha, c0 = params.lam, params.mu, params.alpha, params.c0
    if form == "a1":
        G = _grad_outer(trial, test, 1.0, backend)
        return _scatter(_strain_local(G, 2.0 * mu), test, trial)
    if form == "b":
        rule = triangle_rule(trial.degree + test.degree)
        vt, _ = _tables(test, rule)
        _, gs = _tables(trial, rule)
        local = kernel("value_grad", backend)(vt, gs, rule.weights, trial.geometry.invJ, trial.geometry.detJ)
        ne, nt, ns, _ = local.shape
        return _scatter(local.reshape(ne, nt, 2 * ns), test, trial)
    if form == "a2":
        return mass_matrix(trial, coef=1.0 / lam, backend=backend)
    if form == "c":
        return mass_matrix(trial, test, coef=alpha / lam, backend=backend)
    if form == "a3":
        return mass_matrix(trial, coef=c0 + alpha**2 / lam, backend=backend)
    kp = params.cell_conductivity(trial.mesh)
    return stiffness_matrix(trial, coef=kp, backend=backend)


def load_degree(space: FunctionSpace) -> int:
    return 2 * space.degree + 4


def assemble_load(f, space: FunctionSpace, degree: int | None = None, backend=None) -> np.ndarray:
    """``int f . phi_i`` for ``f(x, y)`` (vector spaces: ``f`` returns shape (2, ...))."""
    rule = triangle_rule(load_degree(space) if degree is None else degree)
    vals, _ = _tables(space, rule)
    x = space.geometry.map_points(rule.points)
    fq = np.asarray(f(x[..., 0], x[..., 1]), dtype=float)
    run = kernel("load", backend)
    out = np.zeros(space.dim)
    if space.rank:
        fq = np.broadcast_to(fq, (2,) + x.shape[:2])
        for c in range(2):
            local = run(vals, np.ascontiguousarray(fq[c]), rule.weights, space.geometry.detJ)
            np.add.at(out, space.cell_dofs[:, c::2].ravel(), local.ravel())
    else:
        fq = np.ascontiguousarray(np.broadcast_to(fq, x.shape[:2]))
        local = run(vals, fq, rule.weights, space.geometry.detJ)
        np.add.at(out, space.cell_dofs.ravel(), local.ravel())
    return out


def _edge_owners(mesh, edges):
    nv = mesh.num_vertices
    tri = mesh.triangles
    codes = []
    for a, b in ((0, 1), (1, 2), (2, 0)):
        lo = np.minimum(tri[:, a], tri[:, b])
        hi = np.maximum(tri[:, a], tri[:, b])
        codes.append(lo * nv + hi)
    codes = np.concatenate(codes)
    cells = np.tile(np.arange(len(tri)), 3)
    order = np.argsort(codes, kind="stable")
    want = np.minimum(edges[:, 0], edges[:, 1]) * nv + np.maximum(edges[:, 0], edges[:, 1])
    pos = np.searchsorted(codes[order], want)
    return cells[order][pos]


def assemble_boundary_load(h, space: FunctionSpace, tag: BoundaryTag, degree: int | None = None) -> np.ndarray:
    """``int_{Gamma_tag} h . phi_i ds`` for ``h(x, y, nx, ny)`` with the outward unit normal."""
    out = np.zeros(space.dim)
    mesh = space.mesh
    edges = mesh.edges_with(tag)
    if len(edges) == 0:
        return out
    rule = interval_rule(load_degree(space) if degree is None else degree)
    pa = mesh.vertices[edges[:, 0]]
    pb = mesh.vertices[edges[:, 1]]
    length = np.linalg.norm(pb - pa, axis=1)
    tangent = (pb - pa) / length[:, None]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    s = rule.points[:, 0]
    x = pa[:, None, :] + s[None, :, None] * (pb - pa)[:, None, :]  # (nedge, nq, 2)
    cells = _edge_owners(mesh, edges)
    geo = space.geometry
    xhat = np.einsum("eij,eqj->eqi", geo.invJ[cells], x - geo.origin[cells][:, None, :])
    ne, nq = x.shape[:2]
    vals, _ = space.element.tabulate(xhat.reshape(-1, 2))
    vals = vals.reshape(ne, nq, -1)
    nx = np.broadcast_to(normal[:, None, 0], (ne, nq))
    ny = np.broadcast_to(normal[:, None, 1], (ne, nq))
    hq = np.asarray(h(x[..., 0], x[..., 1], nx, ny), dtype=float)
    wl = rule.weights[None, :] * length[:, None]
    dofs = space.cell_dofs[cells]
    if space.rank:
        hq = np.broadcast_to(hq, (2, ne, nq))
        for c in range(2):
            local = np.einsum("eq,eqi->ei", wl * hq[c], vals)
            np.add.at(out, dofs[:, c::2].ravel(), local.ravel())
    else:
        local = np.einsum("eq,eqi->ei", wl * np.broadcast_to(hq, (ne, nq)), vals)
        np.add.at(out, dofs.ravel(), local.ravel())
    return out


class DirichletSystem:
    """Symmetric elimination of constrained dofs, keeping the system size.

    Constrained rows and columns are replaced by the identity. The matrix is
    built once; :meth:`rhs` applies the lifting for any boundary values.
    """

    def __init__(self, A, dofs):
        A = sp.csr_matrix(A)
        n = A.shape[0]
        if A.shape[0] != A.shape[1]:
            raise ValueError("Dirichlet elimination needs a square matrix")
        dofs = np.unique(np.asarray(dofs, dtype=np.int64))
        if len(dofs) and (dofs[0] < 0 or dofs[-1] >= n):
            raise IndexError("constraint on a nonexistent dof")
        self.dofs = dofs
        free = np.ones(n)
        free[dofs] = 0.0
        Df = sp.diags(free)
        self.matrix = (Df @ A @ Df + sp.diags(1.0 - free)).tocsr()
        self.matrix.sort_indices()
        self._lift = (Df @ A[:, dofs]).tocsr() if len(dofs) else None

    def rhs(self, b, values=None) -> np.ndarray:
        out = np.array(b, dtype=float, copy=True)
        if not len(self.dofs):
            return out
        vals = np.zeros(len(self.dofs)) if values is None else np.broadcast_to(np.asarray(values, dtype=float), self.dofs.shape)
        if np.any(vals):
            out -= self._lift @ vals
        out[self.dofs] = vals
        return out


def apply_dirichlet(A, b, dofs, values=None):
    """Return ``(A_bc, b_bc)`` after symmetric elimination of ``dofs``."""
    system = DirichletSystem(A, dofs)
    return system.matrix, system.rhs(b, values)


def error_norm(u_h, space: FunctionSpace, exact, kind: str = "L2", degree: int | None = None) -> float:
    """Quadrature approximation of ``||u_h - exact||`` (``L2``) or ``|u_h - exact|_{H1}`` (``H1semi``).

    For ``H1semi``, ``exact(x, y)`` must return the gradient: shape (2, ...)
    for scalars and (2, 2, ...) indexed (component, derivative) for vectors.
    """
    if kind not in ("L2", "H1semi"):
        raise ValueError(f"unknown norm {kind!r}")
    rule = triangle_rule(load_degree(space) if degree is None else degree)
    x = space.geometry.map_points(rule.points)
    v, g = space.cell_values(u_h, rule.points)
    ex = np.asarray(exact(x[..., 0], x[..., 1]), dtype=float)
    if kind == "L2":
        approx = v
        if space.rank:
            ex = np.moveaxis(np.broadcast_to(ex, (2,) + x.shape[:2]), 0, -1)
    else:
        approx = g
        if space.rank:
            ex = np.moveaxis(np.broadcast_to(ex, (2, 2) + x.shape[:2]), (0, 1), (-2, -1))
        else:
            ex = np.moveaxis(np.broadcast_to(ex, (2,) + x.shape[:2]), 0, -1)
    diff = (approx - ex).reshape(x.shape[0], x.shape[1], -1)
    local = np.einsum("q,eq->e", rule.weights, (diff**2).sum(axis=-1)) * space.geometry.detJ
    return float(np.sqrt(local.sum()))
