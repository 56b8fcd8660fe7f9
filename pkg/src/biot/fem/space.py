"""Continuous Lagrange function spaces and their degree-of-freedom maps."""

from __future__ import annotations

import weakref
from functools import cached_property

import numpy as np

from ..mesh import BoundaryTag, Mesh
from .elements import reference_element


class Geometry:
    """Affine maps of all cells: x = p0 + J xhat."""

    def __init__(self, mesh: Mesh):
        p = mesh.vertices[mesh.triangles]
        self.origin = p[:, 0]
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)  # (ne, 2, 2)
        self.jacobian = J
        self.detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if np.any(self.detJ <= 0):
            raise ValueError("mesh contains triangles with non-positive orientation")
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1]
        inv[:, 1, 1] = J[:, 0, 0]
        inv[:, 0, 1] = -J[:, 0, 1]
        inv[:, 1, 0] = -J[:, 1, 0]
        self.invJ = inv / self.detJ[:, None, None]

    def map_points(self, ref_points) -> np.ndarray:
        """Physical coordinates ``(ne, npts, 2)`` of reference points."""
        ref = np.asarray(ref_points, dtype=float)
        return self.origin[:, None, :] + np.einsum("eij,qj->eqi", self.jacobian, ref)


_geometry_cache: "weakref.WeakKeyDictionary[Mesh, Geometry]" = weakref.WeakKeyDictionary()


def geometry(mesh: Mesh) -> Geometry:
    geo = _geometry_cache.get(mesh)
    if geo is None:
        geo = _geometry_cache[mesh] = Geometry(mesh)
    return geo


class FunctionSpace:
    """Continuous P_k space, scalar (``rank=0``) or 2-vector (``rank=1``).

    Scalar nodes are numbered by a key built from their barycentric support,
    which makes the numbering independent of cell order. Vector spaces
    interleave components: global dof ``2*s + c``.
    """

    def __init__(self, mesh: Mesh, degree: int, rank: int = 0):
        if rank not in (0, 1):
            raise ValueError(f"rank must be 0 or 1, got {rank}")
        self.mesh = mesh
        self.degree = degree
        self.rank = rank
        self.element = reference_element(degree)
        self.geometry = geometry(mesh)
        self._build_dofmap()

    @property
    def value_size(self) -> int:
        return 2 if self.rank else 1

    @property
    def dim(self) -> int:
        return self.num_nodes * self.value_size

    def _build_dofmap(self):
        k = self.degree
        lat = self.element.lattice
        bary = np.column_stack([k - lat.sum(axis=1), lat[:, 0], lat[:, 1]])  # (nb, 3)
        tri = self.mesh.triangles
        ne, nb = len(tri), len(lat)
        verts = np.broadcast_to(tri[:, None, :], (ne, nb, 3))
        weights = np.broadcast_to(bary[None, :, :], (ne, nb, 3))
        verts = np.where(weights > 0, verts, -1)
        order = np.argsort(verts, axis=-1, kind="stable")
        vs = np.take_along_axis(verts, order, axis=-1)
        ws = np.take_along_axis(np.asarray(weights), order, axis=-1)
        keys = np.concatenate([vs, ws], axis=-1).reshape(-1, 6)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        self.cell_nodes = inverse.reshape(ne, nb).astype(np.int64)
        self.num_nodes = len(uniq)
        self._node_keys = uniq
        coords = np.zeros((self.num_nodes, 2))
        V = self.mesh.vertices
        for c in range(3):
            v = uniq[:, c]
            w = uniq[:, 3 + c]
            mask = v >= 0
            coords[mask] += (w[mask] / k)[:, None] * V[v[mask]]
        self.node_coords = coords
        if self.rank:
            cd = np.empty((ne, 2 * nb), dtype=np.int64)
            cd[:, 0::2] = 2 * self.cell_nodes
            cd[:, 1::2] = 2 * self.cell_nodes + 1
            self.cell_dofs = cd
        else:
            self.cell_dofs = self.cell_nodes

    def boundary_nodes(self, tag: BoundaryTag) -> np.ndarray:
        """Scalar nodes on the closure of the boundary edges carrying ``tag``."""
        edges = self.mesh.edges_with(tag)
        if len(edges) == 0:
            return np.zeros(0, dtype=np.int64)
        nv = self.mesh.num_vertices
        lo, hi = np.minimum(edges[:, 0], edges[:, 1]), np.maximum(edges[:, 0], edges[:, 1])
        edge_codes = lo * nv + hi
        vs = self._node_keys[:, :3]
        support = (vs >= 0).sum(axis=1)
        on_vertex = (support == 1) & np.isin(vs[:, 2], edges.ravel())
        on_edge = (support == 2) & np.isin(vs[:, 1] * nv + vs[:, 2], edge_codes)
        return np.flatnonzero(on_vertex | on_edge)

    def boundary_dofs(self, tag: BoundaryTag) -> np.ndarray:
        nodes = self.boundary_nodes(tag)
        if not self.rank:
            return nodes
        return np.sort(np.concatenate([2 * nodes, 2 * nodes + 1]))

    @cached_property
    def dirichlet_dofs(self) -> np.ndarray:
        tag = BoundaryTag.DIRICHLET_U if self.rank else BoundaryTag.DIRICHLET_P
        return self.boundary_dofs(tag)

    def interpolate(self, fn) -> np.ndarray:
        """Nodal interpolant of ``fn(x, y)``; vector spaces expect a (2, n) result."""
        x, y = self.node_coords[:, 0], self.node_coords[:, 1]
        vals = np.asarray(fn(x, y), dtype=float)
        if self.rank:
            vals = np.broadcast_to(vals, (2, self.num_nodes))
            out = np.empty(self.dim)
            out[0::2] = vals[0]
            out[1::2] = vals[1]
            return out
        return np.broadcast_to(vals, (self.num_nodes,)).copy()

    def cell_values(self, coeffs, ref_points):
        """Values and physical gradients of a discrete function at reference points.

        Returns ``(ne, nq)`` / ``(ne, nq, 2)`` for scalars and ``(ne, nq, 2)`` /
        ``(ne, nq, 2, 2)`` (component, derivative) for vectors.
        """
        vals, grads = self.element.tabulate(ref_points)
        pgrads = np.einsum("qbj,eji->eqbi", grads, self.geometry.invJ)
        c = np.asarray(coeffs)[self.cell_dofs]
        if self.rank:
            c = c.reshape(len(c), -1, 2)  # (ne, nb, comp)
            v = np.einsum("qb,ebc->eqc", vals, c)
            g = np.einsum("eqbi,ebc->eqci", pgrads, c)
        else:
            v = np.einsum("qb,eb->eq", vals, c)
            g = np.einsum("eqbi,eb->eqi", pgrads, c)
        return v, g

    def __repr__(self):
        kind = "vector" if self.rank else "scalar"
        return f"FunctionSpace(P{self.degree}, {kind}, dim={self.dim})"
