"""Structured triangulations of rectangles with tagged boundary edges."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

_MIDPOINT_TOL = 1e-12


class BoundaryTag(enum.IntEnum):
    UNTAGGED = 0
    DIRICHLET_U = 1
    TRACTION_FREE = 2
    DIRICHLET_P = 3
    NO_FLUX = 4


U_TAGS = (BoundaryTag.DIRICHLET_U, BoundaryTag.TRACTION_FREE)
P_TAGS = (BoundaryTag.DIRICHLET_P, BoundaryTag.NO_FLUX)

# predicate(x, y) -> bool array, evaluated at edge midpoints
BoundarySpec = Mapping[BoundaryTag, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle mesh of an axis-aligned rectangle.

    ``boundary_edges`` holds vertex pairs oriented so that the domain lies on
    the left. ``u_tags`` and ``p_tags`` give the mechanics and flow boundary
    condition of every boundary edge.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    u_tags: np.ndarray = field(default=None)
    p_tags: np.ndarray = field(default=None)

    def __post_init__(self):
        ne = len(self.boundary_edges)
        for name in ("u_tags", "p_tags"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.zeros(ne, dtype=np.int64))
        for name in ("vertices", "triangles", "boundary_edges", "u_tags", "p_tags"):
            getattr(self, name).setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def h(self) -> float:
        """Largest element diameter."""
        p = self.vertices[self.triangles]
        lengths = [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))]
        return float(np.max(lengths))

    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.boundary_edges[:, 0]] + self.vertices[self.boundary_edges[:, 1]])

    def edges_with(self, tag: BoundaryTag) -> np.ndarray:
        tags = self.u_tags if tag in U_TAGS else self.p_tags
        return self.boundary_edges[tags == tag]

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)


def build_rect_mesh(nx: int, ny: int, domain=((0.0, 0.0), (1.0, 1.0))) -> Mesh:
    """Split an ``nx`` by ``ny`` grid of cells along the bottom-left/top-right diagonal."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"nx and ny must be positive integers, got nx={nx}, ny={ny}")
    (x0, y0), (x1, y1) = domain
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {domain!r}")
    nx, ny = int(nx), int(ny)

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # row j is y = ys[j]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    vid = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    v00 = vid[:-1, :-1].ravel()
    v10 = vid[:-1, 1:].ravel()
    v01 = vid[1:, :-1].ravel()
    v11 = vid[1:, 1:].ravel()
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    # counterclockwise walk around the rectangle
    bottom = np.column_stack([vid[0, :-1], vid[0, 1:]])
    right = np.column_stack([vid[:-1, -1], vid[1:, -1]])
    top = np.column_stack([vid[-1, 1:], vid[-1, :-1]])
    left = np.column_stack([vid[1:, 0], vid[:-1, 0]])
    boundary_edges = np.concatenate([bottom, right, top, left]).astype(np.int64)

    return Mesh(vertices=vertices, triangles=triangles, boundary_edges=boundary_edges)


def tag_boundary(mesh: Mesh, spec: BoundarySpec) -> Mesh:
    """Assign one mechanics tag and one flow tag to every boundary edge.

    ``spec`` maps each tag to a predicate on edge midpoints. Every edge must
    match exactly one tag of each pair, otherwise ``ValueError`` is raised.
    """
    mid = mesh.edge_midpoints()
    x, y = mid[:, 0], mid[:, 1]
    result = {}
    for name, pair in (("u_tags", U_TAGS), ("p_tags", P_TAGS)):
        tags = np.zeros(len(mid), dtype=np.int64)
        hits = np.zeros(len(mid), dtype=np.int64)
        for tag in pair:
            if tag not in spec:
                continue
            sel = np.broadcast_to(np.asarray(spec[tag](x, y), dtype=bool), x.shape)
            tags[sel] = int(tag)
            hits += sel
        if np.any(hits == 0):
            bad = mid[hits == 0][0]
            raise ValueError(f"boundary edge with midpoint {tuple(bad)} has no {pair[0].name}/{pair[1].name} tag")
        if np.any(hits > 1):
            bad = mid[hits > 1][0]
            raise ValueError(f"boundary edge with midpoint {tuple(bad)} matches both {pair[0].name} and {pair[1].name}")
        result[name] = tags
    return replace(mesh, **result)


def on_line(coord: int, value: float, tol: float = _MIDPOINT_TOL):
    """Predicate selecting midpoints with ``x`` (coord=0) or ``y`` (coord=1) equal to ``value``."""

    def pred(x, y):
        return np.abs((x, y)[coord] - value) <= tol

    return pred


def right_side_spec(x_right: float = 1.0) -> dict:
    """Traction-free and no-flux on ``x = x_right``, homogeneous Dirichlet elsewhere."""
    right = on_line(0, x_right)

    def rest(x, y):
        return ~right(x, y)

    return {
        BoundaryTag.TRACTION_FREE: right,
        BoundaryTag.NO_FLUX: right,
        BoundaryTag.DIRICHLET_U: rest,
        BoundaryTag.DIRICHLET_P: rest,
    }


def all_dirichlet_spec() -> dict:
    def everywhere(x, y):
        return np.ones_like(x, dtype=bool)

    return {BoundaryTag.DIRICHLET_U: everywhere, BoundaryTag.DIRICHLET_P: everywhere}
