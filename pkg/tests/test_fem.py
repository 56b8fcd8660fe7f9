from math import factorial

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from biot.fem import (
    FunctionSpace,
    apply_dirichlet,
    assemble_form,
    assemble_load,
    error_norm,
    lagrange_basis,
    mass_matrix,
    reference_element,
    stiffness_matrix,
    triangle_rule,
)
from biot.fem.assembly import DirichletSystem, assemble_boundary_load
from biot.mesh import BoundaryTag, Mesh, all_dirichlet_spec, build_rect_mesh, right_side_spec, tag_boundary
from biot.problem import BiotParameters, ManufacturedCase

BACKENDS = ["numpy", "numba"]


def monomial_integral(a, b):
    return factorial(a) * factorial(b) / factorial(a + b + 2)


# -- quadrature ---------------------------------------------------------------


@pytest.mark.parametrize("deg", range(0, 17))
def test_triangle_rule_exactness(deg):
    rule = triangle_rule(deg)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(0.5, rel=1e-14)
    x, y = rule.points.T
    for a in range(deg + 1):
        for b in range(deg + 1 - a):
            exact = monomial_integral(a, b)
            assert np.dot(rule.weights, x**a * y**b) == pytest.approx(exact, rel=1e-13)


def test_triangle_rule_points_inside():
    p = triangle_rule(12).points
    assert np.all(p > 0) and np.all(p.sum(axis=1) < 1)


def test_triangle_rule_rejects_degree():
    with pytest.raises(ValueError):
        triangle_rule(-1)


# -- reference elements ------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_delta_property(k):
    el = reference_element(k)
    vals, _ = el.tabulate(el.nodes)
    np.testing.assert_allclose(vals, np.eye(el.size), atol=1e-13)
    assert el.size == (k + 1) * (k + 2) // 2


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 4), s=st.floats(0, 1), r=st.floats(0, 1))
def test_partition_of_unity(k, s, r):
    pt = (s, (1 - s) * r)
    vals, grads = lagrange_basis(k, pt)
    assert vals.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(grads.sum(axis=0), 0.0, atol=1e-11)


def test_vertex_node_is_unit_vector():
    vals, _ = lagrange_basis(2, (1.0, 0.0))
    assert np.count_nonzero(np.abs(vals) > 1e-13) == 1
    assert vals.max() == pytest.approx(1.0)


def test_centroid_sums_to_one_p4():
    vals, _ = lagrange_basis(4, (1 / 3, 1 / 3))
    assert vals.sum() == pytest.approx(1.0, abs=1e-13)


def test_gradients_sum_to_zero_p3():
    rng = np.random.default_rng(3)
    s, r = rng.random(2)
    _, grads = lagrange_basis(3, (s, (1 - s) * r))
    np.testing.assert_allclose(grads.sum(axis=0), 0.0, atol=1e-13)


@pytest.mark.parametrize("k", [0, 5])
def test_degree_out_of_range(k):
    with pytest.raises(ValueError):
        lagrange_basis(k, (0.2, 0.2))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_gradients_match_finite_differences(k):
    el = reference_element(k)
    p = np.array([[0.21, 0.33]])
    h = 1e-6
    _, g = el.tabulate(p)
    fx = (el.tabulate(p + [h, 0])[0] - el.tabulate(p - [h, 0])[0]) / (2 * h)
    fy = (el.tabulate(p + [0, h])[0] - el.tabulate(p - [0, h])[0]) / (2 * h)
    np.testing.assert_allclose(g[0, :, 0], fx[0], atol=1e-7)
    np.testing.assert_allclose(g[0, :, 1], fy[0], atol=1e-7)


# -- function spaces ---------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_dof_counts(k):
    n = 5
    V = FunctionSpace(build_rect_mesh(n, n), k)
    assert V.dim == (k * n + 1) ** 2
    assert sorted(np.unique(V.cell_dofs)) == list(range(V.dim))
    W = FunctionSpace(build_rect_mesh(n, n), k, rank=1)
    assert W.dim == 2 * V.dim


@pytest.mark.parametrize("k", [2, 4])
def test_c0_continuity(k):
    """Nodes shared by neighbours get one global number: coordinates are unique per dof."""
    V = FunctionSpace(build_rect_mesh(3, 2), k)
    coords = np.round(V.node_coords, 12)
    assert len(np.unique(coords, axis=0)) == V.num_nodes
    # each cell's node coordinates equal the mapped reference nodes
    mapped = V.geometry.map_points(V.element.nodes)
    np.testing.assert_allclose(V.node_coords[V.cell_nodes], mapped, atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_interpolation_reproduces_polynomials(k):
    V = FunctionSpace(build_rect_mesh(3, 3), k)
    c = 1.0 if k > 1 else 0.0  # cross term x*y only from P2 on
    poly = lambda x, y: (1 + x) ** k - 2 * y**k + c * x * y  # noqa: E731
    grad = lambda x, y: np.array([k * (1 + x) ** (k - 1) + c * y, -2 * k * y ** (k - 1) + c * x])  # noqa: E731
    u = V.interpolate(poly)
    assert error_norm(u, V, poly, "L2") <= 1e-12
    assert error_norm(u, V, grad, "H1semi") <= 1e-11


def test_error_norm_of_itself_is_zero():
    V = FunctionSpace(build_rect_mesh(4, 4), 3)
    u = np.random.default_rng(0).random(V.dim)
    ref = triangle_rule(10).points

    def exact(x, y):
        # evaluate u_h at the quadrature points by reusing the same map
        vals, _ = V.cell_values(u, ref)
        return vals

    assert error_norm(u, V, exact, "L2", degree=10) <= 1e-13


def test_interpolation_order_p2():
    f = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)  # noqa: E731
    errs = []
    for n in (8, 16):
        V = FunctionSpace(build_rect_mesh(n, n), 2)
        errs.append(error_norm(V.interpolate(f), V, f, "L2"))
    assert errs[0] / errs[1] == pytest.approx(8.0, rel=0.1)


def test_boundary_dofs_right_side():
    mesh = tag_boundary(build_rect_mesh(4, 4), right_side_spec())
    V = FunctionSpace(mesh, 3)
    nodes = V.boundary_nodes(BoundaryTag.NO_FLUX)
    np.testing.assert_allclose(V.node_coords[nodes, 0], 1.0)
    assert len(nodes) == 3 * 4 + 1
    d = V.dirichlet_dofs
    c = V.node_coords[d]
    on = np.isclose(c[:, 0], 0) | np.isclose(c[:, 1], 0) | np.isclose(c[:, 1], 1)
    assert np.all(on)
    assert len(d) == 3 * 4 * 3 + 1


# -- forms --------------------------------------------------------------------------


def unit_spaces(n=4, k=2, l=2):
    mesh = build_rect_mesh(n, n)
    return FunctionSpace(mesh, k, rank=1), FunctionSpace(mesh, k - 1), FunctionSpace(mesh, l)


PARAMS = BiotParameters(lam=1.0, mu=1.0, alpha=1.0, c0=0.0, k_p=1.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_a2_ones(backend):
    _, W, _ = unit_spaces()
    A = assemble_form("a2", W, W, PARAMS, backend)
    one = np.ones(W.dim)
    assert one @ A @ one == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_d_linear(backend):
    _, _, M = unit_spaces()
    D = assemble_form("d", M, M, PARAMS, backend)
    p = M.interpolate(lambda x, y: x)
    assert p @ D @ p == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_b_divergence(backend):
    V, W, _ = unit_spaces()
    B = assemble_form("b", V, W, PARAMS, backend)
    u = V.interpolate(lambda x, y: np.array([x, 0 * y]))
    assert np.ones(W.dim) @ B @ u == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_c_constant(backend):
    _, W, M = unit_spaces()
    prm = BiotParameters(lam=100.0, mu=1.0, alpha=1.0, c0=0.0, k_p=1.0)
    C = assemble_form("c", M, W, prm, backend)
    assert np.ones(W.dim) @ C @ np.ones(M.dim) == pytest.approx(0.01, rel=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_a1_strain_energy(backend):
    """u = (x y, x^2): eps = [[y, 1.5 x], [1.5 x, 0]], so 2 mu int eps:eps = 2 mu (1/3 + 4.5/3)."""
    V, _, _ = unit_spaces(3, 2)
    prm = BiotParameters(lam=1.0, mu=1.5, alpha=1.0, c0=0.0, k_p=1.0)
    A1 = assemble_form("a1", V, V, prm, backend)
    u = V.interpolate(lambda x, y: np.array([x * y, x**2]))
    assert u @ A1 @ u == pytest.approx(2 * 1.5 * (1 / 3 + 1.5), rel=1e-12)
    # rigid motions lie in the kernel
    r = V.interpolate(lambda x, y: np.array([-y + 2, x - 1]))
    assert np.linalg.norm(A1 @ r) <= 1e-11


@pytest.mark.parametrize("backend", BACKENDS)
def test_symmetry_and_definiteness(backend):
    V, W, M = unit_spaces(3, 3, 2)
    prm = BiotParameters(lam=7.0, mu=2.0, alpha=0.8, c0=0.1, k_p=lambda x, y: 1 + x)
    rng = np.random.default_rng(1)
    for form, sp_ in (("a1", V), ("a2", W), ("a3", M), ("d", M)):
        A = assemble_form(form, sp_, sp_, prm, backend)
        assert abs(A - A.T).max() <= 1e-12 * abs(A).max()
        for _ in range(5):
            x = rng.standard_normal(sp_.dim)
            q = x @ A @ x
            assert q > 0 if form in ("a2", "a3") else q >= -1e-12


def test_backends_agree():
    V, W, M = unit_spaces(3, 4, 4)
    prm = BiotParameters(lam=3.0, mu=2.0, alpha=0.7, c0=0.2, k_p=0.5)
    pairs = {"a1": (V, V), "b": (V, W), "a2": (W, W), "c": (M, W), "a3": (M, M), "d": (M, M)}
    for form, (tr, te) in pairs.items():
        A = assemble_form(form, tr, te, prm, "numpy")
        B = assemble_form(form, tr, te, prm, "numba")
        assert abs(A - B).max() <= 1e-13 * abs(A).max()


def test_assembly_independent_of_cell_order():
    mesh = build_rect_mesh(3, 3)
    perm = np.random.default_rng(5).permutation(mesh.num_cells)
    shuffled = Mesh(mesh.vertices.copy(), mesh.triangles[perm].copy(), mesh.boundary_edges.copy())
    prm = BiotParameters(lam=3.0, mu=2.0, alpha=0.7, c0=0.2, k_p=0.5)
    for k in (2, 3):
        V1, V2 = FunctionSpace(mesh, k, 1), FunctionSpace(shuffled, k, 1)
        A = assemble_form("a1", V1, V1, prm)
        B = assemble_form("a1", V2, V2, prm)
        assert abs(A - B).max() <= 1e-14 * abs(A).max()


def test_mismatched_meshes_rejected():
    V = FunctionSpace(build_rect_mesh(2, 2), 2, rank=1)
    W = FunctionSpace(build_rect_mesh(3, 3), 1)
    with pytest.raises(ValueError):
        assemble_form("b", V, W, PARAMS)


def test_wrong_signature_rejected():
    _, W, M = unit_spaces()
    with pytest.raises(ValueError):
        assemble_form("a1", W, W, PARAMS)
    with pytest.raises(ValueError):
        assemble_form("q", M, M, PARAMS)


def test_piecewise_conductivity_resolved_per_cell():
    mesh = build_rect_mesh(32, 32)
    M = FunctionSpace(mesh, 1)
    kp = lambda x, y: np.where((y >= 0.375) & (y <= 0.625), 0.1, 1e-5)  # noqa: E731
    prm = BiotParameters(lam=1.0, mu=1.0, alpha=1.0, c0=0.0, k_p=kp)
    D = assemble_form("d", M, M, prm)
    p = M.interpolate(lambda x, y: x)
    assert p @ D @ p == pytest.approx(0.1 * 0.25 + 1e-5 * 0.75, rel=1e-12)


# -- loads --------------------------------------------------------------------------


@pytest.mark.parametrize("backend", BACKENDS)
def test_load_of_one(backend):
    M = FunctionSpace(build_rect_mesh(4, 4), 1)
    b = assemble_load(lambda x, y: np.ones_like(x), M, backend=backend)
    assert b.sum() == pytest.approx(1.0, rel=1e-14)
    assert not np.any(assemble_load(lambda x, y: np.zeros_like(x), M, backend=backend))


@pytest.mark.parametrize("backend", BACKENDS)
def test_body_force_load_matches_high_order_oracle(backend):
    case = ManufacturedCase()
    V = FunctionSpace(build_rect_mesh(4, 4), 4, rank=1)
    f = case.body_force(1.0)
    b = assemble_load(f, V, backend=backend)
    # oracle: direct per-element loop with the same degree-12 rule
    rule = triangle_rule(12)
    vals, _ = V.element.tabulate(rule.points)
    geo = V.geometry
    ref = np.zeros(V.dim)
    for e in range(V.mesh.num_cells):
        x = geo.map_points(rule.points)[e]
        fq = f(x[:, 0], x[:, 1])
        for c in range(2):
            loc = vals.T @ (rule.weights * fq[c]) * geo.detJ[e]
            np.add.at(ref, 2 * V.cell_nodes[e] + c, loc)
    np.testing.assert_allclose(b, ref, rtol=0, atol=1e-10 * np.abs(ref).max())


def test_load_quadrature_error_decays():
    f = ManufacturedCase().body_force(1.0)
    gaps = []
    for n in (4, 8):
        V = FunctionSpace(build_rect_mesh(n, n), 4, rank=1)
        gaps.append(np.abs(assemble_load(f, V) - assemble_load(f, V, degree=24)).max())
    assert gaps[1] < gaps[0] / 100


def test_boundary_load_constant_traction():
    mesh = tag_boundary(build_rect_mesh(3, 3), right_side_spec())
    V = FunctionSpace(mesh, 2, rank=1)
    F = assemble_boundary_load(lambda x, y, nx, ny: np.array([nx, 3 * ny]), V, BoundaryTag.TRACTION_FREE)
    # outward normal on x = 1 is (1, 0): integral of (1, 0) over a unit edge
    assert F[0::2].sum() == pytest.approx(1.0, rel=1e-13)
    assert abs(F[1::2].sum()) <= 1e-14


# -- Dirichlet --------------------------------------------------------------------------


def poisson(n, k):
    mesh = tag_boundary(build_rect_mesh(n, n), all_dirichlet_spec())
    M = FunctionSpace(mesh, k)
    return M, stiffness_matrix(M)


def test_homogeneous_constraints_have_no_lifting():
    M, K = poisson(4, 2)
    b = np.random.default_rng(0).random(M.dim)
    sys_ = DirichletSystem(K, M.dirichlet_dofs)
    out = sys_.rhs(b)
    free = np.setdiff1d(np.arange(M.dim), M.dirichlet_dofs)
    np.testing.assert_array_equal(out[free], b[free])
    assert not np.any(out[M.dirichlet_dofs])


def test_all_constrained_gives_zero():
    M, K = poisson(3, 1)
    A, b = apply_dirichlet(K, np.ones(M.dim), np.arange(M.dim))
    assert np.allclose(spla.spsolve(A.tocsc(), b), 0.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_linear_solution_reproduced(k):
    M, K = poisson(4, k)
    exact = lambda x, y: 1 + 2 * x - 3 * y  # noqa: E731
    vals = M.interpolate(exact)[M.dirichlet_dofs]
    A, b = apply_dirichlet(K, np.zeros(M.dim), M.dirichlet_dofs, vals)
    assert abs(A - A.T).max() <= 1e-14 * abs(A).max()
    u = spla.spsolve(A.tocsc(), b)
    np.testing.assert_allclose(u, M.interpolate(exact), atol=1e-12)


def test_constraint_on_missing_dof():
    M, K = poisson(2, 1)
    with pytest.raises(IndexError):
        DirichletSystem(K, [M.dim + 3])


def test_mass_matrix_componentwise():
    V = FunctionSpace(build_rect_mesh(2, 2), 2, rank=1)
    Mv = mass_matrix(V)
    u = V.interpolate(lambda x, y: np.array([np.ones_like(x), 2 * np.ones_like(x)]))
    assert u @ Mv @ u == pytest.approx(5.0, rel=1e-13)
    assert sp.issparse(Mv)
