import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biot.fem import FunctionSpace, error_norm
from biot.mesh import build_rect_mesh
from biot.problem import BiotParameters, ManufacturedCase, WellCase, eval_exact, eval_sources, initial_total_pressure

LAM, MU, ALPHA, C0, KP = 1e2, 1e2, 1.0, 1e-2, 1e-2


# independent transcription of the exact fields
def u_ex(x, y, t):
    b = -x * y * (x - 1) ** 2 * (y - 1)
    return np.array([b * np.sin(np.pi * x * t) * np.cos(np.pi * y * t), b * np.sin(np.pi * y * t) * np.cos(np.pi * x * t)])


def p_ex(x, y, t):
    return -x * y * (x - 1) ** 2 * (y - 1) * np.cos(t + x - y)


H = 3e-3
W6 = (-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60)


def d(f, axis, h=H):
    """Sixth-order central difference of f(x, y, t) along axis 0, 1 or 2.

    Nested up to three times, so the step stays large enough to keep roundoff below 1e-9.
    """

    def g(x, y, t):
        e = [0.0, 0.0, 0.0]
        e[axis] = h
        at = lambda s: f(x + s * e[0], y + s * e[1], t + s * e[2])  # noqa: E731
        return sum(w * at(k - 3) for k, w in enumerate(W6) if w) / h

    return g


def div_u(x, y, t):
    return d(lambda *a: u_ex(*a)[0], 0)(x, y, t) + d(lambda *a: u_ex(*a)[1], 1)(x, y, t)


def xi_ex(x, y, t):
    return ALPHA * p_ex(x, y, t) - LAM * div_u(x, y, t)


def sigma(i, j):
    def s(x, y, t):
        ui = lambda *a: u_ex(*a)[i]  # noqa: E731
        uj = lambda *a: u_ex(*a)[j]  # noqa: E731
        val = MU * (d(ui, j)(x, y, t) + d(uj, i)(x, y, t))
        return val - (xi_ex(x, y, t) if i == j else 0.0)

    return s


def momentum_residual(case, x, y, t):
    f, _ = eval_sources(case, x, y, t)
    div_sigma = [d(sigma(i, 0), 0)(x, y, t) + d(sigma(i, 1), 1)(x, y, t) for i in range(2)]
    return np.array([f[0] + div_sigma[0], f[1] + div_sigma[1]])


def mass_residual(case, x, y, t):
    _, g = eval_sources(case, x, y, t)
    storage = C0 + ALPHA**2 / LAM
    lap = d(d(p_ex, 0), 0)(x, y, t) + d(d(p_ex, 1), 1)(x, y, t)
    return g - (storage * d(p_ex, 2)(x, y, t) - ALPHA / LAM * d(xi_ex, 2)(x, y, t) - KP * lap)


@pytest.fixture(scope="module")
def case():
    return ManufacturedCase()


def test_displacement_vanishes_at_t0(case):
    x, y = np.meshgrid(np.linspace(0, 1, 7), np.linspace(0, 1, 5))
    np.testing.assert_array_equal(eval_exact(case, "u", x, y, 0.0), 0)


def test_pressure_center_value(case):
    assert eval_exact(case, "p", 0.5, 0.5, 0.0) == pytest.approx(0.03125, rel=1e-15)


def test_fields_match_independent_transcription(case):
    rng = np.random.default_rng(3)
    x, y, t = rng.uniform(0, 1, (3, 50))
    np.testing.assert_allclose(eval_exact(case, "u", x, y, t), u_ex(x, y, t), atol=1e-15)
    np.testing.assert_allclose(eval_exact(case, "p", x, y, t), p_ex(x, y, t), atol=1e-15)


def test_divergence_against_finite_differences(case):
    x, y, t = 0.3, 0.7, 0.5
    G = eval_exact(case, "grad_u", x, y, t)
    h = 1e-5
    fd = (u_ex(x + h, y, t)[0] - u_ex(x - h, y, t)[0] + u_ex(x, y + h, t)[1] - u_ex(x, y - h, t)[1]) / (2 * h)
    assert G[0, 0] + G[1, 1] == pytest.approx(fd, abs=1e-8)


def test_gradients_against_finite_differences(case):
    rng = np.random.default_rng(8)
    for x, y, t in rng.uniform(0, 1, (10, 3)):
        G = eval_exact(case, "grad_u", x, y, t)
        for i in range(2):
            for j in range(2):
                assert G[i, j] == pytest.approx(d(lambda *a: u_ex(*a)[i], j)(x, y, t), abs=1e-9)
        gp = eval_exact(case, "grad_p", x, y, t)
        assert gp[0] == pytest.approx(d(p_ex, 0)(x, y, t), abs=1e-9)
        assert gp[1] == pytest.approx(d(p_ex, 1)(x, y, t), abs=1e-9)


def test_total_pressure_definition(case):
    rng = np.random.default_rng(9)
    x, y, t = rng.uniform(0, 1, (3, 20))
    np.testing.assert_allclose(eval_exact(case, "xi", x, y, t), xi_ex(x, y, t), atol=1e-8)


def test_sources_satisfy_pde_at_random_points(case):
    rng = np.random.default_rng(2024)
    pts = np.column_stack([rng.uniform(0.05, 0.95, 20), rng.uniform(0.05, 0.95, 20), rng.uniform(0.05, 1.0, 20)])
    worst = 0.0
    for x, y, t in pts:
        worst = max(worst, np.abs(momentum_residual(case, x, y, t)).max(), abs(mass_residual(case, x, y, t)))
    assert worst <= 1e-8


@settings(max_examples=15, deadline=None)
@given(x=st.floats(0.05, 0.95), y=st.floats(0.05, 0.95), t=st.floats(0.05, 1.0))
def test_sources_property(case, x, y, t):
    assert np.abs(momentum_residual(case, x, y, t)).max() <= 1e-8
    assert abs(mass_residual(case, x, y, t)) <= 1e-8


def test_body_force_at_t0(case):
    f, _ = eval_sources(case, 0.5, 0.5, 0.0)
    np.testing.assert_allclose(f, ALPHA * eval_exact(case, "grad_p", 0.5, 0.5, 0.0), atol=1e-14)


def test_unknown_field(case):
    with pytest.raises(ValueError):
        eval_exact(case, "q", 0.0, 0.0, 0.0)


def test_well_source_at_injector():
    g = WellCase().source(0.0)
    assert g(0.25, 0.5) == pytest.approx(1e-2 * (1 - np.exp(-250)), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0, 1), y=st.floats(0, 1))
def test_well_source_antisymmetric(x, y):
    g = WellCase().source(0.0)
    assert abs(g(x, y) + g(1 - x, y)) <= 1e-14


def test_well_source_balanced():
    g = WellCase().source(0.0)
    s = np.linspace(0, 1, 801)
    X, Y = np.meshgrid(s, s)
    assert abs(np.trapezoid(np.trapezoid(g(X, Y), s), s)) < 1e-12


def test_well_permeability_layers():
    c = WellCase()
    assert c.conductivity(0.1, 0.5) == 0.1
    assert c.conductivity(0.1, 0.2) == 1e-5
    assert c.conductivity(0.9, 0.9) == 1e-5


@pytest.mark.parametrize(
    "kw",
    [dict(lam=0, mu=1, alpha=1, c0=0, k_p=1), dict(lam=1, mu=-1, alpha=1, c0=0, k_p=1), dict(lam=1, mu=1, alpha=0, c0=0, k_p=1), dict(lam=1, mu=1, alpha=1, c0=-1, k_p=1), dict(lam=1, mu=1, alpha=1, c0=0, k_p=0)],
)
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        BiotParameters(**kw)


def test_from_young_roundtrip():
    p = BiotParameters.from_young(E=2.5, nu=0.25, alpha=1, c0=0, k_p=1)
    assert p.mu == pytest.approx(1.0)
    assert p.lam == pytest.approx(1.0)


@pytest.fixture(scope="module")
def spaces():
    mesh = build_rect_mesh(4, 4)
    return FunctionSpace(mesh, 2, 1), FunctionSpace(mesh, 1), FunctionSpace(mesh, 2)


def test_initial_total_pressure_zero(spaces):
    V, W, M = spaces
    prm = BiotParameters(LAM, MU, ALPHA, C0, KP)
    np.testing.assert_array_equal(initial_total_pressure(np.zeros(V.dim), np.zeros(M.dim), V, W, M, prm), 0)


def test_initial_total_pressure_unit_divergence(spaces):
    V, W, M = spaces
    prm = BiotParameters(LAM, MU, ALPHA, C0, KP)
    u0 = V.interpolate(lambda x, y: np.array([x, 0 * y]))
    xi0 = initial_total_pressure(u0, np.zeros(M.dim), V, W, M, prm)
    np.testing.assert_allclose(xi0, -100.0, rtol=1e-12)


def test_initial_total_pressure_manufactured(case):
    mesh = build_rect_mesh(8, 8)
    V, W, M = FunctionSpace(mesh, 3, 1), FunctionSpace(mesh, 2), FunctionSpace(mesh, 3)
    u0 = V.interpolate(case.initial_u())
    p0 = M.interpolate(case.initial_p())
    xi0 = initial_total_pressure(u0, p0, V, W, M, case.params)
    err = error_norm(xi0, W, lambda x, y: case.total_pressure(x, y, 0.0), "L2")
    ref = error_norm(W.interpolate(lambda x, y: case.total_pressure(x, y, 0.0)), W, lambda x, y: case.total_pressure(x, y, 0.0), "L2")
    assert err <= 2 * ref
