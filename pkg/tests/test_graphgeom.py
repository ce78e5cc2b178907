import numpy as np
import pytest
from numpy.testing import assert_allclose

from mgcf.utils.errors import ParameterError
from mgcf.utils.graphgeom import (
    DomainDescriptor,
    GraphState,
    cap_derivatives,
    cap_profile,
    convexity_matrix,
    discrete_derivatives,
    gamma_inverse,
    gamma_matrix,
    grid_geometry,
    hyperbolic_shape,
    lifted_cap_profile,
    radial_curvatures,
    validate_state,
)
from mgcf.utils.symfunc import CurvatureFunctionSpec, eval_f


def test_domain_validation():
    with pytest.raises(ParameterError):
        DomainDescriptor("interval", n=2, extent=1.0, node_count=32)
    with pytest.raises(ParameterError):
        DomainDescriptor("ball", n=2, extent=1.0, node_count=8)
    with pytest.raises(ParameterError):
        DomainDescriptor("annulus", n=2, extent=1.0, node_count=32)


def test_domain_masks():
    ball = DomainDescriptor("ball", n=2, extent=1.0, node_count=32)
    assert ball.boundary_index.tolist() == [31]
    assert ball.adjacent_index.tolist() == [30]
    assert ball.h == pytest.approx(1 / 31)
    assert ball.deep_interior_mask.sum() == 30
    interval = DomainDescriptor("interval", n=1, extent=2.0, node_count=33)
    assert interval.boundary_index.tolist() == [0, 32]
    assert interval.h == pytest.approx(4 / 32)
    assert interval.interior_mask.sum() == 31


def test_validate_state():
    domain = DomainDescriptor("ball", n=2, extent=1.0, node_count=32)
    u = np.full(32, 0.5)
    u[-1] = 0.01
    validate_state(GraphState(u=u, epsilon=0.01), domain)
    with pytest.raises(ParameterError):
        validate_state(GraphState(u=u, epsilon=0.02), domain)
    with pytest.raises(ParameterError):
        validate_state(GraphState(u=u[:-1], epsilon=0.01), domain)


@pytest.mark.parametrize("kind,n", [("ball", 2), ("interval", 1)])
def test_constant_has_zero_derivatives(kind, n):
    domain = DomainDescriptor(kind, n=n, extent=1.0, node_count=40)
    du, d2u = discrete_derivatives(np.full(40, 0.3), domain)
    assert_allclose(du, 0.0, atol=1e-12)
    assert_allclose(d2u, 0.0, atol=1e-10)


def test_quadratic_is_exact_on_interval():
    domain = DomainDescriptor("interval", n=1, extent=1.0, node_count=41)
    x = domain.nodes
    du, d2u = discrete_derivatives(1.0 + 0.3 * x ** 2, domain)
    assert_allclose(d2u, 0.6, atol=1e-9)
    assert_allclose(du, 0.6 * x, atol=1e-10)


def test_cap_second_derivative_order():
    errors, hs = [], []
    for nodes in (100, 200, 400):
        domain = DomainDescriptor("ball", n=2, extent=1.0, node_count=nodes)
        r = domain.nodes
        _, d2u = discrete_derivatives(cap_profile(1.0, 0.6, r), domain)
        _, _, exact = cap_derivatives(1.0, 0.6, r)
        interior = domain.interior_mask
        errors.append(np.max(np.abs(d2u[interior] - exact[interior])))
        hs.append(domain.h)
    order = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    assert order >= 1.9


def test_gamma_matrix():
    assert_allclose(gamma_matrix(np.zeros(3)), np.eye(3))
    assert gamma_matrix([0.75])[0, 0] == pytest.approx(0.8)
    rng = np.random.default_rng(5)
    for _ in range(20):
        Du = rng.normal(size=3)
        g = gamma_matrix(Du)
        metric = np.eye(3) + np.outer(Du, Du)
        assert_allclose(g @ metric @ g, np.eye(3), atol=1e-12)
        assert_allclose(gamma_inverse(Du) @ gamma_inverse(Du), metric, atol=1e-12)
        assert_allclose(gamma_inverse(Du) @ g, np.eye(3), atol=1e-12)


def test_hyperbolic_shape_horosphere():
    shape = hyperbolic_shape(0.7, np.zeros(2), np.zeros((2, 2)))
    assert_allclose(shape.A, np.eye(2))
    assert_allclose(shape.kappa, [1.0, 1.0])
    assert shape.nu_upper == 1.0


def test_hyperbolic_shape_cap_center():
    shape = hyperbolic_shape(0.5, [0.0], [[-0.8]])
    assert shape.kappa[0] == pytest.approx(0.6)
    _, min_eig = convexity_matrix(0.5, [0.0], [[-0.8]])
    assert min_eig == pytest.approx(0.6)


def test_hyperbolic_shape_identities():
    rng = np.random.default_rng(7)
    for _ in range(50):
        u = rng.uniform(0.1, 2.0)
        Du = rng.normal(size=3)
        B = rng.normal(size=(3, 3))
        D2u = B + B.T
        shape = hyperbolic_shape(u, Du, D2u)
        assert_allclose(shape.A, np.eye(3) / shape.w + u * shape.A_tilde, atol=1e-14)
        tilde = np.sort(np.linalg.eigvalsh(shape.A_tilde))[::-1]
        assert_allclose(shape.kappa, u * tilde + 1.0 / shape.w, atol=1e-12)
        assert shape.w * shape.nu_upper == pytest.approx(1.0)


def test_hyperbolic_shape_rejects_nonpositive_height():
    with pytest.raises(ParameterError):
        hyperbolic_shape(0.0, [0.0], [[0.0]])


def test_convexity_sign_matches_curvature_sign():
    rng = np.random.default_rng(13)
    checked = 0
    for _ in range(1000):
        u = rng.uniform(0.05, 2.0)
        Du = rng.normal(size=2)
        B = rng.normal(size=(2, 2))
        D2u = B + B.T
        _, m = convexity_matrix(u, Du, D2u)
        k = hyperbolic_shape(u, Du, D2u).kappa[-1]
        if abs(m) < 1e-9 or abs(k) < 1e-9:
            continue
        assert np.sign(m) == np.sign(k)
        checked += 1
    assert checked > 900


def test_convexity_matrix_examples():
    assert convexity_matrix(0.4, np.zeros(2), np.zeros((2, 2)))[1] == pytest.approx(1.0)
    assert convexity_matrix(1.0, np.zeros(2), -4.0 * np.eye(2))[1] == pytest.approx(-3.0)


def test_radial_curvatures_on_cap():
    u, du, d2u = cap_derivatives(1.0, 0.6, 0.5)
    k_rad, k_ang, _, _ = radial_curvatures(u, du, d2u, 0.5, 2)
    assert k_rad == pytest.approx(0.6, abs=1e-12)
    assert k_ang == pytest.approx(0.6, abs=1e-12)
    k_rad, k_ang, nu, w = radial_curvatures(0.3, 0.0, 0.0, 0.4, 3)
    assert (k_rad, k_ang, nu, w) == (1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        radial_curvatures(u, du, d2u, -0.1, 2)


def test_radial_curvatures_axis_limit():
    u, du, d2u = cap_derivatives(1.0, 0.7, 0.0)
    k_rad, k_ang, _, _ = radial_curvatures(u, du, d2u, 0.0, 2)
    assert abs(k_rad - k_ang) <= 1e-10


@pytest.mark.parametrize("epsilon", [0.0, 1e-3, 5e-2])
def test_cap_is_umbilic(epsilon):
    r = np.linspace(0.0, 1.0, 201)
    u, du, d2u = cap_derivatives(1.0, 0.6, r, epsilon=epsilon)
    assert u[-1] == pytest.approx(epsilon, abs=1e-14)
    k_rad, k_ang, _, _ = radial_curvatures(u, du, d2u, r, 2)
    assert np.max(np.abs(k_rad - 0.6)) <= 1e-10
    assert np.max(np.abs(k_ang - 0.6)) <= 1e-10


def test_cap_profile_examples():
    assert cap_profile(1.0, 0.6, 0.0) == pytest.approx(0.5)
    assert cap_profile(1.0, 0.6, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert lifted_cap_profile(1.0, 0.6, 1e-3, 1.0) == pytest.approx(1e-3)
    _, du, _ = cap_derivatives(1.0, 0.6, 1.0)
    assert 1.0 / np.sqrt(1.0 + du ** 2) == pytest.approx(0.6)
    with pytest.raises(ParameterError):
        cap_profile(1.0, 1.2, 0.0)
    with pytest.raises(ParameterError):
        cap_profile(1.0, 0.6, 1.5)


def test_grid_geometry_on_horosphere():
    domain = DomainDescriptor("ball", n=3, extent=1.0, node_count=32)
    geometry = grid_geometry(np.full(32, 0.25), domain)
    assert geometry.kappa.shape == (32, 3)
    assert_allclose(geometry.kappa, 1.0, atol=1e-10)
    assert_allclose(geometry.conv_min_eig, 1.0, atol=1e-10)
    assert_allclose(geometry.nu, 1.0)


@pytest.mark.parametrize(
    "spec",
    [CurvatureFunctionSpec("mean", 2), CurvatureFunctionSpec("gauss", 2), CurvatureFunctionSpec("quotient", 2, 1)],
    ids=lambda s: s.label,
)
def test_discrete_cap_flatness_is_second_order(spec):
    hs, kappa_errors, f_errors = [], [], []
    for nodes in (100, 200, 400):
        domain = DomainDescriptor("ball", n=2, extent=1.0, node_count=nodes)
        u = lifted_cap_profile(1.0, 0.6, 1e-3, domain.nodes)
        kappa = grid_geometry(u, domain).kappa[domain.interior_mask]
        hs.append(domain.h)
        kappa_errors.append(np.max(np.abs(kappa - 0.6)))
        f_errors.append(np.max(np.abs(eval_f(spec, kappa) - 0.6)))
    assert np.polyfit(np.log(hs), np.log(kappa_errors), 1)[0] >= 1.9
    assert np.polyfit(np.log(hs), np.log(f_errors), 1)[0] >= 1.9
