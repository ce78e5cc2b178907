import numpy as np
import pytest
from numpy.testing import assert_allclose

from mgcf.utils.graphgeom import hyperbolic_shape
from mgcf.utils.linearization import G_value, linearized_coefficients_at, linearized_identity_residuals
from mgcf.utils.symfunc import CurvatureFunctionSpec, F_matrix_derivative, eval_f

GAUSS = CurvatureFunctionSpec("gauss", 2)
U = 0.7
DU = np.array([0.3, -0.2])
D2U = np.array([[0.4, 0.1], [0.1, 0.2]])
UT = 0.05


def test_G_t_at_horizontal_point():
    coeffs = linearized_coefficients_at(GAUSS, 0.5, np.zeros(2), np.zeros((2, 2)), 0.1)
    assert coeffs.G_t == pytest.approx(2.0)


def test_G_kl_on_horosphere():
    c = 0.4
    coeffs = linearized_coefficients_at(GAUSS, c, np.zeros(2), np.zeros((2, 2)), 0.0)
    assert_allclose(coeffs.G_kl, -(c / 2) * np.eye(2), atol=1e-14)


def test_G_kl_matches_finite_differences():
    coeffs = linearized_coefficients_at(GAUSS, U, DU, D2U, UT)
    step = 1e-6
    expected = np.empty((2, 2))
    for k in range(2):
        for l in range(2):
            E = np.zeros((2, 2))
            E[k, l] = E[l, k] = step
            scale = 2 * step if k == l else 4 * step
            expected[k, l] = (G_value(GAUSS, U, DU, D2U + E, UT) - G_value(GAUSS, U, DU, D2U - E, UT)) / scale
    assert_allclose(coeffs.G_kl, expected, atol=1e-8)


def test_G_s_and_G_u_match_finite_differences():
    coeffs = linearized_coefficients_at(GAUSS, U, DU, D2U, UT)
    step = 1e-6
    for s in range(2):
        e = np.zeros(2)
        e[s] = step
        fd = (G_value(GAUSS, U, DU + e, D2U, UT) - G_value(GAUSS, U, DU - e, D2U, UT)) / (2 * step)
        assert coeffs.G_s[s] == pytest.approx(fd, abs=1e-8)
    fd_u = (G_value(GAUSS, U + step, DU, D2U, UT) - G_value(GAUSS, U - step, DU, D2U, UT)) / (2 * step)
    assert coeffs.G_u == pytest.approx(fd_u, abs=1e-8)


def test_G_u_on_solutions():
    sigma = 0.6
    shape = hyperbolic_shape(U, DU, D2U)
    F = float(eval_f(GAUSS, shape.kappa))
    trace = float(np.trace(F_matrix_derivative(GAUSS, shape.A)))
    u_t = (F - sigma) * U * shape.w
    coeffs = linearized_coefficients_at(GAUSS, U, DU, D2U, u_t)
    expected = -2 * F / U + sigma / U + trace / (shape.w * U)
    assert coeffs.G_u == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "spec",
    [CurvatureFunctionSpec("gauss", 2), CurvatureFunctionSpec("mean", 2), CurvatureFunctionSpec("quotient", 2, 1)],
    ids=lambda s: s.label,
)
def test_identity_residuals_vanish(spec):
    rng = np.random.default_rng(17)
    for _ in range(20):
        Du = rng.normal(scale=0.5, size=2)
        B = rng.uniform(0.1, 0.5, size=(2, 2))
        D2u = B @ B.T
        trace, drift = linearized_identity_residuals(spec, 0.6, rng.uniform(0.2, 1.5), Du, D2u)
        assert trace <= 1e-10
        assert drift <= 1e-10
