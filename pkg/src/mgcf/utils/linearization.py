"""Linearization of G(D2u, Du, u, u_t) = u_t / (u w) - F(A[u]).

The coefficients feed the linearized identity checks
G^{kl} u_kl = -F + (1/w) Sum F^{ii} and the closed form of G^s u_s. Step
control in ``flow`` does not use them; it reads Sum F^{ii} directly.
"""

from __future__ import annotations

from typing import NamedTuple, Tuple

import numpy as np

from .graphgeom import gamma_matrix, hyperbolic_shape
from .symfunc import CurvatureFunctionSpec, F_matrix_derivative, eval_f


class LinearizedCoefficients(NamedTuple):
    G_kl: np.ndarray
    G_s: np.ndarray
    G_u: float
    G_t: float


def G_value(spec: CurvatureFunctionSpec, u: float, Du: np.ndarray, D2u: np.ndarray, u_t: float) -> float:
    shape = hyperbolic_shape(u, Du, D2u)
    return u_t / (u * shape.w) - float(eval_f(spec, shape.kappa))


def _dgamma(Du: np.ndarray, s: int) -> np.ndarray:
    """Partial derivative of gamma^{ij} with respect to u_s."""
    n = Du.size
    w = np.sqrt(1.0 + Du @ Du)
    e_s = np.zeros(n)
    e_s[s] = 1.0
    outer = np.outer(Du, Du)
    d_outer = np.outer(e_s, Du) + np.outer(Du, e_s)
    c = 1.0 / (w * (1.0 + w))
    dc = -(Du[s] / w) * (1.0 + 2.0 * w) / (w * (1.0 + w)) ** 2
    return -(d_outer * c + outer * dc)


def linearized_coefficients_at(
    spec: CurvatureFunctionSpec,
    u: float,
    Du: np.ndarray,
    D2u: np.ndarray,
    u_t: float,
) -> LinearizedCoefficients:
    """
    Partial derivatives of G at one point.

    G^{kl} = -(u/w) F^{ij} gamma^{ik} gamma^{lj}, G_t = 1/(u w),
    G_u = -u_t/(w u^2) - (1/w) F^{ij} gamma^{ik} u_kl gamma^{lj}, and
    G^s = -u_t u_s/(u w^3) + (u_s/w^2) F - (2u/w) F^{ij} (d_s gamma D2u gamma)_ij.
    On solutions (u_t = (F - sigma) u w) G_u reduces to
    -2F/u + sigma/u + Sum F^{ii} / (w u).
    """
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    D2u = np.atleast_2d(np.asarray(D2u, dtype=float))
    shape = hyperbolic_shape(u, Du, D2u)
    w = shape.w
    F = float(eval_f(spec, shape.kappa))
    Fij = F_matrix_derivative(spec, shape.A)
    gamma = gamma_matrix(Du)

    G_kl = -(u / w) * (gamma @ Fij @ gamma)
    G_kl = 0.5 * (G_kl + G_kl.T)
    G_t = 1.0 / (u * w)
    G_u = -u_t / (w * u ** 2) - float(np.sum(Fij * (gamma @ D2u @ gamma))) / w

    G_s = np.empty(Du.size)
    for s in range(Du.size):
        X = _dgamma(Du, s) @ D2u @ gamma
        G_s[s] = (
            -u_t * Du[s] / (u * w ** 3)
            + Du[s] * F / w ** 2
            - (2.0 * u / w) * float(np.sum(Fij * X))
        )
    return LinearizedCoefficients(G_kl=G_kl, G_s=G_s, G_u=G_u, G_t=G_t)


def linearized_identity_residuals(
    spec: CurvatureFunctionSpec,
    sigma: float,
    u: float,
    Du: np.ndarray,
    D2u: np.ndarray,
) -> Tuple[float, float]:
    """
    Residuals of G^{kl} u_kl = -F + (1/w) Sum F^{ii} and of
    G^s u_s = ((w^2 - 1)/w^2) sigma + (2/w^2) F^{ij} a_ik u_k u_j - (2/w^3) F^{ij} u_i u_j,
    both evaluated with u_t = (F - sigma) u w.
    """
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    D2u = np.atleast_2d(np.asarray(D2u, dtype=float))
    shape = hyperbolic_shape(u, Du, D2u)
    w = shape.w
    F = float(eval_f(spec, shape.kappa))
    Fij = F_matrix_derivative(spec, shape.A)
    u_t = (F - sigma) * u * w
    coeffs = linearized_coefficients_at(spec, u, Du, D2u, u_t)

    trace_lhs = float(np.sum(coeffs.G_kl * D2u))
    trace_rhs = -F + float(np.trace(Fij)) / w
    drift_lhs = float(coeffs.G_s @ Du)
    drift_rhs = (
        (w ** 2 - 1.0) / w ** 2 * sigma
        + 2.0 / w ** 2 * float(Du @ Fij @ shape.A @ Du)
        - 2.0 / w ** 3 * float(Du @ Fij @ Du)
    )
    return abs(trace_lhs - trace_rhs), abs(drift_lhs - drift_rhs)
