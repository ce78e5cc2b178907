"""Discrete geometry of vertical graphs in the half-space model.

A graph Sigma = {(x, u(x))} with u > 0 has upward Euclidean normal
nu = (-Du, 1)/w, w = sqrt(1 + |Du|^2), Euclidean shape matrix
A_tilde = (1/w) gamma D2u gamma and hyperbolic shape matrix
A = (1/w) I + u A_tilde, whose eigenvalues are the hyperbolic principal
curvatures kappa_i = u kappa_tilde_i + nu^{n+1}.

Grids are uniform. ``Interval1D`` covers [-L, L] with both end points as
Dirichlet nodes; ``RadialBall`` covers r in [0, R] with the axis at node 0
and the Dirichlet node at r = R.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple, Union

import numpy as np

from ..config import MIN_NODES
from .errors import ParameterError


class DomainKind(str, Enum):
    INTERVAL_1D = "interval"
    RADIAL_BALL = "ball"

    @classmethod
    def parse(cls, name: Union[str, "DomainKind"]) -> "DomainKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"interval": cls.INTERVAL_1D, "interval1d": cls.INTERVAL_1D, "ball": cls.RADIAL_BALL, "radialball": cls.RADIAL_BALL}
        if key not in aliases:
            raise ParameterError(f"Unknown domain kind '{name}'. Must be one of: 'interval', 'ball'")
        return aliases[key]


@dataclass(frozen=True)
class DomainDescriptor:
    """Uniform grid over Omega (an interval or a ball in radial reduction)."""

    kind: DomainKind
    n: int
    extent: float
    node_count: int

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind.parse(self.kind))
        if self.kind is DomainKind.INTERVAL_1D and self.n != 1:
            raise ParameterError(f"interval domains have n = 1, got n={self.n}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if not self.extent > 0:
            raise ParameterError(f"extent must be positive, got {self.extent}")
        if self.node_count < MIN_NODES:
            raise ParameterError(f"node_count must be >= {MIN_NODES}, got {self.node_count}")

    @property
    def radial(self) -> bool:
        return self.kind is DomainKind.RADIAL_BALL

    @property
    def h(self) -> float:
        span = self.extent if self.radial else 2.0 * self.extent
        return span / (self.node_count - 1)

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates: r in [0, R] (ball) or x in [-L, L] (interval)."""
        if self.radial:
            return np.linspace(0.0, self.extent, self.node_count)
        return np.linspace(-self.extent, self.extent, self.node_count)

    @property
    def boundary_index(self) -> np.ndarray:
        last = self.node_count - 1
        return np.array([last]) if self.radial else np.array([0, last])

    @property
    def adjacent_index(self) -> np.ndarray:
        """Interior nodes next to a Dirichlet node."""
        last = self.node_count - 1
        return np.array([last - 1]) if self.radial else np.array([1, last - 1])

    @property
    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.node_count, dtype=bool)
        mask[self.boundary_index] = False
        return mask

    @property
    def deep_interior_mask(self) -> np.ndarray:
        """Interior nodes whose stencils do not touch a Dirichlet node."""
        mask = self.interior_mask
        mask[self.adjacent_index] = False
        return mask


@dataclass(frozen=True)
class GraphState:
    """Height function on the grid, with time and boundary lift."""

    u: np.ndarray
    t: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.ndim != 1:
            raise ParameterError("u must be a 1-d array over grid nodes")
        if not np.all(np.isfinite(u)):
            raise ParameterError("u must be finite")
        if self.epsilon < 0:
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon}")
        u.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def with_u(self, u: np.ndarray, t: float) -> "GraphState":
        return GraphState(u=u, t=t, epsilon=self.epsilon)


def validate_state(state: GraphState, domain: DomainDescriptor) -> None:
    """Check grid size, Dirichlet values and positivity of u at interior nodes."""
    if state.u.size != domain.node_count:
        raise ParameterError(f"state has {state.u.size} nodes, domain has {domain.node_count}")
    boundary = state.u[domain.boundary_index]
    if np.max(np.abs(boundary - state.epsilon)) > 1e-14:
        raise ParameterError(f"boundary values {boundary.tolist()} differ from epsilon={state.epsilon}")
    if not np.all(state.u[domain.interior_mask] > 0):
        raise ParameterError("u must be positive at interior nodes")


class ShapeOperator(NamedTuple):
    A_tilde: np.ndarray
    A: np.ndarray
    kappa: np.ndarray
    nu_upper: float
    w: float


@dataclass(frozen=True)
class PointGeometry:
    Du: np.ndarray
    w: float
    nu_upper: float
    A_tilde: np.ndarray
    A: np.ndarray
    kappa: np.ndarray
    conv_min_eig: float


def discrete_derivatives(state: Union[GraphState, np.ndarray], domain: DomainDescriptor) -> Tuple[np.ndarray, np.ndarray]:
    """
    First and second derivatives of u at every node.

    Interior nodes use second-order central differences (the boundary-adjacent
    node reads the Dirichlet value). Dirichlet nodes use one-sided
    second-order stencils. On a ball the axis node uses u'(0) = 0, so
    u''(0) = 2 (u_1 - u_0) / h^2.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        u' and u'' over all nodes (radial derivatives on a ball).
    """
    u = np.asarray(state.u if isinstance(state, GraphState) else state, dtype=float)
    if u.size < 3:
        raise ParameterError(f"need at least 3 nodes, got {u.size}")
    h = domain.h
    du = np.empty_like(u)
    d2u = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    d2u[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h ** 2

    du[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    d2u[-1] = _one_sided_second(u[-1], u[-2], u[-3], u[-4] if u.size > 3 else None, h)
    if domain.radial:
        du[0] = 0.0
        d2u[0] = 2.0 * (u[1] - u[0]) / h ** 2
    else:
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        d2u[0] = _one_sided_second(u[0], u[1], u[2], u[3] if u.size > 3 else None, h)
    return du, d2u


def _one_sided_second(u0, u1, u2, u3, h):
    if u3 is None:
        return (u0 - 2.0 * u1 + u2) / h ** 2
    return (2.0 * u0 - 5.0 * u1 + 4.0 * u2 - u3) / h ** 2


def gamma_matrix(Du: np.ndarray) -> np.ndarray:
    """gamma^{ij} = delta_ij - u_i u_j / (w (1 + w)), the inverse square root of delta_ij + u_i u_j."""
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    w = np.sqrt(1.0 + Du @ Du)
    return np.eye(Du.size) - np.outer(Du, Du) / (w * (1.0 + w))


def gamma_inverse(Du: np.ndarray) -> np.ndarray:
    """gamma_{ij} = delta_ij + u_i u_j / (1 + w)."""
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    w = np.sqrt(1.0 + Du @ Du)
    return np.eye(Du.size) + np.outer(Du, Du) / (1.0 + w)


def hyperbolic_shape(u: float, Du: np.ndarray, D2u: np.ndarray) -> ShapeOperator:
    """
    Euclidean and hyperbolic shape matrices of the graph at one point.

    A is assembled as (1/w) I + u A_tilde, so the eigenvalue relation
    kappa_i = u kappa_tilde_i + nu^{n+1} holds at the matrix level.
    Non-convex points are representable; admissibility is checked by
    ``convexity_matrix``.
    """
    if not u > 0:
        raise ParameterError(f"u must be positive, got {u}")
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    D2u = np.atleast_2d(np.asarray(D2u, dtype=float))
    w = float(np.sqrt(1.0 + Du @ Du))
    gamma = gamma_matrix(Du)
    A_tilde = gamma @ D2u @ gamma / w
    A_tilde = 0.5 * (A_tilde + A_tilde.T)
    A = np.eye(Du.size) / w + u * A_tilde
    kappa = np.linalg.eigvalsh(A)[::-1]
    return ShapeOperator(A_tilde=A_tilde, A=A, kappa=kappa, nu_upper=1.0 / w, w=w)


def convexity_matrix(u: float, Du: np.ndarray, D2u: np.ndarray) -> Tuple[np.ndarray, float]:
    """M = delta_ij + u_i u_j + u u_ij and its smallest eigenvalue (> 0 iff locally strictly convex)."""
    Du = np.atleast_1d(np.asarray(Du, dtype=float))
    D2u = np.atleast_2d(np.asarray(D2u, dtype=float))
    M = np.eye(Du.size) + np.outer(Du, Du) + u * D2u
    M = 0.5 * (M + M.T)
    return M, float(np.linalg.eigvalsh(M)[0])


def point_geometry(u: float, Du: np.ndarray, D2u: np.ndarray) -> PointGeometry:
    shape = hyperbolic_shape(u, Du, D2u)
    _, min_eig = convexity_matrix(u, Du, D2u)
    return PointGeometry(
        Du=np.atleast_1d(np.asarray(Du, dtype=float)),
        w=shape.w,
        nu_upper=shape.nu_upper,
        A_tilde=shape.A_tilde,
        A=shape.A,
        kappa=shape.kappa,
        conv_min_eig=min_eig,
    )


def _angular_ratio(du, d2u, r):
    """u'/r, replaced by u'' on the axis."""
    du, d2u, r = np.broadcast_arrays(np.asarray(du, dtype=float), np.asarray(d2u, dtype=float), np.asarray(r, dtype=float))
    ratio = np.array(d2u, dtype=float, copy=True)
    off_axis = r > 0
    ratio[off_axis] = du[off_axis] / r[off_axis]
    return ratio


def radial_curvatures(u, du, d2u, r, n: int):
    """
    Hyperbolic principal curvatures of a radial graph.

    kappa_rad = (1/w)(1 + u u'' / w^2) and kappa_ang = (1/w)(1 + u u'/r)
    (multiplicity n - 1). The angular sign follows the upward-normal
    convention h_tilde_ij = u_ij / w.

    Returns
    -------
    tuple
        (kappa_rad, kappa_ang, nu_upper, w)
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ParameterError("r must be non-negative")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    w = np.sqrt(1.0 + du ** 2)
    kappa_rad = (1.0 + u * d2u / w ** 2) / w
    kappa_ang = (1.0 + u * _angular_ratio(du, d2u, r_arr)) / w
    return kappa_rad, kappa_ang, 1.0 / w, w


def radial_convexity_eigs(u, du, d2u, r) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the convexity matrix of a radial graph: (radial, angular)."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    m_rad = 1.0 + du ** 2 + u * d2u
    m_ang = 1.0 + u * _angular_ratio(du, d2u, r)
    return m_rad, m_ang


class GridGeometry(NamedTuple):
    du: np.ndarray
    d2u: np.ndarray
    w: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    conv_min_eig: np.ndarray


def grid_geometry(state: Union[GraphState, np.ndarray], domain: DomainDescriptor) -> GridGeometry:
    """
    Node-wise geometry over the whole grid.

    ``kappa`` has shape (node_count, n) with each row in descending order.
    Dirichlet nodes use one-sided stencils.
    """
    u = np.asarray(state.u if isinstance(state, GraphState) else state, dtype=float)
    du, d2u = discrete_derivatives(u, domain)
    r = domain.nodes if domain.radial else np.full(u.shape, -1.0)
    if domain.radial:
        k_rad, k_ang, nu, w = radial_curvatures(u, du, d2u, r, domain.n)
        m_rad, m_ang = radial_convexity_eigs(u, du, d2u, r)
    else:
        w = np.sqrt(1.0 + du ** 2)
        nu = 1.0 / w
        k_rad = (1.0 + u * d2u / w ** 2) / w
        k_ang = k_rad
        m_rad = 1.0 + du ** 2 + u * d2u
        m_ang = m_rad
    if domain.n == 1:
        kappa = k_rad[:, None]
        conv = m_rad
    else:
        kappa = np.column_stack([k_rad] + [k_ang] * (domain.n - 1))
        kappa = -np.sort(-kappa, axis=1)
        conv = np.minimum(m_rad, m_ang)
    return GridGeometry(du=du, d2u=d2u, w=w, nu=nu, kappa=kappa, conv_min_eig=conv)


def frame_derivatives(du: float, d2u: float, r: float, domain: DomainDescriptor) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cartesian Du and D2u at the point (r, 0, ..., 0) of a radial graph
    (or at x for an interval), for node-level matrix computations.
    """
    n = domain.n
    Du = np.zeros(n)
    Du[0] = du
    D2u = np.zeros((n, n))
    D2u[0, 0] = d2u
    if n > 1:
        ratio = d2u if r == 0 else du / r
        D2u[np.arange(1, n), np.arange(1, n)] = ratio
    return Du, D2u


def node_geometry(state: GraphState, domain: DomainDescriptor, node: int) -> PointGeometry:
    du, d2u = discrete_derivatives(state, domain)
    r = float(domain.nodes[node])
    Du, D2u = frame_derivatives(du[node], d2u[node], r, domain)
    return point_geometry(float(state.u[node]), Du, D2u)


def cap_radius(R: float, sigma: float, epsilon: float = 0.0) -> float:
    """Radius rho of the Euclidean sphere centred at height -sigma*rho meeting {x_{n+1} = epsilon} in the sphere |x| = R."""
    if not 0.0 < sigma < 1.0:
        raise ParameterError("sigma must lie in (0,1)")
    if not R > 0:
        raise ParameterError(f"R must be positive, got {R}")
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
    one_minus = 1.0 - sigma ** 2
    return (epsilon * sigma + np.sqrt((epsilon * sigma) ** 2 + one_minus * (R ** 2 + epsilon ** 2))) / one_minus


def _check_within(R: float, x) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    if np.any(x > R * (1.0 + 1e-12)):
        raise ParameterError(f"|x| must not exceed R={R}")
    return np.minimum(x, R)


def cap_profile(R: float, sigma: float, x_or_r, epsilon: float = 0.0):
    """
    Umbilic cap over the ball of radius R: every hyperbolic principal
    curvature equals sigma.

    With epsilon = 0 this is sqrt(R_e^2 - |x|^2) - sigma R_e, R_e = R / sqrt(1 - sigma^2),
    vanishing on |x| = R. A positive epsilon gives the exact stationary
    solution with boundary height epsilon.
    """
    rho = cap_radius(R, sigma, epsilon)
    x = _check_within(R, x_or_r)
    u = np.sqrt(rho ** 2 - x ** 2) - sigma * rho
    if np.ndim(u) == 0:
        return float(u)
    return u


def lifted_cap_profile(R: float, sigma: float, epsilon: float, x_or_r):
    """Exact stationary solution of the lifted Dirichlet problem on a ball (u = epsilon on |x| = R)."""
    return cap_profile(R, sigma, x_or_r, epsilon=epsilon)


def cap_derivatives(R: float, sigma: float, x_or_r, epsilon: float = 0.0):
    """Analytic (u, u', u'') of ``cap_profile`` along a radius."""
    rho = cap_radius(R, sigma, epsilon)
    r = np.asarray(x_or_r, dtype=float)
    _check_within(R, r)
    s = np.sqrt(rho ** 2 - r ** 2)
    return s - sigma * rho, -r / s, -rho ** 2 / s ** 3
