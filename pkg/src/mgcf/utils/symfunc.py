"""Symmetric curvature functions on the positive cone.

Implements f(lambda) for the family (H_n/H_l)^(1/(n-l)) (with H_1 and
H_n^(1/n) as named members), its gradient, and the matrix functional
F(A) = f(lambda(A)) together with F^{ij} = dF/da_ij.

All functions accept principal curvatures with shape ``(..., n)`` and
broadcast over the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
from scipy.special import comb

from ..config import FAMILY_ALIASES
from .errors import DomainError, ParameterError

ArrayLike = Union[np.ndarray, list, tuple]


class CurvatureFamily(str, Enum):
    MEAN_H1 = "mean"
    GAUSS_ROOT = "gauss"
    HESSIAN_QUOTIENT = "quotient"

    @classmethod
    def parse(cls, name: Union[str, "CurvatureFamily"]) -> "CurvatureFamily":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "").replace("-", "")
        if key not in FAMILY_ALIASES:
            raise ParameterError(
                f"Unknown curvature family '{name}'. Must be one of: 'mean', 'gauss', 'quotient'"
            )
        return cls(FAMILY_ALIASES[key])


@dataclass(frozen=True)
class CurvatureFunctionSpec:
    """Selects f from {H_1, H_n^(1/n), (H_n/H_l)^(1/(n-l))}."""

    family: CurvatureFamily
    n: int
    l: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", CurvatureFamily.parse(self.family))
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if self.family is CurvatureFamily.HESSIAN_QUOTIENT:
            if not 0 <= self.l < self.n:
                raise ParameterError(f"l must satisfy 0 <= l < n, got l={self.l}, n={self.n}")
        else:
            object.__setattr__(self, "l", 0)

    @property
    def exponents(self) -> tuple:
        """(top, bottom) indices of the quotient H_top/H_bottom."""
        if self.family is CurvatureFamily.MEAN_H1:
            return (1, 0)
        if self.family is CurvatureFamily.GAUSS_ROOT:
            return (self.n, 0)
        return (self.n, self.l)

    @property
    def label(self) -> str:
        top, bottom = self.exponents
        if self.family is CurvatureFamily.MEAN_H1:
            return "H_1"
        if bottom == 0:
            return f"H_{top}^(1/{top})"
        return f"(H_{top}/H_{bottom})^(1/{top - bottom})"


@dataclass(frozen=True)
class PrincipalCurvatures:
    """Ordered principal curvatures; admissible iff every component is positive."""

    values: np.ndarray = field(repr=True)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ParameterError("principal curvatures must be a non-empty 1-d vector")
        if not np.all(np.isfinite(values)):
            raise ParameterError(f"principal curvatures must be finite, got {values.tolist()}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def admissible(self) -> bool:
        return bool(np.all(self.values > 0))


def _as_lambda(lam: Union[PrincipalCurvatures, ArrayLike]) -> np.ndarray:
    if isinstance(lam, PrincipalCurvatures):
        return lam.values
    return np.asarray(lam, dtype=float)


def _require_admissible(lam: np.ndarray) -> None:
    bad = ~(lam > 0)
    if np.any(bad):
        flat = np.argwhere(bad)[0]
        component = int(flat[-1])
        value = float(lam[tuple(flat)])
        raise DomainError(
            f"lambda is not in the positive cone: component {component} = {value:.6g}",
            component=component,
        )


def elementary_symmetric(lam: ArrayLike) -> np.ndarray:
    """All elementary symmetric polynomials e_0..e_n along the last axis."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    e = np.zeros(lam.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        # right-hand side is evaluated before assignment: e_k += lambda_i * e_{k-1}
        e[..., 1:i + 2] = e[..., 1:i + 2] + lam[..., i:i + 1] * e[..., 0:i + 1]
    return e


def _elementary_symmetric_without(lam: np.ndarray) -> np.ndarray:
    """e_k(lambda without component i), shape (..., n, n) indexed [..., i, k] for k < n."""
    n = lam.shape[-1]
    out = np.empty(lam.shape[:-1] + (n, n))
    for i in range(n):
        reduced = np.delete(lam, i, axis=-1)
        out[..., i, :] = elementary_symmetric(reduced)
    return out


def eval_Hl(lam: Union[PrincipalCurvatures, ArrayLike], l: int) -> np.ndarray:
    """
    Normalized l-th elementary symmetric polynomial H_l = e_l / binomial(n, l).

    Parameters
    ----------
    lam : PrincipalCurvatures or array_like, shape (..., n)
        Finite principal curvatures.
    l : int
        Order, 0 <= l <= n.

    Returns
    -------
    numpy.ndarray or float
        H_l(lambda) over the leading axes.
    """
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if int(l) != l or not 0 <= l <= n:
        raise ParameterError(f"l must satisfy 0 <= l <= n, got l={l}, n={n}")
    if not np.all(np.isfinite(lam)):
        raise ParameterError("lambda must be finite")
    if l == 0:
        return np.ones(lam.shape[:-1]) if lam.ndim > 1 else 1.0
    if l == n:
        prod = np.prod(lam, axis=-1)
        return prod
    e = elementary_symmetric(lam)[..., l]
    return e / comb(n, l, exact=True)


def eval_f(spec: CurvatureFunctionSpec, lam: Union[PrincipalCurvatures, ArrayLike]) -> np.ndarray:
    """
    Evaluate the curvature function f(lambda).

    Raises
    ------
    DomainError
        If any component of lambda is not positive.
    """
    lam = _as_lambda(lam)
    _check_dimension(spec, lam)
    _require_admissible(lam)
    top, bottom = spec.exponents
    if spec.family is CurvatureFamily.MEAN_H1:
        return np.mean(lam, axis=-1)
    ratio = eval_Hl(lam, top) / eval_Hl(lam, bottom)
    return ratio ** (1.0 / (top - bottom))


def grad_f(spec: CurvatureFunctionSpec, lam: Union[PrincipalCurvatures, ArrayLike]) -> np.ndarray:
    """
    Gradient (f_1, ..., f_n) of f at admissible lambda, shape (..., n).
    """
    lam = _as_lambda(lam)
    _check_dimension(spec, lam)
    _require_admissible(lam)
    n = lam.shape[-1]
    if spec.family is CurvatureFamily.MEAN_H1:
        return np.full(lam.shape, 1.0 / n)
    top, bottom = spec.exponents
    f = eval_f(spec, lam)
    without = _elementary_symmetric_without(lam)
    # d e_k / d lambda_i = e_{k-1}(lambda without i)
    dlog_top = (without[..., top - 1] / comb(n, top, exact=True)) / eval_Hl(lam, top)[..., None]
    if bottom == 0:
        dlog_bottom = 0.0
    else:
        dlog_bottom = (without[..., bottom - 1] / comb(n, bottom, exact=True)) / eval_Hl(lam, bottom)[..., None]
    return np.asarray(f)[..., None] / (top - bottom) * (dlog_top - dlog_bottom)


def parallel_slope(spec: CurvatureFunctionSpec, lam: Union[PrincipalCurvatures, ArrayLike]) -> np.ndarray:
    """d/ds f(kappa(s)) = Sum kappa_i^2 f_i - Sum f_i along parallel surfaces (kappa_i' = kappa_i^2 - 1)."""
    lam = _as_lambda(lam)
    g = grad_f(spec, lam)
    return np.sum(lam ** 2 * g, axis=-1) - np.sum(g, axis=-1)


def _check_dimension(spec: CurvatureFunctionSpec, lam: np.ndarray) -> None:
    if lam.ndim == 0 or lam.shape[-1] != spec.n:
        raise ParameterError(f"expected {spec.n} principal curvatures, got shape {lam.shape}")


def _symmetric_eigh(A: np.ndarray):
    """Eigenpairs in descending eigenvalue order."""
    A = np.asarray(A, dtype=float)
    sym = 0.5 * (A + np.swapaxes(A, -1, -2))
    vals, vecs = np.linalg.eigh(sym)
    return vals[..., ::-1], vecs[..., ::-1]


def F_matrix(spec: CurvatureFunctionSpec, A: np.ndarray) -> np.ndarray:
    """F(A) = f(lambda(A)) for symmetric A with admissible spectrum."""
    vals, _ = _symmetric_eigh(A)
    try:
        return eval_f(spec, vals)
    except DomainError as err:
        raise DomainError(f"spectrum of A is not admissible: {vals.tolist()}", spectrum=vals.ravel()) from err


def F_matrix_derivative(spec: CurvatureFunctionSpec, A: np.ndarray) -> np.ndarray:
    """
    F^{ij}(A) = dF/da_ij for symmetric A.

    For a spectral function the first derivative is Q diag(f_i(lambda)) Q^T.
    Within a cluster of equal eigenvalues f_i coincide by symmetry of f, so
    the result does not depend on the eigenvector basis chosen inside the
    cluster.

    Raises
    ------
    DomainError
        If the spectrum of A has a non-positive eigenvalue; the spectrum is attached.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[-2:] != (spec.n, spec.n):
        raise ParameterError(f"A must be {spec.n}x{spec.n}, got shape {A.shape}")
    vals, vecs = _symmetric_eigh(A)
    if not np.all(vals > 0):
        raise DomainError(f"spectrum of A is not admissible: {vals.tolist()}", spectrum=vals.ravel())
    g = grad_f(spec, vals)
    Fij = (vecs * g[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    return 0.5 * (Fij + np.swapaxes(Fij, -1, -2))
