"""Compiled node kernels for the explicit flow on radial and interval grids.

A radial graph has at most two distinct principal curvatures at a node:
kappa_rad once and kappa_ang with multiplicity n - 1. With m = n - 1 and
b = kappa_ang the elementary symmetric polynomials of that multiset are

    e_k = C(m, k) b^k + kappa_rad C(m, k-1) b^(k-1)

so f and Sum f_i need no eigenvalue work. ``grid_profile`` reproduces
``discrete_derivatives`` and the radial curvature formulas node by node.
``advance_steps`` runs forward Euler steps between two hand-off points of
the Python driver (a record step, the end time, a steady or inadmissible
state, or a step underflow).
"""

from __future__ import annotations

import numba
import numpy as np
from scipy.special import comb

from .symfunc import CurvatureFunctionSpec

# evaluate_nodes status
EVAL_OK = 0
EVAL_NOT_CONVEX = 1
EVAL_OUT_OF_CONE = 2

# advance_steps status
ADVANCE_HANDOFF = 0
ADVANCE_UNDERFLOW = 1

# slots of the running-extrema vector (mirrors MonitorHistory)
H_MAX_U, H_MIN_NU, H_MAX_BW, H_MAX_BPSI, H_MAX_BRATIO, H_OBSERVED = range(6)
HISTORY_SLOTS = 6

# slots of the trajectory accumulator vector
A_MIN_CONV, A_MIN_FMS, A_RESIDUAL, A_MONOTONE, A_DISSIPATION, A_WORST_NODE, A_WORST_EIG, A_LAST_DT, A_HALVINGS = range(9)
ACCUMULATOR_SLOTS = 9


def _binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return float(comb(n, k, exact=True))


def two_valued_coefficients(spec: CurvatureFunctionSpec) -> np.ndarray:
    """
    Binomial weights [C(m,top), C(m,top-1), C(n,top), C(m,bot), C(m,bot-1), C(n,bot)]
    with m = n - 1, for ``two_valued_f``.
    """
    top, bottom = spec.exponents
    n = spec.n
    m = n - 1
    return np.array(
        [
            _binom(m, top),
            _binom(m, top - 1),
            _binom(n, top),
            _binom(m, bottom),
            _binom(m, bottom - 1),
            _binom(n, bottom),
        ]
    )


@numba.jit(nopython=True)
def _esym_two_valued(a, b, k, cm_k, cm_km1):
    # e_k and (d/da + d/db) e_k of {a, b (m times)}
    if k == 0:
        return 1.0, 0.0
    bk1 = b ** (k - 1)
    e = cm_k * bk1 * b + a * cm_km1 * bk1
    d = cm_km1 * bk1 + k * cm_k * bk1
    if k >= 2:
        d += a * (k - 1) * cm_km1 * b ** (k - 2)
    return e, d


@numba.jit(nopython=True)
def two_valued_f(a, b, top, bottom, coeffs):
    """
    (f, Sum f_i) at kappa = (a, b, ..., b) for f = (H_top / H_bottom)^(1/(top - bottom)).

    Both arguments must be positive.
    """
    e_top, d_top = _esym_two_valued(a, b, top, coeffs[0], coeffs[1])
    e_bot, d_bot = _esym_two_valued(a, b, bottom, coeffs[3], coeffs[4])
    span = top - bottom
    ratio = (e_top / coeffs[2]) / (e_bot / coeffs[5])
    f = ratio ** (1.0 / span)
    return f, f / span * (d_top / e_top - d_bot / e_bot)


@numba.jit(nopython=True)
def grid_profile(u, r, h, radial, n, du, d2u, w, k_rad, k_ang, conv):
    """Fill u', u'', w, kappa_rad, kappa_ang and the smallest convexity eigenvalue at every node."""
    N = u.shape[0]
    h2 = h * h
    for i in range(1, N - 1):
        du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h)
        d2u[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2
    last = N - 1
    du[last] = (3.0 * u[last] - 4.0 * u[last - 1] + u[last - 2]) / (2.0 * h)
    d2u[last] = (2.0 * u[last] - 5.0 * u[last - 1] + 4.0 * u[last - 2] - u[last - 3]) / h2
    if radial:
        du[0] = 0.0
        d2u[0] = 2.0 * (u[1] - u[0]) / h2
    else:
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        d2u[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2

    for i in range(N):
        p = du[i]
        wi = np.sqrt(1.0 + p * p)
        w[i] = wi
        k_rad[i] = (1.0 + u[i] * d2u[i] / (wi * wi)) / wi
        m_rad = 1.0 + p * p + u[i] * d2u[i]
        if radial and n > 1:
            ratio = d2u[i] if r[i] == 0.0 else p / r[i]
            k_ang[i] = (1.0 + u[i] * ratio) / wi
            m_ang = 1.0 + u[i] * ratio
            conv[i] = min(m_rad, m_ang)
        else:
            k_ang[i] = k_rad[i]
            conv[i] = m_rad


@numba.jit(nopython=True)
def _worst_convexity(u, conv, lo, hi):
    # node with the smallest convexity eigenvalue; non-positive heights rank first
    worst = lo
    worst_value = np.inf
    for i in range(lo, hi):
        value = conv[i] if u[i] > 0.0 else -np.inf
        if value < worst_value:
            worst_value = value
            worst = i
    return worst


@numba.jit(nopython=True)
def admissible(u, conv, lo, hi):
    for i in range(lo, hi):
        if not (conv[i] > 0.0 and u[i] > 0.0):
            return False
    return True


@numba.jit(nopython=True)
def evaluate_nodes(u, w, k_rad, k_ang, conv, lo, hi, sigma, top, bottom, coeffs, F, sum_f, rate):
    """
    F, Sum f_i and u_t = u w (F - sigma) over interior nodes lo..hi-1.

    Dirichlet nodes get F = sigma and zero rate. Returns
    (status, node, eigenvalue, residual) where residual = max |F - sigma|.
    """
    N = u.shape[0]
    for i in range(N):
        F[i] = sigma
        sum_f[i] = 0.0
        rate[i] = 0.0
    if not admissible(u, conv, lo, hi):
        node = _worst_convexity(u, conv, lo, hi)
        return EVAL_NOT_CONVEX, node, conv[node], np.nan

    residual = 0.0
    for i in range(lo, hi):
        a = k_rad[i]
        b = k_ang[i]
        if not (a > 0.0 and b > 0.0):
            node = lo
            smallest = np.inf
            for j in range(lo, hi):
                value = min(k_rad[j], k_ang[j])
                if value < smallest:
                    smallest = value
                    node = j
            return EVAL_OUT_OF_CONE, node, conv[node], np.nan
        f, s = two_valued_f(a, b, top, bottom, coeffs)
        F[i] = f
        sum_f[i] = s
        rate[i] = (f - sigma) * u[i] * w[i]
        residual = max(residual, abs(f - sigma))
    return EVAL_OK, -1, np.nan, residual


@numba.jit(nopython=True)
def stable_step(u, w, sum_f, lo, hi, h, cfl):
    """dt = cfl h^2 / max over interior nodes of u^2 Sum f_i / w."""
    diffusion = 0.0
    for i in range(lo, hi):
        diffusion = max(diffusion, u[i] * u[i] * sum_f[i] / w[i])
    return cfl * h * h / diffusion


@numba.jit(nopython=True)
def _observe(u, w, k_rad, k_ang, conv, F, lo, hi, sigma, n, boundary, residual, history, acc):
    N = u.shape[0]
    min_nu = np.inf
    max_u = -np.inf
    for i in range(N):
        min_nu = min(min_nu, 1.0 / w[i])
        max_u = max(max_u, u[i])
    w_b = -np.inf
    psi_b = -np.inf
    for j in range(boundary.shape[0]):
        b = boundary[j]
        w_b = max(w_b, w[b])
        psi_b = max(psi_b, (sigma - 1.0 / w[b]) / u[b])
    history[H_MIN_NU] = min(history[H_MIN_NU], min_nu)
    history[H_MAX_U] = max(history[H_MAX_U], max_u)
    history[H_MAX_BW] = max(history[H_MAX_BW], w_b)
    history[H_MAX_BPSI] = max(history[H_MAX_BPSI], psi_b)
    a = 0.5 * history[H_MIN_NU]
    ratio_b = -np.inf
    for j in range(boundary.shape[0]):
        b = boundary[j]
        kappa_max = k_rad[b] if n == 1 else max(k_rad[b], k_ang[b])
        ratio_b = max(ratio_b, kappa_max / (1.0 / w[b] - a))
    history[H_MAX_BRATIO] = max(history[H_MAX_BRATIO], ratio_b)
    history[H_OBSERVED] += 1.0

    for i in range(lo, hi):
        acc[A_MIN_CONV] = min(acc[A_MIN_CONV], conv[i])
        acc[A_MIN_FMS] = min(acc[A_MIN_FMS], F[i] - sigma)
    acc[A_RESIDUAL] = residual


@numba.jit(nopython=True, nogil=True)
def advance_steps(
    u, t, steps, stride, t_end, epsilon, r, h, radial, n, lo, hi, boundary,
    sigma, top, bottom, coeffs, cfl, max_halvings, steady_tol, monotone_tol, history, acc,
):
    """
    Forward Euler steps from (u, t), updating ``u`` in place.

    Returns (steps taken, t, status). Control goes back to the caller
    after the step that reaches a multiple of ``stride`` or ``t_end``, and
    before stepping a state that is steady or not admissible; such a state
    is left unobserved. States stepped over are folded into ``history``
    and ``acc``.
    """
    N = u.shape[0]
    du = np.empty(N)
    d2u = np.empty(N)
    w = np.empty(N)
    k_rad = np.empty(N)
    k_ang = np.empty(N)
    conv = np.empty(N)
    F = np.empty(N)
    sum_f = np.empty(N)
    rate = np.empty(N)
    u_new = np.empty(N)
    t_du = np.empty(N)
    t_d2u = np.empty(N)
    t_w = np.empty(N)
    t_rad = np.empty(N)
    t_ang = np.empty(N)
    t_conv = np.empty(N)

    grid_profile(u, r, h, radial, n, du, d2u, w, k_rad, k_ang, conv)
    status, node, eig, residual = evaluate_nodes(u, w, k_rad, k_ang, conv, lo, hi, sigma, top, bottom, coeffs, F, sum_f, rate)
    if status != EVAL_OK:
        return 0, t, ADVANCE_HANDOFF

    taken = 0
    while True:
        dt = stable_step(u, w, sum_f, lo, hi, h, cfl)
        capped = False
        if t + dt >= t_end:
            dt = t_end - t
            capped = True

        accepted = -1
        for attempt in range(max_halvings + 1):
            for i in range(N):
                u_new[i] = u[i] + dt * rate[i]
            for j in range(boundary.shape[0]):
                u_new[boundary[j]] = epsilon
            grid_profile(u_new, r, h, radial, n, t_du, t_d2u, t_w, t_rad, t_ang, t_conv)
            if admissible(u_new, t_conv, lo, hi):
                accepted = attempt
                break
            worst = _worst_convexity(u_new, t_conv, lo, hi)
            acc[A_WORST_NODE] = worst
            acc[A_WORST_EIG] = t_conv[worst]
            acc[A_HALVINGS] += 1.0
            dt *= 0.5
        if accepted < 0:
            return taken, t, ADVANCE_UNDERFLOW

        max_rate = -np.inf
        for i in range(N):
            if u_new[i] - u[i] < -monotone_tol:
                acc[A_MONOTONE] = 0.0
            max_rate = max(max_rate, rate[i])
            u[i] = u_new[i]
            du[i] = t_du[i]
            d2u[i] = t_d2u[i]
            w[i] = t_w[i]
            k_rad[i] = t_rad[i]
            k_ang[i] = t_ang[i]
            conv[i] = t_conv[i]
        acc[A_DISSIPATION] += dt * max_rate
        acc[A_LAST_DT] = dt
        t = t_end if (capped and accepted == 0) else t + dt
        taken += 1
        steps += 1

        if steps % stride == 0 or t >= t_end:
            return taken, t, ADVANCE_HANDOFF
        status, node, eig, residual = evaluate_nodes(u, w, k_rad, k_ang, conv, lo, hi, sigma, top, bottom, coeffs, F, sum_f, rate)
        if status != EVAL_OK or residual <= steady_tol:
            return taken, t, ADVANCE_HANDOFF
        _observe(u, w, k_rad, k_ang, conv, F, lo, hi, sigma, n, boundary, residual, history, acc)
