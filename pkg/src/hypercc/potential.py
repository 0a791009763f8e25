"""Force function, moment of inertia, their gradients and the projected field X.

Everything here works on a :class:`~hypercc.geometry.Configuration`.  Ambient
gradients are Minkowski gradients tangent to H^2 at each body, i.e. the
vectors F_i = sum_j F_ij and 2 m_i (x w^2, y w^2, w r^2).  The mass metric is
<u, v> = sum_i m_i u_i . v_i.
"""

from __future__ import annotations

import numpy as np

from .errors import CollisionError, DegenerateDenominator
from .geometry import ETA, Configuration, chart_derivatives, minkowski_dot

COLLISION_DISTANCE = 1e-12
NEAR_COLLISION_DISTANCE = 1e-4
DENOMINATOR_FLOOR = 1e-14


def pair_geometry(points):
    """Pairwise (cosh d, sinh d, d) matrices.  Diagonals are 1, 0, 0.

    Small distances come from the Minkowski norm of the chord,
    |q_i - q_j|^2 = 4 sinh^2(d/2), which keeps full relative accuracy where
    arcosh(-q_i.q_j) would not.
    """
    points = np.asarray(points, dtype=float)
    cosh_d = -minkowski_dot(points[:, None, :], points[None, :, :])
    diff = points[:, None, :] - points[None, :, :]
    chord2 = np.maximum(minkowski_dot(diff, diff), 0.0)
    d = np.where(
        cosh_d > 2.0,
        np.arccosh(np.maximum(cosh_d, 1.0)),
        2.0 * np.arcsinh(0.5 * np.sqrt(chord2)),
    )
    np.fill_diagonal(cosh_d, 1.0)
    np.fill_diagonal(d, 0.0)
    return cosh_d, np.sinh(d), d


def min_pair_distance(config: Configuration) -> float:
    if config.n < 2:
        return float("inf")
    _, _, d = pair_geometry(config.points)
    iu = np.triu_indices(config.n, 1)
    return float(d[iu].min())


def near_collision(config: Configuration) -> bool:
    return min_pair_distance(config) < NEAR_COLLISION_DISTANCE


def _checked_pairs(config: Configuration):
    cosh_d, sinh_d, d = pair_geometry(config.points)
    if config.n >= 2:
        iu = np.triu_indices(config.n, 1)
        dmin = d[iu].min()
        if dmin < COLLISION_DISTANCE:
            i, j = (int(k[np.argmin(d[iu])]) for k in iu)
            raise CollisionError(f"bodies {i} and {j} collide (d = {dmin:.3e})")
    return cosh_d, sinh_d, d


def force_function(config: Configuration) -> float:
    """U = sum_{i<j} m_i m_j coth d_ij."""
    cosh_d, sinh_d, _ = _checked_pairs(config)
    m = config.masses
    iu = np.triu_indices(config.n, 1)
    mm = np.outer(m, m)[iu]
    return float(np.sum(mm * cosh_d[iu] / sinh_d[iu]))


def moment_of_inertia(config: Configuration) -> float:
    p = config.points
    return float(np.sum(config.masses * (p[:, 0] ** 2 + p[:, 1] ** 2)))


def grad_U(config: Configuration) -> np.ndarray:
    """(N, 3) array of F_i = sum_j m_i m_j (q_j - cosh d_ij q_i) / sinh^3 d_ij."""
    cosh_d, sinh_d, _ = _checked_pairs(config)
    return _grad_U(config.points, config.masses, cosh_d, sinh_d)


def _grad_U(points, masses, cosh_d, sinh_d):
    n = len(masses)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.outer(masses, masses) / sinh_d ** 3
    coef[np.diag_indices(n)] = 0.0
    # F_i = sum_j coef_ij q_j - (sum_j coef_ij cosh_ij) q_i
    return coef @ points - np.sum(coef * cosh_d, axis=1)[:, None] * points


def grad_I(config: Configuration) -> np.ndarray:
    return _grad_I(config.points, config.masses)


def _grad_I(points, masses):
    x, y, w = points[:, 0], points[:, 1], points[:, 2]
    r2 = x * x + y * y
    return 2.0 * masses[:, None] * np.stack([x * w * w, y * w * w, w * r2], axis=-1)


def mass_metric(u, v, config: Configuration) -> float:
    u = np.asarray(u, dtype=float).reshape(-1, 3)
    v = np.asarray(v, dtype=float).reshape(-1, 3)
    if u.shape != v.shape or u.shape[0] != config.n:
        raise ValueError("tangent vectors must have one 3-vector per body")
    return float(np.sum(config.masses * minkowski_dot(u, v)))


def _lambda_parts(config: Configuration):
    cosh_d, sinh_d, _ = _checked_pairs(config)
    m = config.masses
    gU = _grad_U(config.points, m, cosh_d, sinh_d)
    gI = _grad_I(config.points, m)
    # <M^-1 a, M^-1 b> = sum_i a_i . b_i / m_i
    num = float(np.sum(minkowski_dot(gU, gI) / m))
    den = float(np.sum(minkowski_dot(gI, gI) / m))
    return num, den, gU, gI


def lambda_value(config: Configuration) -> float:
    num, den, _, _ = _lambda_parts(config)
    # den = 4 sum m r^2 w^2; the floor applies to the unscaled sum
    if den < 4.0 * DENOMINATOR_FLOOR:
        raise DegenerateDenominator("all bodies are at the apex; grad I = 0")
    return num / den


def lambda_numerator(config: Configuration) -> float:
    """<M^-1 grad U, M^-1 grad I> evaluated directly from the gradients."""
    return _lambda_parts(config)[0]


def lambda_numerator_closed_form(config: Configuration) -> float:
    """2 sum_{i<j} m_i m_j [(w_i^2 + w_j^2)(1 - cosh d) - (w_i - w_j)^2] / sinh^3 d.

    The sum is the inner product against grad I / 2 = m (x w^2, y w^2, w r^2);
    the leading 2 restores grad I itself so this equals :func:`lambda_numerator`.
    Every term is negative off the collision set, which is why lambda < 0.
    ``1 - cosh d`` is evaluated as ``-2 sinh^2(d/2)`` to avoid cancellation.
    """
    _, sinh_d, d = _checked_pairs(config)
    m = config.masses
    w = config.points[:, 2]
    iu = np.triu_indices(config.n, 1)
    wi, wj = w[iu[0]], w[iu[1]]
    one_minus_cosh = -2.0 * np.sinh(0.5 * d[iu]) ** 2
    terms = (wi ** 2 + wj ** 2) * one_minus_cosh - (wi - wj) ** 2
    return 2.0 * float(np.sum(m[iu[0]] * m[iu[1]] * terms / sinh_d[iu] ** 3))


def lambda_denominator(config: Configuration) -> float:
    """<M^-1 grad I, M^-1 grad I> = 4 sum_i m_i r_i^2 w_i^2 (closed form)."""
    p = config.points
    return 4.0 * float(np.sum(config.masses * (p[:, 0] ** 2 + p[:, 1] ** 2) * p[:, 2] ** 2))


def gradient_field_X(config: Configuration) -> np.ndarray:
    """X = M^-1 grad U - lambda M^-1 grad I, the mass-metric gradient of U on S_c."""
    num, den, gU, gI = _lambda_parts(config)
    if den < 4.0 * DENOMINATOR_FLOOR:
        raise DegenerateDenominator("all bodies are at the apex; grad I = 0")
    return (gU - (num / den) * gI) / config.masses[:, None]


def tangent_norm2(points, vectors):
    """Per-body Minkowski norm^2 of tangent vectors, free of cancellation.

    With graph components (a, b) at (x, y, w):  (a^2 + b^2 + (a y - b x)^2) / w^2.
    """
    a, b = vectors[:, 0], vectors[:, 1]
    x, y, w = points[:, 0], points[:, 1], points[:, 2]
    return (a * a + b * b + (a * y - b * x) ** 2) / (w * w)


def cc_residual(config: Configuration) -> float:
    """||X|| in the mass metric; zero exactly at central configurations."""
    X = gradient_field_X(config)
    return float(np.sqrt(np.sum(config.masses * tangent_norm2(config.points, X))))


def moment_relations_check(config: Configuration) -> float:
    """max(|sum m x w|, |sum m y w|); both vanish at every central configuration."""
    m = config.masses
    p = config.points
    return float(max(abs(np.sum(m * p[:, 0] * p[:, 2])), abs(np.sum(m * p[:, 1] * p[:, 2]))))


def moment_relations_scale(config: Configuration) -> float:
    return float(np.sum(config.masses * config.points[:, 2] ** 2))


def chart_gradient(config: Configuration, ambient_grad, chart="graph") -> np.ndarray:
    """Chart components (block layout) of dF for a Minkowski gradient field."""
    J, _ = chart_derivatives(config.points, chart)
    g = np.einsum("ik,k,ika->ai", np.asarray(ambient_grad, dtype=float), ETA, J)
    return g.reshape(-1)


def chart_metric(config: Configuration, chart="graph") -> np.ndarray:
    """2N x 2N Gram matrix of the mass metric in chart coordinates (block layout)."""
    J, _ = chart_derivatives(config.points, chart)
    n = config.n
    G = np.zeros((2 * n, 2 * n))
    for i in range(n):
        g = config.masses[i] * (J[i].T * ETA) @ J[i]
        idx = [i, n + i]
        G[np.ix_(idx, idx)] = g
    return G
