"""Constrained Hessian of U on S_c and its inertia.

The chart Hessian is the matrix of second partials of U - lambda * I in a
global chart, with lambda frozen at its value at the configuration.  Restricted
to T_q S_c = ker dI (in a mass-metric orthonormal basis) it is the Hessian of
U|S_c whenever q is a critical point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateDenominator, NonSymmetric
from .geometry import ETA, Configuration, ambient_to_chart_vector, chart_derivatives
from .potential import (
    _checked_pairs,
    cc_residual,
    chart_gradient,
    chart_metric,
    grad_I,
    lambda_value,
)

ZERO_TOL_REL = 1e-7
MARGINAL_FACTOR = 10.0
SYMMETRY_TOL = 1e-10
CRITICAL_RESIDUAL = 1e-8


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _ambient_second_derivatives(config: Configuration):
    """Euclidean gradient and Hessian of U on (R^3)^N, extended off the sheet
    through U = sum m_i m_j g(-q_i.q_j) with g(s) = s / sqrt(s^2 - 1).

    g'(s) = -1/sinh^3 d and g''(s) = 3 cosh d / sinh^5 d.
    """
    cosh_d, sinh_d, _ = _checked_pairs(config)
    m = config.masses
    n = config.n
    eq = config.points * ETA
    mm = np.outer(m, m)
    np.fill_diagonal(mm, 0.0)
    s = sinh_d.copy()
    np.fill_diagonal(s, 1.0)
    g1 = -mm / s ** 3
    g2 = 3.0 * mm * cosh_d / s ** 5
    grad = -g1 @ eq
    H = np.einsum("ij,jk,il->ijkl", g2, eq, eq)
    H -= g1[:, :, None, None] * np.diag(ETA)[None, None]
    diag = np.einsum("ij,jk,jl->ikl", g2, eq, eq)
    H[np.arange(n), np.arange(n)] = diag
    return grad, H


def hessian_chart(config: Configuration, chart="graph", lam=None) -> np.ndarray:
    """2N x 2N chart Hessian of U - lam * I (block layout), lam frozen.

    ``lam`` defaults to :func:`~hypercc.potential.lambda_value` at ``config``.
    """
    if lam is None:
        lam = lambda_value(config)
    n = config.n
    m = config.masses
    grad, H = _ambient_second_derivatives(config)
    p = config.points
    grad = grad - lam * 2.0 * m[:, None] * np.stack([p[:, 0], p[:, 1], np.zeros(n)], axis=-1)
    idx = np.arange(n)
    H[idx, idx] -= lam * 2.0 * m[:, None, None] * np.diag([1.0, 1.0, 0.0])[None]
    J, K = chart_derivatives(p, chart)
    out = np.einsum("ika,ijkl,jlb->aibj", J, H, J)
    out[:, idx, :, idx] += np.einsum("ik,ikab->iab", grad, K)
    out = out.reshape(2 * n, 2 * n)
    return 0.5 * (out + out.T)


def tangent_basis(config: Configuration, chart="graph") -> np.ndarray:
    """2N x (2N-1) chart basis of ker dI, orthonormal in the mass metric."""
    gI = chart_gradient(config, grad_I(config), chart)
    if np.linalg.norm(gI) < 1e-12:
        raise DegenerateDenominator("grad I vanishes; T_q S_c is undefined")
    G = chart_metric(config, chart)
    L = np.linalg.cholesky(G)
    a = np.linalg.solve(L, gI)
    Z = null_space(a[None, :])
    return np.linalg.solve(L.T, Z)


def rotation_null_vector(config: Configuration) -> np.ndarray:
    """Ambient SO(2) orbit derivative (-y_i, x_i, 0)."""
    p = config.points
    return np.stack([-p[:, 1], p[:, 0], np.zeros(config.n)], axis=-1)


def rotation_null_vector_chart(config: Configuration, chart="graph") -> np.ndarray:
    if chart == "graph":
        p = config.points
        return np.concatenate([-p[:, 1], p[:, 0]])
    return ambient_to_chart_vector(config.points, rotation_null_vector(config), chart)


@dataclass
class ConstrainedHessian:
    matrix: np.ndarray
    basis: np.ndarray
    chart_tag: str
    lam: float
    residual: float
    chart_matrix: np.ndarray = field(repr=False)

    @property
    def morse_valid(self) -> bool:
        """Only a Hessian taken at a critical point carries Morse data."""
        return self.residual < CRITICAL_RESIDUAL


def constrained_hessian(config: Configuration, chart="graph") -> ConstrainedHessian:
    lam = lambda_value(config)
    Hc = hessian_chart(config, chart, lam)
    B = tangent_basis(config, chart)
    Hr = B.T @ Hc @ B
    return ConstrainedHessian(
        matrix=0.5 * (Hr + Hr.T),
        basis=B,
        chart_tag=chart,
        lam=lam,
        residual=cc_residual(config),
        chart_matrix=Hc,
    )


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    n_minus: int
    n_zero: int
    n_plus: int
    zero_tolerance: float
    marginal: int = 0

    @property
    def nondegenerate(self) -> bool:
        return self.n_zero == 1

    @property
    def inertia(self) -> tuple[int, int, int]:
        return (self.n_minus, self.n_zero, self.n_plus)


def inertia(eigenvalues, zero_tolerance=None):
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    if zero_tolerance is None:
        zero_tolerance = ZERO_TOL_REL * max(float(np.max(np.abs(ev), initial=0.0)), 1.0)
    zero = np.abs(ev) <= zero_tolerance
    n_minus = int(np.sum(ev < -zero_tolerance))
    n_plus = int(np.sum(ev > zero_tolerance))
    marginal = int(np.sum(~zero & (np.abs(ev) <= MARGINAL_FACTOR * zero_tolerance)))
    return SpectrumReport(ev, n_minus, int(np.sum(zero)), n_plus, zero_tolerance, marginal)


def spectrum(h, zero_tolerance=None) -> SpectrumReport:
    """Inertia of a symmetric matrix (or of a :class:`ConstrainedHessian`)."""
    a = h.matrix if isinstance(h, ConstrainedHessian) else np.asarray(h, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSymmetric("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise NonSymmetric("matrix is not symmetric")
    ev, _ = jacobi_eigh(0.5 * (a + a.T))
    return inertia(ev, zero_tolerance)


def rotation_in_kernel(h: ConstrainedHessian, config: Configuration) -> float:
    """||H v_rot|| / (||H|| ||v_rot||) for the chart Hessian."""
    v = rotation_null_vector_chart(config, h.chart_tag)
    H = h.chart_matrix
    denom = np.linalg.norm(H, 2) * np.linalg.norm(v)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(H @ v) / denom)
