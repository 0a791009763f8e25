"""Hyperboloid-model primitives for H^2 inside Minkowski space R^{2,1}.

Points are stored in ambient coordinates (x, y, w) with x^2 + y^2 - w^2 = -1
and w > 0.  Two global charts are supported:

* ``"graph"``: (x, y) -> (x, y, sqrt(1 + x^2 + y^2))
* ``"theta_phi"``: (theta, phi) -> (sinh theta, cosh theta sinh phi,
  cosh theta cosh phi); the x-w hyperbola H^1 is phi = 0.

Chart coordinate vectors for N bodies use a block layout: the first N
entries are the first coordinate of every body, the last N the second one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArgumentBelowOne, ChartRangeError

ETA = np.array([1.0, 1.0, -1.0])
CHARTS = ("graph", "theta_phi")
CHART_LIMIT = 30.0
_CLAMP_WINDOW = 1e-12
_BELOW_ONE_TOL = 1e-9
_ON_SHEET_TOL = 1e-12


class HPoint(NamedTuple):
    x: float
    y: float
    w: float


class ChartPoint(NamedTuple):
    theta: float
    phi: float


class GraphPoint(NamedTuple):
    x: float
    y: float


def minkowski_dot(p, q):
    """x1*x2 + y1*y2 - w1*w2, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1] - p[..., 2] * q[..., 2]


def on_hyperboloid(p, tol=_ON_SHEET_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    gap = np.abs(minkowski_dot(p, p) + 1.0)
    scale = np.maximum(1.0, p[..., 2] ** 2)
    return bool(np.all(gap <= tol * scale) and np.all(p[..., 2] > 0))


def geodesic_distance(p, q) -> float:
    """arcosh(-p.q), clamping roundoff just below 1."""
    s = -float(minkowski_dot(p, q))
    if s < 1.0 - _BELOW_ONE_TOL:
        raise ArgumentBelowOne(f"-p.q = {s!r} < 1; points are not on H^2")
    return float(np.arccosh(max(s, 1.0)))


def _check_range(*values):
    for v in values:
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) > CHART_LIMIT):
            raise ChartRangeError(f"chart coordinate outside |.| <= {CHART_LIMIT}")


def theta_phi_to_ambient(theta, phi) -> np.ndarray:
    """Vectorized chart map; returns an (..., 3) array."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_range(theta, phi)
    ch = np.cosh(theta)
    return np.stack([np.sinh(theta), ch * np.sinh(phi), ch * np.cosh(phi)], axis=-1)


def ambient_to_theta_phi(points):
    points = np.asarray(points, dtype=float)
    theta = np.arcsinh(points[..., 0])
    phi = np.arcsinh(points[..., 1] / np.cosh(theta))
    return theta, phi


def graph_to_ambient(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([x, y, np.sqrt(1.0 + x * x + y * y)], axis=-1)


def chart_to_ambient(c: ChartPoint) -> HPoint:
    return HPoint(*theta_phi_to_ambient(c[0], c[1]).tolist())


def ambient_to_chart(p: HPoint) -> ChartPoint:
    theta, phi = ambient_to_theta_phi(p)
    return ChartPoint(float(theta), float(phi))


def lift(g: GraphPoint) -> HPoint:
    return HPoint(*graph_to_ambient(g[0], g[1]).tolist())


def project(p: HPoint) -> GraphPoint:
    return GraphPoint(float(p[0]), float(p[1]))


@dataclass
class Configuration:
    """N bodies on H^2: an (N, 3) array of ambient points and N masses."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.points = np.array(self.points, dtype=float).reshape(-1, 3)
        self.masses = np.array(self.masses, dtype=float).reshape(-1)
        n = len(self.masses)
        if n < 1 or self.points.shape[0] != n:
            raise ValueError("points and masses must have the same length N >= 1")
        if np.any(self.masses <= 0) or not np.all(np.isfinite(self.masses)):
            raise ValueError("masses must be positive and finite")
        if not on_hyperboloid(self.points):
            raise ValueError("points do not lie on the upper sheet of H^2")

    @property
    def n(self) -> int:
        return len(self.masses)

    @classmethod
    def from_chart(cls, thetas, phis, masses) -> "Configuration":
        return cls(theta_phi_to_ambient(thetas, phis), masses)

    @classmethod
    def from_graph(cls, xs, ys, masses) -> "Configuration":
        return cls(graph_to_ambient(xs, ys), masses)

    @classmethod
    def from_coords(cls, u, masses, chart="graph") -> "Configuration":
        u = np.asarray(u, dtype=float)
        n = len(u) // 2
        if chart == "graph":
            return cls.from_graph(u[:n], u[n:], masses)
        if chart == "theta_phi":
            return cls.from_chart(u[:n], u[n:], masses)
        raise ValueError(f"unknown chart {chart!r}")

    def coords(self, chart="graph") -> np.ndarray:
        """Chart coordinates in block layout (first coords, then second coords)."""
        if chart == "graph":
            return np.concatenate([self.points[:, 0], self.points[:, 1]])
        if chart == "theta_phi":
            theta, phi = ambient_to_theta_phi(self.points)
            return np.concatenate([theta, phi])
        raise ValueError(f"unknown chart {chart!r}")

    def hpoints(self) -> list[HPoint]:
        return [HPoint(*row) for row in self.points.tolist()]

    def copy(self) -> "Configuration":
        return Configuration(self.points.copy(), self.masses.copy())


def so2_rotate(config: Configuration, angle: float) -> Configuration:
    c, s = np.cos(angle), np.sin(angle)
    pts = config.points.copy()
    x, y = pts[:, 0].copy(), pts[:, 1].copy()
    pts[:, 0] = c * x - s * y
    pts[:, 1] = s * x + c * y
    return Configuration(pts, config.masses.copy())


def chart_derivatives(points, chart="graph"):
    """First and second derivatives of the chart map at each body.

    Returns ``J`` with shape (N, 3, 2), ``J[i, :, a] = d q_i / d u_a``, and
    ``K`` with shape (N, 3, 2, 2), ``K[i, :, a, b] = d^2 q_i / d u_a d u_b``.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    J = np.zeros((n, 3, 2))
    K = np.zeros((n, 3, 2, 2))
    if chart == "graph":
        x, y, w = points[:, 0], points[:, 1], points[:, 2]
        w3 = w ** 3
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = 1.0
        J[:, 2, 0] = x / w
        J[:, 2, 1] = y / w
        K[:, 2, 0, 0] = (1.0 + y * y) / w3
        K[:, 2, 1, 1] = (1.0 + x * x) / w3
        K[:, 2, 0, 1] = K[:, 2, 1, 0] = -x * y / w3
    elif chart == "theta_phi":
        theta, phi = ambient_to_theta_phi(points)
        sh, ch = np.sinh(theta), np.cosh(theta)
        sp, cp = np.sinh(phi), np.cosh(phi)
        J[:, :, 0] = np.stack([ch, sh * sp, sh * cp], axis=-1)
        J[:, :, 1] = np.stack([np.zeros(n), ch * cp, ch * sp], axis=-1)
        K[:, :, 0, 0] = np.stack([sh, ch * sp, ch * cp], axis=-1)
        K[:, :, 1, 1] = np.stack([np.zeros(n), ch * sp, ch * cp], axis=-1)
        K[:, :, 0, 1] = np.stack([np.zeros(n), sh * cp, sh * sp], axis=-1)
        K[:, :, 1, 0] = K[:, :, 0, 1]
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return J, K


def ambient_to_chart_vector(points, vectors, chart="graph") -> np.ndarray:
    """Chart components (block layout) of ambient tangent vectors."""
    J, _ = chart_derivatives(points, chart)
    n = J.shape[0]
    out = np.empty((2, n))
    for i in range(n):
        # J_i has full column rank; tangent vectors are reproduced exactly.
        out[:, i] = np.linalg.lstsq(J[i], vectors[i], rcond=None)[0]
    return out.reshape(-1)


def chart_to_ambient_vector(points, u, chart="graph") -> np.ndarray:
    J, _ = chart_derivatives(points, chart)
    n = J.shape[0]
    u = np.asarray(u, dtype=float).reshape(2, n).T
    return np.einsum("iab,ib->ia", J, u)
