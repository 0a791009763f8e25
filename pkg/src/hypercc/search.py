"""Finding central configurations on H^2 by multistart flow + Newton refinement.

Each census trial draws a start on S_c, follows the gradient field X of
U|S_c (descent first), polishes the rest point with a Lagrange-Newton solve,
rotates it into a canonical SO(2) representative, and the pooled results are
deduplicated and classified by their Hessian spectrum.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    CollisionApproach,
    CollisionError,
    DegenerateCluster,
    HyperCCError,
    NoAnchor,
    NoConvergence,
    SingularSystem,
    StepBudgetExhausted,
)
from .geodesic import ordering_of
from .geometry import Configuration, graph_to_ambient, so2_rotate, theta_phi_to_ambient
from .hessian import SpectrumReport, constrained_hessian, hessian_chart, rotation_null_vector_chart, spectrum
from .potential import (
    _grad_I,
    _grad_U,
    cc_residual,
    chart_gradient,
    chart_metric,
    force_function,
    grad_I,
    grad_U,
    lambda_value,
    min_pair_distance,
    minkowski_dot,
    moment_of_inertia,
    pair_geometry,
    tangent_norm2,
)

logger = logging.getLogger(__name__)


@dataclass
class SearchParams:
    trials: int = 2000
    seed: int = 0
    start_range: float = 2.0
    # every k-th trial starts on a random geodesic through the apex (0 disables)
    line_start_every: int = 4
    flow_step: float = 0.05
    flow_max_steps: int = 4000
    flow_switch: float = 1e-4
    newton_tol: float = 1e-10
    newton_max_iter: int = 40
    newton_basin: float = 1e-2
    tol_residual: float = 1e-9
    tol_zero: float | None = None
    dedupe_tol: float = 1e-6
    energy_tol: float = 1e-8
    min_distance_floor: float = 1e-4

    def __post_init__(self):
        for name in ("start_range", "flow_step", "flow_switch", "newton_tol", "newton_basin",
                     "tol_residual", "dedupe_tol", "energy_tol", "min_distance_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_zero is not None and not self.tol_zero > 0:
            raise ValueError("tol_zero must be positive")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")


@dataclass
class CCRecord:
    configuration: Configuration
    lam: float
    U_value: float
    I_value: float
    residual: float
    spectrum: SpectrumReport | None = None
    is_geodesic: bool = False
    ordering: tuple[int, ...] | None = None
    provenance: dict = field(default_factory=dict)
    min_distance: float = float("inf")

    @property
    def index(self) -> int | None:
        return None if self.spectrum is None else self.spectrum.n_minus

    @property
    def nullity(self) -> int | None:
        return None if self.spectrum is None else self.spectrum.n_zero

    @property
    def degenerate(self) -> bool:
        return self.spectrum is not None and self.spectrum.n_zero != 1


# -- flow -----------------------------------------------------------------

def _field(xy, m):
    """U, X (ambient, N x 3), ||X|| and min pair distance at graph coords xy."""
    P = graph_to_ambient(xy[:, 0], xy[:, 1])
    cosh_d, sinh_d, d = pair_geometry(P)
    n = len(m)
    iu = np.triu_indices(n, 1)
    dmin = d[iu].min()
    if dmin < 1e-12:
        raise CollisionError("collision during flow")
    U = float(np.sum(np.outer(m, m)[iu] * cosh_d[iu] / sinh_d[iu]))
    gU = _grad_U(P, m, cosh_d, sinh_d)
    gI = _grad_I(P, m)
    num = np.sum(minkowski_dot(gU, gI) / m)
    den = np.sum(minkowski_dot(gI, gI) / m)
    X = (gU - (num / den) * gI) / m[:, None]
    norm = float(np.sqrt(np.sum(m * tangent_norm2(P, X))))
    return U, X, norm, float(dmin)


def _rescale_xy(xy, m, c):
    I = float(np.sum(m * np.sum(xy * xy, axis=1)))
    return xy * np.sqrt(c / I)


def _flow_one_direction(start: Configuration, c, params: SearchParams, sign: int):
    m = start.masses
    xy = start.points[:, :2].copy()
    U, X, res, dmin = _field(xy, m)
    h = params.flow_step
    for _ in range(params.flow_max_steps):
        if res < params.flow_switch:
            return Configuration.from_graph(xy[:, 0], xy[:, 1], m), res
        trial = _rescale_xy(xy + sign * h * X[:, :2], m, c)
        try:
            U_t, X_t, res_t, dmin_t = _field(trial, m)
        except CollisionError:
            U_t, dmin_t = np.inf * -sign, 0.0
        if dmin_t < params.min_distance_floor:
            if sign > 0:
                raise CollisionApproach(f"ascent reached d = {dmin_t:.2e}")
            h *= 0.5
            continue
        if sign * (U_t - U) >= 1e-4 * h * res * res:
            xy, U, X, res = trial, U_t, X_t, res_t
            h = min(h * 1.5, 10.0)
        else:
            h *= 0.5
            if h < 1e-14:
                break
    best = Configuration.from_graph(xy[:, 0], xy[:, 1], m)
    raise StepBudgetExhausted(f"flow stopped at residual {res:.3e}", best=best, residual=res)


def flow_integrate(start: Configuration, c: float, params: SearchParams | None = None, sign=None):
    """Follow -X (then +X if descent fails) until ||X|| < params.flow_switch.

    ``sign=-1`` or ``+1`` restricts to one direction.  Raises
    :class:`StepBudgetExhausted` (with ``best``) or :class:`CollisionApproach`
    when no direction reaches the switch threshold.
    """
    params = params or SearchParams()
    if abs(moment_of_inertia(start) - c) > 1e-8 * max(1.0, c):
        raise ValueError("start is not on S_c; rescale first")
    if min_pair_distance(start) < params.min_distance_floor:
        raise CollisionApproach("start is within the collision floor")
    signs = (-1, 1) if sign is None else (sign,)
    error = None
    for s in signs:
        try:
            return _flow_one_direction(start, c, params, s)[0]
        except (StepBudgetExhausted, CollisionApproach) as exc:
            error = exc
    raise error


# -- Newton ---------------------------------------------------------------

def newton_refine(start: Configuration, c: float, tol=1e-10, max_iter=40, basin=1e-2, history=None):
    """Solve grad U = lam grad I, I = c in graph coordinates with an SO(2) gauge row.

    Unknowns are the 2N chart coordinates and lam; the 2N + 2 equations
    (stationarity, level, gauge) are solved in the least-squares sense.
    Returns ``(configuration, lam, residual)`` with residual = ||X||.
    """
    m = start.masses
    n = start.n
    cfg = start
    res = cc_residual(cfg)
    if history is not None:
        history.append(res)
    if res > basin:
        raise NoConvergence(f"start residual {res:.3e} is outside the Newton basin", best=cfg, residual=res)
    lam = lambda_value(cfg)
    u = cfg.coords("graph")

    def equations(cfg, lam):
        g = chart_gradient(cfg, grad_U(cfg) - lam * grad_I(cfg), "graph")
        return np.concatenate([g, [moment_of_inertia(cfg) - c]])

    level_ok = lambda cfg: abs(moment_of_inertia(cfg) - c) <= 1e-12 * max(1.0, c)
    F = equations(cfg, lam)
    for _ in range(max_iter):
        if res < tol and level_ok(cfg):
            break
        H = hessian_chart(cfg, "graph", lam)
        gI = chart_gradient(cfg, grad_I(cfg), "graph")
        gauge = chart_metric(cfg, "graph") @ rotation_null_vector_chart(cfg, "graph")
        Jac = np.zeros((2 * n + 2, 2 * n + 1))
        Jac[:2 * n, :2 * n] = H
        Jac[:2 * n, 2 * n] = -gI
        Jac[2 * n, :2 * n] = gI
        Jac[2 * n + 1, :2 * n] = gauge / max(np.linalg.norm(gauge), 1e-300) * np.linalg.norm(gI)
        rhs = np.concatenate([-F, [0.0]])
        step, _, rank, sv = np.linalg.lstsq(Jac, rhs, rcond=None)
        if rank < 2 * n + 1 or sv[-1] < 1e-13 * sv[0]:
            raise SingularSystem("Newton system is singular; degenerate critical point suspected")
        alpha = 1.0
        norm_F = np.linalg.norm(F)
        while True:
            try:
                cfg_new = Configuration.from_coords(u + alpha * step[:-1], m, "graph")
                lam_new = lam + alpha * step[-1]
                F_new = equations(cfg_new, lam_new)
                if np.linalg.norm(F_new) < norm_F or alpha < 1e-3:
                    break
            except (CollisionError, ValueError):
                pass
            alpha *= 0.5
            if alpha < 1e-6:
                raise NoConvergence("Newton line search failed", best=cfg, residual=res)
        u = u + alpha * step[:-1]
        cfg, lam, F = cfg_new, lam_new, F_new
        res = cc_residual(cfg)
        if history is not None:
            history.append(res)
    if not (res < tol and level_ok(cfg)):
        raise NoConvergence(f"Newton stopped at residual {res:.3e}", best=cfg, residual=res)
    return cfg, float(lam), float(res)


# -- symmetry -------------------------------------------------------------

def canonicalize(config: Configuration) -> Configuration:
    """Rotate into the canonical SO(2) representative.

    The weighted moment sum m_i w_i (x_i, y_i) is turned onto +x.  It
    vanishes at every central configuration, in which case the body with the
    largest r_i (lowest index among near-ties) is turned onto +x instead.
    """
    p = config.points
    m = config.masses
    moment = np.array([np.sum(m * p[:, 2] * p[:, 0]), np.sum(m * p[:, 2] * p[:, 1])])
    scale = float(np.sum(m * p[:, 2] * np.hypot(p[:, 0], p[:, 1])))
    if np.hypot(*moment) >= 1e-10 * max(1.0, scale):
        angle = np.arctan2(moment[1], moment[0])
    else:
        r = np.hypot(p[:, 0], p[:, 1])
        rmax = r.max()
        if rmax < 1e-12:
            raise NoAnchor("every body sits at the apex")
        k = int(np.flatnonzero(r >= rmax * (1.0 - 1e-9))[0])
        angle = np.arctan2(p[k, 1], p[k, 0])
    out = so2_rotate(config, -angle)
    return out


def aligned_distance(a: Configuration, b: Configuration) -> float:
    """Max-norm graph-coordinate distance between a and the best SO(2) rotation of b."""
    za = a.points[:, 0] + 1j * a.points[:, 1]
    zb = b.points[:, 0] + 1j * b.points[:, 1]
    cross = np.sum(a.masses * za * np.conj(zb))
    rot = cross / abs(cross) if abs(cross) > 0 else 1.0
    return float(np.max(np.abs(za - rot * zb)))


def _same_class(a: CCRecord, b: CCRecord, tol: float, energy_tol: float) -> bool:
    if abs(a.U_value - b.U_value) > energy_tol * max(1.0, abs(a.U_value)) + 1e3 * tol:
        return False
    pa, pb = a.configuration.points[:, :2], b.configuration.points[:, :2]
    if np.max(np.abs(pa - pb)) < tol or np.max(np.abs(pa + pb)) < tol:
        return True
    return aligned_distance(a.configuration, b.configuration) < tol


def dedupe(records, tol=1e-6, energy_tol=1e-8) -> list[CCRecord]:
    """Collapse records lying on one SO(2) orbit; keep the lowest residual."""
    classes: list[list[CCRecord]] = []
    for rec in sorted(records, key=_sort_key):
        for group in classes:
            if _same_class(group[0], rec, tol, energy_tol):
                group.append(rec)
                break
        else:
            classes.append([rec])
    return [min(g, key=lambda r: r.residual) for g in classes]


def _sort_key(rec: CCRecord):
    return (round(rec.U_value, 9), tuple(np.round(rec.configuration.points[:, :2].ravel(), 9)))


# -- census ---------------------------------------------------------------

def rescale_to_level(thetas, phis, masses, c) -> Configuration:
    """Dilate chart coordinates (theta, phi) -> s (theta, phi) until I = c."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    masses = np.asarray(masses, dtype=float)

    def excess(s):
        P = theta_phi_to_ambient(s * thetas, s * phis)
        return float(np.sum(masses * (P[:, 0] ** 2 + P[:, 1] ** 2))) - c

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi * max(np.max(np.abs(thetas)), np.max(np.abs(phis))) > 25:
            raise ValueError("cannot reach the level set inside the chart range")
    s = brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-15)
    cfg = Configuration.from_chart(s * thetas, s * phis, masses)
    # exact level through the graph-chart dilation, which scales I quadratically
    xy = _rescale_xy(cfg.points[:, :2], masses, c)
    return Configuration.from_graph(xy[:, 0], xy[:, 1], masses)


def draw_start(masses, c, rng, params: SearchParams, strategy="generic") -> Configuration:
    n = len(masses)
    a = params.start_range
    if strategy == "line":
        ts = rng.uniform(-a, a, n)
        cfg = rescale_to_level(ts, np.zeros(n), masses, c)
        return so2_rotate(cfg, rng.uniform(0.0, 2.0 * np.pi))
    return rescale_to_level(rng.uniform(-a, a, n), rng.uniform(-a, a, n), masses, c)


def classify(config: Configuration, tol_zero=None) -> tuple[SpectrumReport, bool]:
    """Hessian spectrum on T_q S_c and the geodesic flag of a canonical configuration."""
    sp = spectrum(constrained_hessian(config), tol_zero)
    r = np.hypot(config.points[:, 0], config.points[:, 1])
    is_geo = bool(np.max(np.abs(config.points[:, 1])) < 1e-8 * r.max())
    return sp, is_geo


def make_record(config: Configuration, lam: float, residual: float, tol_zero=None, provenance=None) -> CCRecord:
    cfg = canonicalize(config)
    sp, is_geo = classify(cfg, tol_zero)
    ordering = ordering_of(np.arcsinh(cfg.points[:, 0])) if is_geo else None
    return CCRecord(
        configuration=cfg,
        lam=float(lam),
        U_value=force_function(cfg),
        I_value=moment_of_inertia(cfg),
        residual=float(residual),
        spectrum=sp,
        is_geodesic=is_geo,
        ordering=ordering,
        provenance=dict(provenance or {}),
        min_distance=min_pair_distance(cfg),
    )


def run_trial(masses, c, params: SearchParams, t: int) -> CCRecord:
    """One census trial: start, flow, Newton, canonicalize (unclassified record)."""
    rng = np.random.default_rng([params.seed, t])
    every = params.line_start_every
    strategy = "line" if every and t % every == every - 1 else "generic"
    start = draw_start(masses, c, rng, params, strategy)
    cfg = flow_integrate(start, c, params)
    cfg, lam, res = newton_refine(cfg, c, params.newton_tol, params.newton_max_iter, params.newton_basin)
    if res >= params.tol_residual:
        raise NoConvergence(f"residual {res:.3e} above tolerance")
    dmin = min_pair_distance(cfg)
    if dmin < params.min_distance_floor:
        raise CollisionApproach(f"refined point has d = {dmin:.2e}")
    cfg = canonicalize(cfg)
    return CCRecord(
        configuration=cfg,
        lam=lam,
        U_value=force_function(cfg),
        I_value=moment_of_inertia(cfg),
        residual=res,
        provenance={"seed": params.seed, "trial": t, "strategy": strategy},
        min_distance=dmin,
    )


@dataclass
class CensusResult:
    records: list[CCRecord]
    masses: np.ndarray
    c: float
    params: SearchParams
    converged_trials: int = 0
    failures: Counter = field(default_factory=Counter)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def census(masses, c=1.0, params: SearchParams | None = None) -> CensusResult:
    """Random multistart search for CC classes on S_c, deduplicated and classified."""
    params = params or SearchParams()
    masses = np.asarray(masses, dtype=float)
    if len(masses) < 2 or np.any(masses <= 0):
        raise ValueError("need at least two positive masses")
    if c <= 0:
        raise ValueError("level c must be positive")
    found = []
    failures = Counter()
    for t in range(params.trials):
        try:
            found.append(run_trial(masses, c, params, t))
        except (HyperCCError, ValueError) as exc:
            failures[type(exc).__name__] += 1
            logger.debug("trial %d failed: %s", t, exc)
    classes = dedupe(found, params.dedupe_tol, params.energy_tol)
    records = []
    for rec in classes:
        sp, is_geo = classify(rec.configuration, params.tol_zero)
        rec.spectrum = sp
        rec.is_geodesic = is_geo
        rec.ordering = ordering_of(np.arcsinh(rec.configuration.points[:, 0])) if is_geo else None
        records.append(rec)
    records.sort(key=lambda r: (r.index, not r.is_geodesic, r.ordering or (), r.U_value))
    return CensusResult(records, masses, float(c), params, len(found), failures)


# -- collision exclusion ----------------------------------------------------

def collision_repulsion_witness(config: Configuration, clusters):
    """Bounded tangent vector along which dU -> -infinity near a collision.

    ``clusters`` is a partition of the body indices; the first cluster must
    hold at least two bodies.  In graph coordinates the vector is
    w_i^2 (x_i, y_i) on the first cluster, zero on middle clusters and
    w_i v0 on the last, with v0 the minimum-norm solution making dI(v) = 0.
    Returns ``(v, dU_v)`` with v an (N, 2) array.
    """
    clusters = [list(map(int, cl)) for cl in clusters]
    n = config.n
    flat = sorted(k for cl in clusters for k in cl)
    if flat != list(range(n)):
        raise ValueError("clusters must partition the bodies")
    if len(clusters) < 2 or len(clusters[0]) < 2:
        raise ValueError("need at least two clusters, the first with two or more bodies")
    p = config.points
    m = config.masses
    x, y, w = p[:, 0], p[:, 1], p[:, 2]
    first, last = clusters[0], clusters[-1]
    v = np.zeros((n, 2))
    v[first, 0] = w[first] ** 2 * x[first]
    v[first, 1] = w[first] ** 2 * y[first]
    coef = np.array([np.sum(m[last] * w[last] * x[last]), np.sum(m[last] * w[last] * y[last])])
    norm2 = float(coef @ coef)
    if norm2 < 1e-24:
        raise DegenerateCluster("last cluster has vanishing moment coefficients")
    target = -float(np.sum(m[first] * w[first] ** 2 * (x[first] ** 2 + y[first] ** 2)))
    v0 = target * coef / norm2
    v[last] = w[last][:, None] * v0[None, :]
    dU = float(chart_gradient(config, grad_U(config), "graph") @ v.T.reshape(-1))
    return v, dU


def witness_dI(config: Configuration, v) -> float:
    """dI(v) for a graph-chart vector v of shape (N, 2)."""
    v = np.asarray(v, dtype=float)
    return float(chart_gradient(config, grad_I(config), "graph") @ v.T.reshape(-1))
