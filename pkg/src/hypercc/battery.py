"""Randomized property battery behind ``hypercc verify``.

Every case draws fresh masses and configurations from one seeded generator and
runs each check once.  A check either passes or records the first failure
message; exceptions raised inside a check count as failures of that check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HyperCCError
from .geodesic import (
    a_matrix_eigenstructure,
    cone_invariance_probe,
    enumerate_orderings,
    solve_geodesic,
    verify_inertia_via_sylvester,
)
from .geodesic import distance_inequalities_check
from .geometry import Configuration, ambient_to_theta_phi, so2_rotate, theta_phi_to_ambient
from .hessian import constrained_hessian, spectrum
from .potential import (
    cc_residual,
    force_function,
    grad_I,
    gradient_field_X,
    lambda_denominator,
    lambda_numerator,
    lambda_numerator_closed_form,
    lambda_value,
    min_pair_distance,
    minkowski_dot,
    moment_of_inertia,
    moment_relations_check,
    moment_relations_scale,
)
from .search import collision_repulsion_witness, witness_dI

CHECKS = (
    "distance inequalities",
    "cone invariance",
    "SO(2) invariance of U and I",
    "tangency of X",
    "chart round-trips",
    "inertia chart-independence",
    "lambda negativity",
    "moment relations",
    "A eigenstructure",
    "Sylvester inertia",
    "collision witness",
)


@dataclass
class CheckTally:
    name: str
    passed: int = 0
    failed: int = 0
    first_failure: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class BatteryResult:
    n: int
    cases: int
    seed: int
    tallies: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.tallies.values())


def random_configuration(n, rng, spread=1.5, min_distance=0.05) -> Configuration:
    """Random noncollision configuration with masses in [0.5, 2]."""
    masses = rng.uniform(0.5, 2.0, n)
    while True:
        cfg = Configuration.from_chart(rng.uniform(-spread, spread, n), rng.uniform(-spread, spread, n), masses)
        if min_pair_distance(cfg) > min_distance and moment_of_inertia(cfg) > 1e-6:
            return cfg


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _check_distance(g, rng):
    return distance_inequalities_check(np.sort(g.thetas)), "inequality violated"


def _check_cone(g, rng):
    rep = cone_invariance_probe(g, samples=10, seed=int(rng.integers(2 ** 31)))
    return rep.ok, f"min rate {rep.min_rate:.3e}"


def _check_so2(cfg, rng):
    rot = so2_rotate(cfg, rng.uniform(0, 2 * np.pi))
    err = max(_rel(force_function(cfg), force_function(rot)), _rel(moment_of_inertia(cfg), moment_of_inertia(rot)))
    return err < 1e-12, f"relative change {err:.3e}"


def _check_tangency(cfg, rng):
    X = gradient_field_X(cfg)
    gI = grad_I(cfg)
    scale = np.linalg.norm(X) * np.linalg.norm(gI) + 1e-300
    level = abs(float(np.sum(minkowski_dot(X, gI)))) / scale
    sheet = float(np.max(np.abs(minkowski_dot(X, cfg.points)))) / (np.linalg.norm(X) * np.max(cfg.points[:, 2]) + 1e-300)
    return max(level, sheet) < 1e-10, f"dI(X) {level:.3e}, q.X {sheet:.3e}"


def _check_charts(cfg, rng):
    th, ph = ambient_to_theta_phi(cfg.points)
    back = theta_phi_to_ambient(th, ph)
    err1 = float(np.max(np.abs(back - cfg.points)) / np.max(np.abs(cfg.points)))
    g = Configuration.from_graph(cfg.points[:, 0], cfg.points[:, 1], cfg.masses)
    err2 = float(np.max(np.abs(g.points - cfg.points)) / np.max(np.abs(cfg.points)))
    return max(err1, err2) < 1e-12, f"round-trip error {max(err1, err2):.3e}"


def _check_chart_inertia(g, rng):
    cfg = g.configuration()
    a = spectrum(constrained_hessian(cfg, "graph")).inertia
    b = spectrum(constrained_hessian(cfg, "theta_phi")).inertia
    expected = (g.n - 2, 1, g.n)
    return a == b == expected, f"graph {a}, theta_phi {b}, expected {expected}"


def _check_lambda(cfg, rng):
    lam = lambda_value(cfg)
    direct, closed = lambda_numerator(cfg), lambda_numerator_closed_form(cfg)
    agree = abs(direct - closed) <= 1e-10 * max(1.0, abs(direct))
    den = lambda_denominator(cfg)
    return lam < 0 and agree and den > 0, f"lambda {lam:.3e}, numerators {direct:.6e} vs {closed:.6e}"


def _check_moments(g, rng):
    cfg = g.configuration()
    rel = moment_relations_check(cfg) / moment_relations_scale(cfg)
    res = cc_residual(cfg)
    return rel < 1e-8 and res < 1e-9, f"moment {rel:.3e}, residual {res:.3e}"


def _check_a_matrix(g, rng):
    rep = a_matrix_eigenstructure(g)
    return rep.ok, f"v1 {rep.v1_residual:.3e}, v2 {rep.v2_residual:.3e}, margin {rep.margin:.3e}"


def _check_sylvester(g, rng):
    rep = verify_inertia_via_sylvester(g)
    return rep.ok and rep.factorization_error < 1e-9, f"factorization error {rep.factorization_error:.3e}"


def _check_witness(n, rng):
    if n < 3:
        return True, "needs N >= 3"
    masses = rng.uniform(0.5, 2.0, n)
    k = int(rng.integers(2, n))
    # cluster of k bodies near one point, the rest spread elsewhere
    base = rng.uniform(0.5, 1.5)
    eps = 10.0 ** rng.uniform(-3, -1)
    th = np.concatenate([base + eps * np.arange(k), -base - 0.7 * np.arange(n - k)])
    ph = np.concatenate([rng.uniform(0.3, 0.8) + eps * rng.normal(size=k), rng.uniform(-0.8, -0.3, n - k)])
    cfg = Configuration.from_chart(th, ph, masses)
    clusters = [list(range(k)), list(range(k, n))]
    v, dU = collision_repulsion_witness(cfg, clusters)
    dI = witness_dI(cfg, v)
    return abs(dI) < 1e-9 * max(1.0, np.linalg.norm(v)) and dU < 0, f"dI(v) {dI:.3e}, dU(v) {dU:.3e}"


def run_battery(n=4, cases=20, seed=0) -> BatteryResult:
    if n < 2:
        raise ValueError("N must be at least 2")
    rng = np.random.default_rng(seed)
    orderings = enumerate_orderings(n)
    result = BatteryResult(n, cases, seed, {name: CheckTally(name) for name in CHECKS})

    def record(name, fn, arg):
        tally = result.tallies[name]
        try:
            ok, detail = fn(arg, rng)
        except (HyperCCError, ValueError, np.linalg.LinAlgError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        if ok:
            tally.passed += 1
        else:
            tally.failed += 1
            tally.first_failure = tally.first_failure or detail

    for _ in range(cases):
        masses = rng.uniform(0.5, 2.0, n)
        c = float(rng.uniform(0.3, 3.0))
        ordering = orderings[int(rng.integers(len(orderings)))]
        cfg = random_configuration(n, rng)
        try:
            g = solve_geodesic(masses, ordering, c)
        except HyperCCError as exc:
            for name in ("distance inequalities", "cone invariance", "inertia chart-independence",
                         "moment relations", "A eigenstructure", "Sylvester inertia"):
                result.tallies[name].failed += 1
                result.tallies[name].first_failure = result.tallies[name].first_failure or str(exc)
            g = None
        if g is not None:
            record("distance inequalities", _check_distance, g)
            record("cone invariance", _check_cone, g)
            record("inertia chart-independence", _check_chart_inertia, g)
            record("moment relations", _check_moments, g)
            record("A eigenstructure", _check_a_matrix, g)
            record("Sylvester inertia", _check_sylvester, g)
        record("SO(2) invariance of U and I", _check_so2, cfg)
        record("tangency of X", _check_tangency, cfg)
        record("chart round-trips", _check_charts, cfg)
        record("lambda negativity", _check_lambda, cfg)
        record("collision witness", _check_witness, n)
    return result
