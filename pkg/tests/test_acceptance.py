"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed together in the
pytest terminal summary (see conftest.py) and also when this file is run
directly with ``python tests/test_acceptance.py``.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import fd_gradient, fd_hessian, random_config
from hypercc.cli import main
from hypercc.geodesic import (
    a_matrix_eigenstructure,
    build_spectral_matrices,
    solve_all_geodesic,
    solve_geodesic,
    verify_inertia_via_sylvester,
)
from hypercc.geometry import Configuration
from hypercc.hessian import hessian_chart, inertia
from hypercc.morse import IntPolynomial, census_report, morse_inequality_audit, poincare_polynomial
from hypercc.potential import (
    cc_residual,
    chart_gradient,
    force_function,
    grad_I,
    grad_U,
    lambda_numerator,
    lambda_numerator_closed_form,
    lambda_value,
    moment_of_inertia,
    moment_relations_check,
    moment_relations_scale,
)
from hypercc.search import SearchParams, census, collision_repulsion_witness, witness_dI

RESULTS = {}

CENSUS_MASSES = (1.0, 1.3, 0.8)
CENSUS_TRIALS = 5000


def record(k, ok, detail):
    RESULTS[k] = f"[{'PASS' if ok else 'FAIL'}] criterion {k:>2}: {detail}"
    print(RESULTS[k])
    assert ok, RESULTS[k]


def _mass_sets():
    rng = np.random.default_rng(2024)
    for n in (2, 3, 4):
        yield n, "equal:%d" % n
        yield n, ",".join(repr(float(m)) for m in rng.uniform(0.3, 3.0, n))


@pytest.fixture(scope="module")
def n3_census():
    t0 = time.perf_counter()
    result = census(CENSUS_MASSES, 1.0, SearchParams(trials=CENSUS_TRIALS, seed=7))
    return result, time.perf_counter() - t0


def test_criterion_01_geodesic_count_and_indices(capsys):
    t0 = time.perf_counter()
    problems = []
    for n, masses in _mass_sets():
        code = main(["geodesic", "--masses", masses, "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        recs = data["records"]
        if code != 0 or len(recs) != math.factorial(n) // 2:
            problems.append(f"N={n} {masses}: exit {code}, {len(recs)} records")
        for r in recs:
            if not (r["residual"] < 1e-10 and r["lambda"] < 0 and (r["index"], r["nullity"], r["n_plus"]) == (n - 2, 1, n)):
                problems.append(f"N={n} ordering {r['ordering']}")
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        record(1, not problems and elapsed < 10,
               f"geodesic counts 1/3/12 with inertia (N-2,1,N), {elapsed:.2f} s" + (f"; {problems[:3]}" if problems else ""))


def _geodesic_instances():
    rng = np.random.default_rng(77)
    for n in range(2, 7):
        for masses in (np.ones(n), rng.uniform(0.3, 3.0, n)):
            yield from solve_all_geodesic(masses, float(rng.uniform(0.5, 2.0)))


def test_criterion_02_a_matrix_eigenstructure(capsys):
    worst1 = worst2 = 0.0
    min_margin = math.inf
    count = 0
    for g in _geodesic_instances():
        rep = a_matrix_eigenstructure(g)
        worst1, worst2 = max(worst1, rep.v1_residual), max(worst2, rep.v2_residual)
        min_margin = min(min_margin, rep.margin)
        count += 1
    ok = worst1 < 1e-9 and worst2 < 1e-8 and min_margin > 0
    with capsys.disabled():
        record(2, ok, f"{count} CCs, max |Av1| rel {worst1:.1e}, max |Av2-2lam v2| rel {worst2:.1e}, "
                      f"min margin {min_margin:.3g}")


def test_criterion_03_factorization_and_sylvester(capsys):
    worst = 0.0
    bad = []
    count = 0
    for g in _geodesic_instances():
        sm = build_spectral_matrices(g)
        worst = max(worst, sm.factorization_error(g.lam))
        rep = verify_inertia_via_sylvester(g)
        if not (rep.h_phi == rep.a_shift == (g.n - 2, 1, 1)):
            bad.append((g.n, g.ordering))
        count += 1
    with capsys.disabled():
        record(3, worst < 1e-9 and not bad,
               f"{count} CCs N=2..6, factorization error {worst:.1e}, inertia (N-2,1,1) everywhere: {not bad}")


def test_criterion_04_two_body_closed_form(capsys):
    g = solve_geodesic([1.0, 1.0], (0, 1), 1.0)
    cfg = g.configuration()
    d = float(np.arccosh(-np.dot(cfg.points[0] * [1, 1, -1], cfg.points[1])))
    rel = abs(lambda_value(cfg) + 1 / math.sinh(d) ** 3) / (1 / math.sinh(d) ** 3)
    with capsys.disabled():
        record(4, rel < 1e-10, f"lambda = {lambda_value(cfg):.15g} vs -1/sinh^3 d, rel err {rel:.1e}")


def test_criterion_05_derivative_oracles(capsys):
    rng = np.random.default_rng(5)
    worst_g = worst_h = 0.0
    cases = 0
    for n in (2, 3, 4):
        for _ in range(8):
            cfg = random_config(rng, n, spread=1.0, min_distance=0.2)
            for chart in ("graph", "theta_phi"):
                u = cfg.coords(chart)
                at = lambda v: Configuration.from_coords(v, cfg.masses, chart)
                for fn, grad in ((force_function, grad_U), (moment_of_inertia, grad_I)):
                    exact = chart_gradient(cfg, grad(cfg), chart)
                    approx = fd_gradient(lambda v: fn(at(v)), u, 1e-5)
                    worst_g = max(worst_g, np.linalg.norm(exact - approx) / np.linalg.norm(exact))
                lam = lambda_value(cfg)
                H = hessian_chart(cfg, chart, lam)
                Hfd = fd_hessian(lambda v: force_function(at(v)) - lam * moment_of_inertia(at(v)), u, 1e-4)
                worst_h = max(worst_h, np.max(np.abs(H - Hfd)) / np.max(np.abs(H)))
            cases += 1
    with capsys.disabled():
        record(5, cases >= 20 and worst_g < 1e-6 and worst_h < 1e-5,
               f"{cases} configs x 2 charts, gradient rel err {worst_g:.1e}, Hessian rel err {worst_h:.1e}")


def test_criterion_06_lambda_and_moments(capsys, n3_census):
    rng = np.random.default_rng(6)
    negative = agree = True
    worst = 0.0
    for _ in range(1000):
        cfg = random_config(rng, int(rng.integers(2, 6)), spread=2.0, min_distance=1e-3)
        negative &= lambda_value(cfg) < 0
        a, b = lambda_numerator(cfg), lambda_numerator_closed_form(cfg)
        err = abs(a - b) / max(1.0, abs(a))
        worst = max(worst, err)
        agree &= err < 1e-10
    ccs = [g.configuration() for g in _geodesic_instances()] + [r.configuration for r in n3_census[0]]
    moment = max(moment_relations_check(c) / moment_relations_scale(c) for c in ccs)
    with capsys.disabled():
        record(6, negative and agree and moment < 1e-8,
               f"1000 configs: lambda < 0 {negative}, numerator gap {worst:.1e}; "
               f"{len(ccs)} CCs max moment {moment:.1e}")


def test_criterion_07_census_vs_bounds(capsys, n3_census):
    result, elapsed = n3_census
    geo = [r for r in result if r.is_geodesic]
    non_geo = len(result) - len(geo)
    ok = len(result) >= 5 and non_geo >= 2 and len(geo) == 3 and elapsed < 300
    with capsys.disabled():
        record(7, ok, f"{CENSUS_TRIALS} trials in {elapsed:.1f} s: {len(result)} classes, "
                      f"{non_geo} non-geodesic, {len(geo)} geodesic")


def test_criterion_08_morse_audit(capsys, n3_census):
    result, _ = n3_census
    rep = census_report(result.records, CENSUS_MASSES, 1.0)
    geo_only = morse_inequality_audit(IntPolynomial([0, 3]), poincare_polynomial(3))
    ok = rep.audit.valid and rep.audit.census_complete_hypothesis and not geo_only.census_complete_hypothesis
    with capsys.disabled():
        record(8, ok, f"M = {rep.M}, P = {rep.P}, R = {rep.audit.R} ({rep.audit.verdict}); "
                      f"3t vs 1 + 2t: {geo_only.verdict}")


def test_criterion_09_collision_witness(capsys):
    masses = [1.0, 1.3, 0.8]
    dI, dU, norms = [], [], []
    for eps in (1e-1, 1e-2, 1e-3):
        cfg = Configuration.from_chart([1.0, 1.0 + eps, -0.9], [0.6, 0.6 + 0.5 * eps, -0.3], masses)
        v, du = collision_repulsion_witness(cfg, [[0, 1], [2]])
        dI.append(abs(witness_dI(cfg, v)))
        dU.append(du)
        norms.append(np.linalg.norm(v))
    ratio = max(norms) / min(norms)
    ok = max(dI) < 1e-9 and ratio < 10 and dU[0] > dU[1] > dU[2] and dU[2] < -1e3
    with capsys.disabled():
        record(9, ok, f"max |dI(v)| {max(dI):.1e}, norm ratio {ratio:.3f}, dU(v) = "
                      + ", ".join(f"{x:.4g}" for x in dU))


def test_criterion_10_property_battery(capsys):
    t0 = time.perf_counter()
    code = main(["verify", "--n", "4", "--cases", "200", "--seed", "1"])
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        record(10, code == 0 and "FAIL" not in out and elapsed < 60,
               f"verify --n 4 --cases 200 exit {code} in {elapsed:.1f} s")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
