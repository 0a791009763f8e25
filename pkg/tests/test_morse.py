import math
from types import SimpleNamespace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypercc.errors import DegenerateInput
from hypercc.morse import (
    IntPolynomial,
    census_report,
    lower_bounds,
    morse_inequality_audit,
    morse_polynomial,
    poincare_polynomial,
)


def rec(index, nullity=1, geodesic=False):
    return SimpleNamespace(spectrum=SimpleNamespace(n_minus=index, n_zero=nullity), is_geodesic=geodesic)


def test_polynomial_basics():
    assert IntPolynomial([1, 2, 0, 0]).coeffs == (1, 2)
    assert IntPolynomial([0, 0]).coeffs == ()
    p = IntPolynomial([1, 2]) * IntPolynomial([1, 3])
    assert p == IntPolynomial([1, 5, 6])
    assert p.format() == "1 + 5t + 6t²"
    assert IntPolynomial([-1, 1]).format() == "-1 + t"
    assert IntPolynomial().format() == "0"
    assert (p - p) == 0


@given(st.lists(st.integers(-50, 50), max_size=6))
def test_division_by_one_plus_t(coeffs):
    p = IntPolynomial(coeffs)
    q, r = p.divmod_one_plus_t()
    assert q * IntPolynomial([1, 1]) + r == p
    assert r == p(-1)


def test_morse_polynomial_examples():
    assert morse_polynomial([rec(0, geodesic=True)]) == IntPolynomial([1])
    assert morse_polynomial([rec(1)] * 3) == IntPolynomial([0, 3])
    assert morse_polynomial([]) == IntPolynomial()
    with pytest.raises(DegenerateInput):
        morse_polynomial([rec(1, nullity=2)])
    assert morse_polynomial([rec(1, nullity=2)], strict=False) == IntPolynomial([0, 1])


def test_poincare_polynomial():
    assert poincare_polynomial(2) == IntPolynomial([1])
    assert poincare_polynomial(3) == IntPolynomial([1, 2])
    assert poincare_polynomial(4) == IntPolynomial([1, 5, 6])
    for n in range(2, 10):
        P = poincare_polynomial(n)
        assert P(1) == math.factorial(n) // 2
        assert P[n - 2] == math.factorial(n - 1)
    with pytest.raises(ValueError):
        poincare_polynomial(1)


def test_audit_examples():
    P = poincare_polynomial(3)
    a = morse_inequality_audit(P, P)
    assert a.R == IntPolynomial() and a.division_exact and a.R_nonnegative
    a = morse_inequality_audit(IntPolynomial([2, 3]), P)
    assert a.R == IntPolynomial([1]) and a.census_complete_hypothesis
    assert a.verdict == "consistent with a complete census"
    a = morse_inequality_audit(IntPolynomial([0, 3]), P)
    assert not a.division_exact and a.R is None and a.remainder == -2
    assert a.verdict == "census provably incomplete"
    a = morse_inequality_audit(IntPolynomial([0, 1]), IntPolynomial([1]))
    assert a.division_exact is False
    a = morse_inequality_audit(IntPolynomial([1]), IntPolynomial([1, 5, 6]))
    assert not a.R_nonnegative or not a.division_exact


def test_lower_bounds():
    assert lower_bounds(2) == (1, 0)
    assert lower_bounds(3) == (5, 2)
    assert lower_bounds(4) == (24, 12)
    for n in range(2, 12):
        assert lower_bounds(n)[0] == 3 * math.factorial(n) // 2 - 2 * math.factorial(n - 1)


def test_census_report():
    r = census_report([rec(0, geodesic=True)], [1, 1], 1.0)
    assert r.found_geodesic == r.expected_geodesic == 1 and r.bounds_met
    r = census_report([rec(0), rec(0)] + [rec(1, geodesic=True)] * 3, [1, 1.3, 0.8], 1.0)
    assert r.bounds_met and r.audit.census_complete_hypothesis and r.found_non_geodesic == 2
    r = census_report([rec(0, nullity=2), rec(1, geodesic=True)], [1, 1, 1], 1.0)
    assert not r.audit.valid and "invalid" in r.audit.verdict
    assert not r.bounds_met and r.bounds == (5, 2)
