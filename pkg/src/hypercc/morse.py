"""Morse-theoretic bookkeeping for a census of CC classes.

All polynomial arithmetic is exact integer arithmetic; coefficients are stored
by ascending degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegenerateInput


class IntPolynomial:
    """Polynomial with integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        coeffs = [int(c) for c in coeffs]
        for c in coeffs:
            if not isinstance(c, int):
                raise TypeError("coefficients must be integers")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __eq__(self, other):
        if isinstance(other, IntPolynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == IntPolynomial([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def __call__(self, t: int) -> int:
        value = 0
        for c in reversed(self.coeffs):
            value = value * t + c
        return value

    def divmod_one_plus_t(self) -> tuple["IntPolynomial", int]:
        """Synthetic division by (1 + t): returns (quotient, remainder)."""
        if not self.coeffs:
            return IntPolynomial(), 0
        high_first = list(reversed(self.coeffs))
        acc = [high_first[0]]
        for c in high_first[1:]:
            acc.append(c - acc[-1])
        remainder = acc.pop()
        return IntPolynomial(reversed(acc)), remainder

    def format(self, var="t", unicode_powers=True) -> str:
        if not self.coeffs:
            return "0"
        sup = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                body = str(abs(c))
            else:
                power = "" if k == 1 else (str(k).translate(sup) if unicode_powers else f"^{k}")
                body = ("" if abs(c) == 1 else str(abs(c))) + var + power
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"

    def __str__(self):
        return self.format()


def _as_poly(x) -> IntPolynomial:
    return x if isinstance(x, IntPolynomial) else IntPolynomial([x])


def morse_polynomial(records, strict=True) -> IntPolynomial:
    """gamma_k = number of classes whose quotient index (n_minus) is k.

    With ``strict`` a degenerate record (nullity != 1) raises
    :class:`DegenerateInput`; otherwise it is counted at its n_minus anyway.
    """
    counts: dict[int, int] = {}
    for rec in records:
        sp = rec.spectrum
        if sp.n_zero != 1 and strict:
            raise DegenerateInput(f"class with nullity {sp.n_zero} breaks the Morse hypothesis")
        counts[sp.n_minus] = counts.get(sp.n_minus, 0) + 1
    if not counts:
        return IntPolynomial()
    return IntPolynomial([counts.get(k, 0) for k in range(max(counts) + 1)])


def poincare_polynomial(n: int) -> IntPolynomial:
    """(1 + 2t)(1 + 3t)...(1 + (N-1)t) for the quotient S_c / SO(2)."""
    if n < 2:
        raise ValueError("N must be at least 2")
    p = IntPolynomial([1])
    for k in range(2, n):
        p = p * IntPolynomial([1, k])
    return p


@dataclass
class MorseAudit:
    M: IntPolynomial
    P: IntPolynomial
    R: IntPolynomial | None
    remainder: int
    division_exact: bool
    R_nonnegative: bool
    degenerate_classes: int = 0

    @property
    def census_complete_hypothesis(self) -> bool:
        """M = P + (1 + t) R with R >= 0 holds for this census."""
        return self.division_exact and self.R_nonnegative

    @property
    def valid(self) -> bool:
        """The verdict is only meaningful when every class is nondegenerate."""
        return self.degenerate_classes == 0

    @property
    def verdict(self) -> str:
        if not self.valid:
            return "audit invalid: degenerate classes present"
        if self.census_complete_hypothesis:
            return "consistent with a complete census"
        return "census provably incomplete"


def morse_inequality_audit(M: IntPolynomial, P: IntPolynomial, degenerate_classes=0) -> MorseAudit:
    R, remainder = (M - P).divmod_one_plus_t()
    exact = remainder == 0
    nonneg = exact and all(c >= 0 for c in R.coeffs)
    return MorseAudit(M, P, R if exact else None, remainder, exact, nonneg, degenerate_classes)


def lower_bounds(n: int) -> tuple[int, int]:
    """(total, non_geodesic) = ((3N-4)(N-1)!/2, (2N-4)(N-1)!/2)."""
    if n < 2:
        raise ValueError("N must be at least 2")
    f = math.factorial(n - 1)
    return (3 * n - 4) * f // 2, (2 * n - 4) * f // 2


def geodesic_count(n: int) -> int:
    return math.factorial(n) // 2


@dataclass
class CensusReport:
    n: int
    masses: list
    c: float
    records: list
    M: IntPolynomial
    P: IntPolynomial
    audit: MorseAudit
    bounds: tuple[int, int]
    found_total: int
    found_non_geodesic: int
    found_geodesic: int
    expected_geodesic: int
    extra: dict = field(default_factory=dict)

    @property
    def total_bound_met(self) -> bool:
        return self.found_total >= self.bounds[0]

    @property
    def non_geodesic_bound_met(self) -> bool:
        return self.found_non_geodesic >= self.bounds[1]

    @property
    def bounds_met(self) -> bool:
        return self.total_bound_met and self.non_geodesic_bound_met


def census_report(records, masses, c, n=None) -> CensusReport:
    records = list(records)
    n = n if n is not None else len(masses)
    degenerate = sum(1 for r in records if r.spectrum.n_zero != 1)
    M = morse_polynomial(records, strict=False)
    P = poincare_polynomial(n)
    geo = sum(1 for r in records if r.is_geodesic)
    return CensusReport(
        n=n,
        masses=[float(m) for m in masses],
        c=float(c),
        records=records,
        M=M,
        P=P,
        audit=morse_inequality_audit(M, P, degenerate),
        bounds=lower_bounds(n),
        found_total=len(records),
        found_non_geodesic=len(records) - geo,
        found_geodesic=geo,
        expected_geodesic=geodesic_count(n),
    )
