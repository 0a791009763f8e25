"""Geodesic central configurations on H^1 = {y = 0} and their spectral structure.

An ordering is a tuple of 0-based body indices listed from left (smallest
theta) to right.  An ordering and its reversal describe the same class (a
half-turn maps one onto the other), so the lexicographically smaller of the
pair is the canonical representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from .errors import ConeViolation, InertiaMismatch, NoConvergence, OrderViolation, SizeLimit
from .geometry import Configuration
from .hessian import hessian_chart, inertia, spectrum

MAX_ORDERINGS = 10 ** 6


def canonical_ordering(perm) -> tuple[int, ...]:
    perm = tuple(int(k) for k in perm)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    return min(perm, perm[::-1])


def enumerate_orderings(n: int) -> list[tuple[int, ...]]:
    """All N!/2 canonical orderings, in lexicographic order."""
    if n < 2:
        raise ValueError("need at least two bodies")
    if math.factorial(n) // 2 > MAX_ORDERINGS:
        raise SizeLimit(f"N!/2 exceeds {MAX_ORDERINGS}")
    return [p for p in permutations(range(n)) if p < p[::-1]]


def ordering_of(thetas) -> tuple[int, ...]:
    return canonical_ordering(np.argsort(thetas, kind="stable"))


@dataclass
class GeodesicCC:
    thetas: np.ndarray
    masses: np.ndarray
    ordering: tuple[int, ...]
    c: float
    lam: float
    residual: float
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.masses)

    def configuration(self) -> Configuration:
        return Configuration.from_chart(self.thetas, np.zeros(self.n), self.masses)


# Reduced problem on H^1: U = sum m_i m_j coth|t_i - t_j|, I = sum m_i sinh^2 t_i.

def _reduced_terms(thetas, masses):
    diff = thetas[:, None] - thetas[None, :]
    n = len(masses)
    mm = np.outer(masses, masses)
    np.fill_diagonal(mm, 0.0)
    d = np.abs(diff)
    np.fill_diagonal(d, 1.0)
    csch2 = 1.0 / np.sinh(d) ** 2
    coth = 1.0 / np.tanh(d)
    gU = -np.sum(mm * csch2 * np.sign(diff), axis=1)
    off = -2.0 * mm * csch2 * coth
    HU = off.copy()
    HU[np.diag_indices(n)] = -np.sum(off, axis=1)
    gI = masses * np.sinh(2.0 * thetas)
    HI = np.diag(2.0 * masses * np.cosh(2.0 * thetas))
    I = float(np.sum(masses * np.sinh(thetas) ** 2))
    return gU, HU, gI, HI, I


def _system(thetas, lam, masses, c):
    gU, HU, gI, HI, I = _reduced_terms(thetas, masses)
    n = len(masses)
    F = np.concatenate([gU - lam * gI, [I - c]])
    Jac = np.zeros((n + 1, n + 1))
    Jac[:n, :n] = HU - lam * HI
    Jac[:n, n] = -gI
    Jac[n, :n] = gI
    return F, Jac


def _ordered(thetas, ordering) -> bool:
    return bool(np.all(np.diff(thetas[list(ordering)]) > 0))


def initial_thetas(masses, ordering, c) -> np.ndarray:
    """Equally spaced thetas in the given order, balanced so that
    sum m sinh t cosh t = 0, and scaled so that I = c."""
    masses = np.asarray(masses, dtype=float)
    n = len(masses)
    pos = np.empty(n)
    pos[list(ordering)] = np.arange(n) - 0.5 * (n - 1)

    def balanced(s):
        base = s * pos
        h = brentq(lambda h: np.sum(masses * np.sinh(2.0 * (base + h))), -30.0, 30.0, xtol=1e-15)
        return base + h

    def excess(s):
        return float(np.sum(masses * np.sinh(balanced(s)) ** 2)) - c

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    s = brentq(excess, 1e-12, hi, xtol=1e-15)
    return balanced(s)


def solve_geodesic(masses, ordering, c=1.0, max_iter=200, tol=1e-10, step_tol=1e-12, start=None) -> GeodesicCC:
    """Damped Newton solve of grad_t U = lam grad_t I, I = c on H^1 for one ordering.

    ``start`` optionally supplies initial thetas (a warm start, e.g. a solution
    at another level); it must respect the ordering.
    """
    masses = np.asarray(masses, dtype=float)
    ordering = canonical_ordering(ordering)
    if c <= 0:
        raise ValueError("level c must be positive")
    if len(ordering) != len(masses):
        raise ValueError("ordering length does not match the number of masses")
    if start is None:
        t = initial_thetas(masses, ordering, c)
    else:
        t = np.array(start, dtype=float)
        if t.shape != masses.shape or not _ordered(t, ordering):
            raise ValueError("warm start does not respect the ordering")
    gU, _, gI, _, _ = _reduced_terms(t, masses)
    lam = float(gU @ gI / (gI @ gI))
    F, Jac = _system(t, lam, masses, c)
    res = float(np.linalg.norm(F))
    for it in range(1, max_iter + 1):
        step = np.linalg.solve(Jac, -F)
        alpha = 1.0
        while True:
            t_new = t + alpha * step[:-1]
            lam_new = lam + alpha * step[-1]
            if _ordered(t_new, ordering):
                F_new, Jac_new = _system(t_new, lam_new, masses, c)
                res_new = float(np.linalg.norm(F_new))
                if res_new < res or res_new < tol:
                    break
            alpha *= 0.5
            if alpha < 1e-12:
                raise OrderViolation(
                    f"damped Newton stalled for ordering {ordering} (residual {res:.3e})"
                )
        t, lam, F, Jac, res = t_new, lam_new, F_new, Jac_new, res_new
        if res < tol and alpha * np.max(np.abs(step)) < max(step_tol, 1e-3 * res):
            break
        if res < 1e-3 * tol:
            break
    else:
        if res >= tol:
            raise NoConvergence(
                f"ordering {ordering}: residual {res:.3e} after {max_iter} steps", best=t, residual=res
            )
    if res >= tol:
        raise NoConvergence(f"ordering {ordering}: residual {res:.3e}", best=t, residual=res)
    return GeodesicCC(t, masses, ordering, float(c), float(lam), res, it)


def solve_all_geodesic(masses, c=1.0) -> list[GeodesicCC]:
    return [solve_geodesic(masses, o, c) for o in enumerate_orderings(len(masses))]


@dataclass
class SpectralMatrices:
    C: np.ndarray
    Mbar: np.ndarray
    A: np.ndarray
    H_phi: np.ndarray

    def factorization_error(self, lam: float) -> float:
        """Max entrywise |H_phi - C Mbar (A - 2 lam) C| relative to max |H_phi|."""
        n = len(self.A)
        rhs = self.C @ self.Mbar @ (self.A - 2.0 * lam * np.eye(n)) @ self.C
        return float(np.max(np.abs(self.H_phi - rhs)) / np.max(np.abs(self.H_phi)))


def build_spectral_matrices(g: GeodesicCC) -> SpectralMatrices:
    t = g.thetas
    m = g.masses
    n = g.n
    ch = np.cosh(t)
    d = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(d, 1.0)
    inv_s3 = 1.0 / np.sinh(d) ** 3
    np.fill_diagonal(inv_s3, 0.0)
    A = m[None, :] * inv_s3
    A[np.diag_indices(n)] = -np.sum(m[None, :] * ch[None, :] * inv_s3, axis=1) / ch
    pair = np.outer(m * ch, m * ch) * inv_s3
    H_phi = pair.copy()
    H_phi[np.diag_indices(n)] = -np.sum(pair, axis=1)
    H_phi -= 2.0 * g.lam * np.diag(m * ch ** 2)
    return SpectralMatrices(np.diag(ch), np.diag(m), A, H_phi)


@dataclass
class AEigenReport:
    eigenvalues: np.ndarray
    v1_residual: float
    v2_residual: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.v1_residual < 1e-9 and self.v2_residual < 1e-8 and self.margin > 0


def a_matrix_eigenstructure(g: GeodesicCC, sm: SpectralMatrices | None = None) -> AEigenReport:
    """Check A v1 = 0, A v2 = 2 lam v2, and every other eigenvalue < 2 lam.

    Residuals are relative, ||A v|| / (||A|| ||v||).  The margin is
    2 lam - (largest eigenvalue other than 0 and 2 lam); it must be positive.
    """
    sm = sm or build_spectral_matrices(g)
    A = sm.A
    v1, v2 = np.cosh(g.thetas), np.sinh(g.thetas)
    na = np.linalg.norm(A, 2)
    r1 = float(np.linalg.norm(A @ v1) / (na * np.linalg.norm(v1)))
    r2 = float(np.linalg.norm(A @ v2 - 2.0 * g.lam * v2) / (na * np.linalg.norm(v2)))
    ev = np.sort(np.linalg.eigvals(A).real)[::-1]
    # ev[0] ~ 0 and ev[1] ~ 2 lam; everything below must stay under 2 lam.
    margin = float(2.0 * g.lam - ev[2]) if g.n > 2 else float("inf")
    return AEigenReport(ev, r1, r2, margin)


@dataclass
class SylvesterReport:
    h_phi: tuple[int, int, int]
    a_shift: tuple[int, int, int]
    expected: tuple[int, int, int]
    factorization_error: float

    @property
    def ok(self) -> bool:
        return self.h_phi == self.a_shift == self.expected


def verify_inertia_via_sylvester(g: GeodesicCC) -> SylvesterReport:
    """Inertia of H_phi (symmetric Jacobi) against that of A - 2 lam (general eig)."""
    sm = build_spectral_matrices(g)
    n = g.n
    h = spectrum(sm.H_phi).inertia
    ev = np.linalg.eigvals(sm.A - 2.0 * g.lam * np.eye(n))
    if np.max(np.abs(ev.imag)) > 1e-8 * max(1.0, np.max(np.abs(ev.real))):
        raise InertiaMismatch("A - 2 lam has non-real eigenvalues")
    a = inertia(ev.real).inertia
    report = SylvesterReport(h, a, (n - 2, 1, 1), sm.factorization_error(g.lam))
    if not report.ok:
        raise InertiaMismatch(f"H_phi inertia {h}, A - 2 lam inertia {a}, expected {(n - 2, 1, 1)}")
    return report


def distance_inequalities_check(thetas) -> bool:
    """Both strict distance inequalities over all index triples of an increasing list.

    Compared in product form, e.g. k<i<j: sinh^3(t_j - t_k) cosh t_j >
    sinh^3(t_i - t_k) cosh t_i.
    """
    t = np.asarray(thetas, dtype=float)
    if t.ndim != 1 or np.any(np.diff(t) <= 0):
        raise ValueError("thetas must be strictly increasing")
    n = len(t)
    ch = np.cosh(t)
    for k in range(n):
        for i in range(k + 1, n):
            for j in range(i + 1, n):
                if not np.sinh(t[j] - t[k]) ** 3 * ch[j] > np.sinh(t[i] - t[k]) ** 3 * ch[i]:
                    return False
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if not np.sinh(t[k] - t[j]) ** 3 * ch[j] < np.sinh(t[k] - t[i]) ** 3 * ch[i]:
                    return False
    return True


def is_cone_boundary(u, g: GeodesicCC, tol=1e-12) -> bool:
    """True if u lies on the boundary of the cone K (minus the v1 ray)."""
    pos = list(np.argsort(g.thetas))
    z = (np.asarray(u, dtype=float) / np.cosh(g.thetas))[pos]
    gaps = np.diff(z)
    scale = max(1.0, float(np.max(np.abs(z))))
    in_plane = abs(np.sum(g.masses * np.cosh(g.thetas) * u)) <= tol * scale * np.sum(g.masses)
    if not in_plane or np.any(gaps < -tol * scale):
        return False
    equal = np.abs(gaps) <= tol * scale
    return bool(np.any(equal) and not np.all(equal))


@dataclass
class ConeReport:
    samples: int
    min_rate: float
    rates: np.ndarray

    @property
    def ok(self) -> bool:
        return self.samples == 0 or self.min_rate > 0


def cone_invariance_probe(g: GeodesicCC, samples=100, seed=0) -> ConeReport:
    """Sample boundary points of K and check the flow u' = A u pushes them inward.

    K = {u : sum m cosh(t) u = 0, u/cosh(t) nondecreasing along the ordering}.
    A boundary sample carries a block of equal ratios u_i/cosh t_i; the rate
    d/dt(u_j/cosh t_j - u_i/cosh t_i) across that block must be positive.
    """
    rng = np.random.default_rng(seed)
    n = g.n
    A = build_spectral_matrices(g).A
    ch = np.cosh(g.thetas)
    weight = g.masses * ch ** 2
    pos = np.argsort(g.thetas)
    rates = []
    while len(rates) < samples:
        if n < 3:
            # K is the single ray of v2; its boundary is only the origin.
            break
        z_sorted = np.sort(rng.normal(size=n))
        a = int(rng.integers(0, n - 1))
        b = int(rng.integers(a + 1, n))
        if b - a == n - 1:
            continue  # all ratios equal: a multiple of v1
        z_sorted[a:b + 1] = z_sorted[a:b + 1].mean()
        z = np.empty(n)
        z[pos] = z_sorted
        z -= np.sum(weight * z) / np.sum(weight)
        u = z * ch
        du = A @ u
        i, j = pos[a], pos[b]
        rates.append(du[j] / ch[j] - du[i] / ch[i])
    rates = np.asarray(rates)
    report = ConeReport(len(rates), float(rates.min()) if len(rates) else float("inf"), rates)
    if not report.ok:
        raise ConeViolation(f"flow leaves the cone: min rate {report.min_rate:.3e}")
    return report


def theta_block_restricted_eigenvalues(g: GeodesicCC) -> np.ndarray:
    """Eigenvalues of H_theta on the geodesic directions tangent to S_c."""
    n = g.n
    H = hessian_chart(g.configuration(), "theta_phi", g.lam)[:n, :n]
    gI = g.masses * np.sinh(2.0 * g.thetas)
    # orthonormal in the mass metric restricted to H^1: diag(m) on theta coordinates
    L = np.sqrt(g.masses)
    Z = null_space((gI / L)[None, :])
    B = Z / L[:, None]
    return np.linalg.eigvalsh(B.T @ H @ B)
