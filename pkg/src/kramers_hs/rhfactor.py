"""Factorisation of the homogeneous matrix Riemann-Hilbert problem.

The coefficient matrix on the positive half-line is diagonalised by S(z);
each diagonal entry Omega_j = lambda0 + mu_j yields a scalar problem with
phase theta_j = arg Omega_j^+. The two scalar factors are coupled across the
cuts of r(z), which is repaired by the free point mu0 fixed by the Jacobi
condition. The resulting factor matrix is X(z) = S diag(U1, U2) S^-1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dispersion import (
    ModelParameters,
    b_matrix,
    det2,
    eigen_mu,
    inv2,
    lambda_matrix,
    r_branch,
    r_side,
    s_inv,
    s_matrix,
)
from .errors import BranchError, DomainError, JacobiError, PhaseError
from .numerics import (
    SQRT_PI,
    as_side,
    cauchy_transform,
    gauss_legendre_rule,
    lambda0_pv,
    log_ratio,
    semi_infinite_rule,
    subtracted_transform,
)

TAIL_TOL = 1e-6
MAX_REFINE = 4


def phases_at(mu, p: ModelParameters):
    """theta_j(mu) = arg Omega_j^+(mu) in [0, pi] at real mu >= 0."""
    mu = np.asarray(mu, dtype=float)
    # mu_j and lambda0_pv are real here; drop rounding noise in Im r
    m1, m2 = eigen_mu(mu.astype(complex), p)
    re0 = lambda0_pv(mu)
    im0 = SQRT_PI * mu * np.exp(-mu * mu)
    return np.arctan2(im0, re0 + m1.real), np.arctan2(im0, re0 + m2.real)


@dataclass(frozen=True)
class PhaseTable:
    """Phases of Omega_1^+ and Omega_2^+ tabulated on a composite rule over [0, mu_max]."""

    rule: object
    theta1: np.ndarray
    theta2: np.ndarray
    params: ModelParameters = field(repr=False)

    @property
    def grid(self):
        return self.rule.nodes

    @property
    def density_A(self):
        return self.theta1 + self.theta2 - np.pi

    @property
    def density_B(self):
        r = r_branch(self.grid, self.params, check=False).real
        return (self.theta1 - self.theta2 + np.pi) / r

    def exact_density_A(self, mu):
        t1, t2 = phases_at(mu, self.params)
        return t1 + t2 - np.pi

    def exact_density_B(self, mu):
        t1, t2 = phases_at(mu, self.params)
        return (t1 - t2 + np.pi) / r_branch(np.asarray(mu, float), self.params, check=False).real


def build_phases(p: ModelParameters, mu_max=8.0, panels=32, order=16, grading=0):
    """Tabulate theta_1, theta_2 and validate continuity and the tail.

    The phases lie in [0, pi] with theta_j(0) = 0, so no unwrapping is needed
    as long as the grid resolves them; a jump above pi/2 between neighbours
    triggers refinement (up to MAX_REFINE doublings). The tail condition
    theta1 + theta2 -> pi requires gamma < 4/5.
    """
    if p.gamma >= 0.8:
        raise PhaseError(
            f"gamma < 4/5 required for the phase structure (gamma = {p.gamma!r}); "
            "at larger gamma theta1 tends to pi and the A integral diverges")
    for _ in range(MAX_REFINE + 1):
        rule = semi_infinite_rule(mu_max, panels, order, grading)
        t1, t2 = phases_at(rule.nodes, p)
        jump = max(np.abs(np.diff(t1)).max(), np.abs(np.diff(t2)).max())
        if jump < np.pi / 2:
            break
        panels *= 2
    else:
        raise PhaseError(f"phase grid too coarse: jump {jump:.3f} rad after refinement")
    t1_end, t2_end = phases_at(mu_max, p)
    tail = abs(t1_end + t2_end - np.pi)
    if tail > TAIL_TOL:
        raise PhaseError(f"phase tail |theta1 + theta2 - pi| = {tail:.3e} at mu_max = {mu_max}")
    return PhaseTable(rule, t1, t2, p)


# ---------------------------------------------------------------------------
# Cauchy integrals
# ---------------------------------------------------------------------------

def _on_support(z, lo, hi):
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real >= lo) & (z.real <= hi)


def _at_exact(z, fn, lo, hi):
    """Exact density values for real targets in the support, else None."""
    z = np.asarray(z, dtype=complex)
    if np.all(_on_support(z, lo, hi)):
        return fn(z.real)
    return None


def cauchy_A(z, phases: PhaseTable, side=0):
    """A(z) = (1/2pi) int_0^inf (theta1 + theta2 - pi)/(mu - z) dmu."""
    lo, hi = phases.rule.interval
    at = _at_exact(z, phases.exact_density_A, lo, hi)
    return cauchy_transform(phases.density_A, phases.rule, z, side, at) / (2 * np.pi)


def cauchy_B(z, phases: PhaseTable, side=0):
    """B(z) = (1/2pi) int_0^inf (theta1 - theta2 + pi)/(r(mu) (mu - z)) dmu."""
    lo, hi = phases.rule.interval
    at = _at_exact(z, phases.exact_density_B, lo, hi)
    return cauchy_transform(phases.density_B, phases.rule, z, side, at) / (2 * np.pi)


def r_rule(mu0, panels=8, order=16):
    return gauss_legendre_rule(0.0, mu0, panels, order)


def cauchy_R(z, mu0, p: ModelParameters, side=0, rule=None):
    """R(z) = int_0^mu0 dtau/(r(tau) (tau - z)); zero for mu0 = 0."""
    z = np.asarray(z, dtype=complex)
    if mu0 <= 0:
        return np.zeros_like(z)[()]
    rule = rule or r_rule(mu0)
    vals = 1.0 / r_branch(rule.nodes, p, check=False).real
    at = 1.0 / r_branch(z, p, check=False)
    return cauchy_transform(vals, rule, z, side, at)


def jacobi_lhs(phases: PhaseTable):
    """(1/2pi) int_0^inf (theta1 - theta2 + pi)/r dmu, i.e. -B_{-1}."""
    return phases.rule.integrate(phases.density_B) / (2 * np.pi)


def _int_inv_r(m0, p, panels=8, order=16):
    if m0 <= 0:
        return 0.0
    rule = r_rule(m0, panels, order)
    return rule.integrate(1.0 / r_branch(rule.nodes, p, check=False).real)


def solve_jacobi(phases: PhaseTable, p: ModelParameters, panels=8):
    """Unique mu0 > 0 with int_0^mu0 dtau/r = (1/2pi) int (theta1-theta2+pi)/r."""
    target = jacobi_lhs(phases)
    # int_0^inf 1/r: finite part on [0, 64] plus the 1/tau^2 tail
    ceiling = _int_inv_r(64.0, p, 64) + 1.0 / 64.0
    if not 0 < target < ceiling:
        raise JacobiError(
            f"Jacobi condition has no solution: target {target:.6g} outside (0, {ceiling:.6g})")
    f = lambda m: _int_inv_r(m, p, panels) - target
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 64.0:
            raise JacobiError(f"Jacobi root not bracketed below 64 (target {target:.6g})")
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


# ---------------------------------------------------------------------------
# Laurent data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentMoments:
    """Coefficients of the 1/z^k expansions of A, B and R and of U1, U2 at infinity."""

    A: tuple
    B: tuple
    R: tuple

    @property
    def p0(self):
        return np.exp(-(self.B[1] - self.R[1]))

    @property
    def q0(self):
        return 1.0 / self.p0

    @property
    def p_m1(self):
        return -self.A[0] - (self.B[2] - self.R[2])

    @property
    def q_m1(self):
        return -self.A[0] + (self.B[2] - self.R[2])


def laurent_moments(phases: PhaseTable, mu0, p: ModelParameters, kmax=3):
    """Moments F_{-k} = -int tau^(k-1) f(tau) dtau for k = 1..kmax."""
    t, rule = phases.grid, phases.rule
    dA = phases.density_A / (2 * np.pi)
    dB = phases.density_B / (2 * np.pi)
    rr = r_rule(mu0)
    dR = 1.0 / r_branch(rr.nodes, p, check=False).real
    ks = range(1, kmax + 1)
    A = tuple(-rule.integrate(t ** (k - 1) * dA) for k in ks)
    B = tuple(-rule.integrate(t ** (k - 1) * dB) for k in ks)
    R = tuple(-rr.integrate(rr.nodes ** (k - 1) * dR) for k in ks)
    return LaurentMoments(A, B, R)


# ---------------------------------------------------------------------------
# Factor solution
# ---------------------------------------------------------------------------

ILL_CONDITIONED_Q = 1e-20


@dataclass(frozen=True)
class FactorSolution:
    """mu0, Laurent data and evaluators for U1, U2 and X(z)."""

    params: ModelParameters
    phases: PhaseTable = field(repr=False)
    mu0: float
    moments: LaurentMoments
    _rrule: object = field(repr=False, default=None)

    @property
    def p0(self):
        return self.moments.p0

    @property
    def q0(self):
        return self.moments.q0

    @property
    def p_m1(self):
        return self.moments.p_m1

    @property
    def q_m1(self):
        return self.moments.q_m1

    @property
    def X0(self):
        g, p0, q0 = self.params.gamma, self.p0, self.q0
        return np.array([[q0, 4 * (g - 1) * (p0 - q0)], [0.0, p0]])

    @property
    def Xm1(self):
        g = self.params.gamma
        a, b = self.q0 * self.q_m1, self.p0 * self.p_m1
        return np.array([[a, 4 * (g - 1) * (b - a)], [0.0, b]])

    # -- scalar pieces ------------------------------------------------------

    def _r(self, z, side):
        z = np.asarray(z, dtype=complex)
        if side and np.any(self.params.cuts.contains(z, tol=1e-10)):
            return r_side(z, self.params, side)
        if np.any(self.params.cuts.contains(z)):
            raise BranchError("evaluation on a cut of r needs side=+1 or -1")
        return r_branch(z, self.params, check=False)

    def _check(self, z, side):
        z = np.asarray(z, dtype=complex)
        if side == 0 and np.any((z.imag == 0) & (z.real > 0)):
            raise DomainError("U and X jump on the positive half-line; pass side=+1 or -1")

    def log_factors(self, z, side=0):
        """(log E1, log E2, L) with U1 = E1 e^L, U2 = E2 e^-L, L = log((z - mu0)/z).

        E1 and E2 are analytic and zero-free at 0 and mu0.
        """
        side = as_side(side)
        self._check(z, side)
        z = np.asarray(z, dtype=complex)
        p = self.params
        r = self._r(z, side)
        A = cauchy_A(z, self.phases, side)
        B = cauchy_B(z, self.phases, side)
        rr = self._rrule or r_rule(self.mu0)
        vals = 1.0 / r_branch(rr.nodes, p, check=False).real
        I = subtracted_transform(vals, rr, z, 1.0 / r)
        L = log_ratio(z, 0.0, self.mu0, side)
        le1 = -A - r * B + r * I
        le2 = -A + r * B - r * I
        return le1, le2, L

    def u_factors(self, z, side=0):
        le1, le2, L = self.log_factors(z, side)
        return np.exp(le1 + L), np.exp(le2 - L)

    def e_factors(self, z, side=0):
        le1, le2, _ = self.log_factors(z, side)
        return np.exp(le1), np.exp(le2)

    def x_matrix(self, z, side=0):
        """X(z) = S(z) diag(U1, U2) S(z)^-1."""
        side = as_side(side)
        z = np.asarray(z, dtype=complex)
        p = self.params
        if np.any(np.abs((z * z + p.c) ** 2 + 8.0) < ILL_CONDITIONED_Q):
            raise BranchError("X(z) is ill-conditioned at a branch point of r")
        r = self._r(z, side)
        u1, u2 = self.u_factors(z, side)
        S = s_matrix(z, p, r)
        Si = s_inv(z, p, r)
        D = np.zeros(z.shape + (2, 2), dtype=complex)
        D[..., 0, 0] = u1
        D[..., 1, 1] = u2
        return S @ D @ Si

    def x_printed(self, z, side=0):
        """Element formulas written in terms of U1, U2 and r; used as a cross-check."""
        z = np.asarray(z, dtype=complex)
        g = self.params.gamma
        r = self._r(z, side)
        u1, u2 = self.u_factors(z, side)
        s, d = u1 + u2, u1 - u2
        w = z * z - 4.5 + 4.0 / g
        x11 = 0.5 * s - 0.5 * w * d / r
        x22 = 0.5 * s + 0.5 * w * d / r
        x12 = (2.0 / r) * (2 * z * z * (g - 1) + 1) * d
        x21 = d / (g * r)
        return np.stack([np.stack([x11, x12], -1), np.stack([x21, x22], -1)], -2)

    def jump_matrix(self, mu):
        """G(mu) = [Lambda^+(mu)]^-1 Lambda^-(mu) on the positive half-line."""
        p = self.params
        return inv2(lambda_matrix(mu, p, side=1)) @ lambda_matrix(mu, p, side=-1)

    def det_x(self, z, side=0):
        return det2(self.x_matrix(z, side))


def factorize(p: ModelParameters, mu_max=8.0, panels=32, order=16) -> FactorSolution:
    """Full homogeneous factorisation for one parameter set."""
    phases = build_phases(p, mu_max, panels, order)
    mu0 = solve_jacobi(phases, p)
    moments = laurent_moments(phases, mu0, p)
    return FactorSolution(p, phases, mu0, moments, r_rule(mu0))


def jacobi_residual(sol: FactorSolution):
    """|B_{-1} - R_{-1}| at the solved mu0."""
    return abs(sol.moments.B[0] - sol.moments.R[0])
