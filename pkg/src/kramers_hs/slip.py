"""Slip velocity, continuous-spectrum coefficient and field reconstruction.

The solution is written as h = h_as + (continuous-spectrum superposition),
where h_as(x, mu) = 2[U_sl + (x - 2 mu/(2 - omega)) G_v] (1, 0) is the
Chapman-Enskog asymptote. The superposition coefficient follows from the
function N(z) = -h_as(0, z) + X(z) Phi(z) once the polynomial-plus-pole
vector Phi is fixed by boundedness of N at 0, mu0 and infinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dispersion import ModelParameters, inv2, p_matrix, r_branch, s_matrix
from .errors import ConsistencyError, DegenerateError, DomainError, ParameterError, SignGateError
from .numerics import (
    SQRT_PI,
    as_side,
    cauchy_transform,
    divided_difference,
    full_range_hermite_rule,
    half_range_hermite_rule,
    lambda0_pv,
    semi_infinite_rule,
)
from .rhfactor import FactorSolution, factorize

DENOM_TOL = 1e-12
CROSS_CHECK_TOL = 1e-12
ORIGIN_RADIUS = 1e-9


@dataclass(frozen=True)
class KramersProblem:
    """Half-space shear flow with far-field gradient G_v (linear: G_v only scales)."""

    params: ModelParameters
    G_v: float = 1.0
    mu_max: float = 8.0
    panels: int = 32

    def __post_init__(self):
        if not np.isfinite(self.G_v):
            raise ParameterError("G_v must be finite")
        if self.params.degenerate:
            raise DegenerateError("gamma = 4/5 is degenerate: the z^-2 tail of lambda(z) vanishes")


@dataclass(frozen=True)
class SlipResult:
    U_sl: float
    zeta: float
    alpha1: float
    alpha0: float
    alpha_m1: float
    beta_m1: float
    delta: float
    mu0: float
    G_v: float
    q0: float
    q_m1: float


def alpha_fn(z, p: ModelParameters):
    """alpha(z) = (gamma/2)[r(z) - (z^2 - 9/2 + 4/gamma)]."""
    z = np.asarray(z, dtype=complex)
    g = p.gamma
    return 0.5 * g * (r_branch(z, p, check=False) - (z * z - 4.5 + 4.0 / g))


def kappa_fn(z, p: ModelParameters):
    """kappa(z) = (gamma/2)[r(z) + (z^2 - 9/2 + 4/gamma)]; kappa(0) = delta."""
    z = np.asarray(z, dtype=complex)
    g = p.gamma
    return 0.5 * g * (r_branch(z, p, check=False) + (z * z - 4.5 + 4.0 / g))


def alpha_prime(z, p: ModelParameters):
    """alpha'(z) = (gamma/2) z [(4 z^2 + 14 - 16/gamma)/(2 r) - 2]."""
    z = np.asarray(z, dtype=complex)
    g = p.gamma
    return 0.5 * g * z * ((4 * z * z + 14.0 - 16.0 / g) / (2 * r_branch(z, p, check=False)) - 2.0)


def residue_system(sol: FactorSolution, p: ModelParameters, G_v):
    """Coefficients of Phi that make N bounded at infinity, 0 and mu0.

    Returns a dict with alpha1, alpha0, alpha_m1, beta_m1 and delta.
    """
    g, mu0 = p.gamma, sol.mu0
    r0 = float(np.sqrt(p.c ** 2 + 8.0))
    delta = 0.5 * g * (r0 - 4.5 + 4.0 / g)
    a = float(alpha_fn(mu0, p).real)
    da = float(alpha_prime(mu0, p).real)
    denom = a + delta - mu0 * da
    if abs(denom) < DENOM_TOL:
        raise DegenerateError(f"alpha(mu0) + delta - mu0 alpha'(mu0) = {denom:.3e} vanishes")
    alpha1 = -4.0 * G_v / ((2.0 - p.omega) * sol.q0)
    alpha0 = -alpha1 * mu0 * (a + delta) / denom
    beta_m1 = mu0 * alpha0 / (a + delta)
    alpha_m1 = a * beta_m1
    return dict(alpha1=alpha1, alpha0=alpha0, alpha_m1=alpha_m1, beta_m1=beta_m1, delta=delta,
                alpha_mu0=a, dalpha_mu0=da)


def slip_from_factor(sol: FactorSolution, p: ModelParameters, G_v) -> SlipResult:
    res = residue_system(sol, p, G_v)
    mu0, a, da, delta = sol.mu0, res["alpha_mu0"], res["dalpha_mu0"], res["delta"]
    k = 2.0 * G_v / (2.0 - p.omega)
    U_sl = -k * (sol.q_m1 - mu0 * (a + delta) / (a + delta - mu0 * da))
    alt = 0.5 * sol.q0 * res["alpha0"] - k * sol.q_m1
    if abs(U_sl - alt) > CROSS_CHECK_TOL * max(1.0, abs(U_sl)):
        raise ConsistencyError(f"slip forms disagree: {U_sl!r} vs {alt!r}")
    zeta = U_sl / G_v if G_v != 0 else 0.0
    if G_v != 0 and not zeta > 0:
        raise SignGateError(
            f"slip coefficient {zeta:.6g} is not positive (gamma={p.gamma}, omega={p.omega}, "
            f"mu0={mu0:.6g}, q0={sol.q0:.6g}, q_m1={sol.q_m1:.6g}); check phase anchoring")
    return SlipResult(U_sl, zeta, res["alpha1"], res["alpha0"], res["alpha_m1"], res["beta_m1"],
                      delta, mu0, G_v, sol.q0, sol.q_m1)


def slip_velocity(problem: KramersProblem) -> SlipResult:
    """U_sl and zeta = U_sl/G_v for one parameter set."""
    sol = factorize(problem.params, problem.mu_max, problem.panels)
    return slip_from_factor(sol, problem.params, problem.G_v)


def normalized_zeta(zeta, p: ModelParameters):
    """(2 - omega) zeta / 2: removes the omega dependence of the gradient scaling."""
    return 0.5 * (2.0 - p.omega) * zeta


# ---------------------------------------------------------------------------
# Full solution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldProfile:
    x_nodes: np.ndarray
    U_y: np.ndarray
    Q_y: np.ndarray
    P_xy: np.ndarray
    wall_residual: float

    def rows(self):
        return zip(self.x_nodes, self.U_y, self.Q_y, self.P_xy)


class KramersSolution:
    """Everything needed to evaluate N, n and h for one problem.

    ``eta_panels`` and ``eta_grading`` control the composite rule used for
    the continuous-spectrum integrals; grading resolves the mild end-point
    structure of n at 0.
    """

    def __init__(self, problem: KramersProblem, eta_panels=48, eta_grading=10):
        self.problem = problem
        self.params = p = problem.params
        self.factor = factorize(p, problem.mu_max, problem.panels)
        self.slip = slip_from_factor(self.factor, p, problem.G_v)
        self.eta_rule = semi_infinite_rule(problem.mu_max, eta_panels, 16, eta_grading)
        self._radius = 0.5 * p.cuts.height

    # -- N(z) and its pieces ------------------------------------------------

    def _h_as_vec(self, x, mu):
        s = self.slip
        first = 2.0 * (s.U_sl + (x - 2.0 * mu / (2.0 - self.params.omega)) * s.G_v)
        return np.stack([first, np.zeros_like(first)], -1)

    def h_as(self, x, mu):
        x, mu = np.broadcast_arrays(np.asarray(x, float), np.asarray(mu, float))
        return self._h_as_vec(x, mu)

    def x_phi(self, z, side=0):
        """X(z) Phi(z) in a form free of cancellation near 0 and mu0."""
        side = as_side(side)
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) < ORIGIN_RADIUS):
            # end point of the half-line: inside this radius the Cauchy integrals
            # treat z as lying on the support and the representation breaks down
            raise DomainError(f"|z| >= {ORIGIN_RADIUS:g} required; N(0) is an off-axis limit")
        p, s, mu0 = self.params, self.slip, self.factor.mu0
        r = self.factor._r(z, side)
        e1, e2 = self.factor.e_factors(z, side)
        kap = divided_difference(lambda t: kappa_fn(t, p), 0.0, z, 1, self._radius)
        alp = divided_difference(lambda t: alpha_fn(t, p), mu0, z, 2, self._radius)
        f1 = (4.0 / r) * (s.alpha1 * (z - mu0) + s.alpha0 + s.beta_m1 * kap)
        f2 = z * (4.0 / r) * (-s.alpha1 + s.beta_m1 * alp)
        S = s_matrix(z, p, r)
        return (e1 * f1)[..., None] * S[..., :, 0] + (e2 * f2)[..., None] * S[..., :, 1]

    def N(self, z, side=0):
        """N(z) = -h_as(0, z) + X(z) Phi(z)."""
        z = np.asarray(z, dtype=complex)
        s = self.slip
        first = 2.0 * (s.U_sl - 2.0 * z * s.G_v / (2.0 - self.params.omega))
        h0 = np.stack([first, np.zeros_like(first)], -1)
        return -h0 + self.x_phi(z, side)

    # -- continuous spectrum -------------------------------------------------

    def _p_plus_inv(self, mu):
        return inv2(p_matrix(np.asarray(mu, float).astype(complex), self.params, side=1))

    def n_coefficient(self, mu, check=True):
        """n(mu) = -exp(-mu^2) [P^+(mu)]^-1 (X Phi)^-(mu), a real 2-vector for mu > 0."""
        mu = np.asarray(mu, dtype=float)
        if np.any(mu < 0):
            raise DomainError("n(mu) is defined for mu >= 0")
        xp = self.x_phi(mu.astype(complex), side=-1)
        n = -np.exp(-mu * mu)[..., None] * np.einsum("...ij,...j->...i", self._p_plus_inv(mu), xp)
        if check:
            scale = max(1.0, np.abs(n).max(initial=0.0))
            leak = np.abs(n.imag).max(initial=0.0)
            if leak > 1e-8 * scale:
                raise ConsistencyError(f"n(mu) has imaginary part {leak:.3e}")
        return n.real

    @cached_property
    def n_table(self):
        return self.n_coefficient(self.eta_rule.nodes)

    def _local_factor(self, mu):
        """-P_pv(mu) [P^+(mu)]^-1 (X Phi)^-(mu): the exp(mu^2) P n term at x = 0."""
        mu = np.asarray(mu, dtype=float)
        xp = self.x_phi(mu.astype(complex), side=-1)
        P = lambda0_pv(mu)[..., None, None] * np.eye(2) + _b_real(mu, self.params)
        v = -np.einsum("...ij,...jk,...k->...i", P, self._p_plus_inv(mu), xp)
        return v.real

    def continuous_part(self, x, mu, derivative=False):
        """Continuous-spectrum part of h(x, mu) (or of dh/dx with derivative=True).

        (1/sqrt(pi)) PV int exp(-x/eta) eta n(eta)/(eta - mu) d eta, plus for
        mu > 0 the local term exp(-x/mu) exp(mu^2) P(mu) n(mu).
        """
        x = float(x)
        mu = np.atleast_1d(np.asarray(mu, dtype=float))

        def weight(t):
            # exp(-x/t) * t, or its x-derivative -exp(-x/t)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                d = np.exp(-x / t) if x > 0 else np.ones_like(t)
            return -d if derivative else d * t

        t = self.eta_rule.nodes
        dens = weight(t)[:, None] * self.n_table
        out = np.zeros(mu.shape + (2,))
        pos = mu > 0
        if np.any(pos):
            at = weight(mu[pos])[:, None] * self.n_coefficient(mu[pos])
            for i in range(2):
                out[pos, i] = cauchy_transform(dens[:, i], self.eta_rule, mu[pos], 0, at[:, i]).real
        if np.any(~pos):
            for i in range(2):
                out[~pos, i] = cauchy_transform(dens[:, i], self.eta_rule, mu[~pos], 0).real
        out /= SQRT_PI
        if np.any(pos):
            loc = self._local_factor(mu[pos])
            out[pos] += (weight(mu[pos]) / mu[pos])[:, None] * loc
        return out

    def reconstruct_h(self, x, mu, derivative=False):
        """h(x, mu) as an array of shape (len(mu), 2); with derivative=True also dh/dx."""
        if x < 0:
            raise DomainError("x >= 0 required")
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        h = self._h_as_vec(np.full(mu.shape, float(x)), mu) + self.continuous_part(x, mu)
        if not derivative:
            return h
        dh = np.zeros_like(h)
        dh[:, 0] = 2.0 * self.slip.G_v
        dh += self.continuous_part(x, mu, derivative=True)
        return h, dh

    def wall_residual(self, mu=None):
        """sup over mu in (0, mu_max] of |h(0, mu)|."""
        if mu is None:
            mu = np.linspace(0.0, self.problem.mu_max, 201)[1:]
        return float(np.abs(self.reconstruct_h(0.0, mu)).max())

    # -- macroscopic fields --------------------------------------------------

    def _moment_integrals(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = self.eta_rule.nodes
        with np.errstate(over="ignore", divide="ignore"):
            decay = np.where(x[:, None] > 0, np.exp(-x[:, None] / t), 1.0)
        return decay @ (self.eta_rule.weights[:, None] * self.n_table)

    def fields(self, x):
        """(U_y, Q_y, P_xy) from the moment identities of the eigenmode expansion."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s, p = self.slip, self.params
        m = self._moment_integrals(x) / SQRT_PI
        U = s.U_sl + s.G_v * x + 0.5 * m[:, 0]
        Q = m[:, 1]
        P = np.full_like(x, -s.G_v / (2.0 - p.omega))
        return U, Q, P

    def fields_quadrature(self, x, nodes=48):
        """(U_y, Q_y, P_xy) by half-range Hermite quadrature of the reconstructed h (x > 0)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        rule = half_range_hermite_rule(nodes)
        mu = np.concatenate([-rule.nodes[::-1], rule.nodes])
        w = np.concatenate([rule.weights[::-1], rule.weights]) / (2 * SQRT_PI)
        g = self.params.gamma
        s = mu * mu - 0.5
        out = []
        for xi in x:
            h = self.reconstruct_h(xi, mu)
            a = h[:, 0] + g * s * h[:, 1]
            out.append((w @ a, w @ (s * h[:, 0] + g * (s * s + 2) * h[:, 1]), w @ (mu * a)))
        U, Q, P = np.array(out).T
        return U, Q, P

    def field_profile(self, x_grid, method="moments") -> FieldProfile:
        x_grid = np.asarray(x_grid, dtype=float)
        if np.any(x_grid < 0):
            raise DomainError("x >= 0 required")
        if method == "moments":
            U, Q, P = self.fields(x_grid)
        elif method == "quadrature":
            U, Q, P = self.fields_quadrature(x_grid)
        else:
            raise ValueError(f"unknown method {method!r}")
        return FieldProfile(x_grid, U, Q, P, self.wall_residual())

    def transport_residual(self, x_values, mu_values, nodes=48):
        """sup |mu h_x + h - (1/sqrt(pi)) int exp(-mu'^2) K(mu, mu') h(mu') dmu'| over a grid (x > 0)."""
        from .dispersion import transport_rhs

        half = half_range_hermite_rule(nodes)
        mu_q = np.concatenate([-half.nodes[::-1], half.nodes])
        w_q = np.concatenate([half.weights[::-1], half.weights])
        from .numerics import QuadratureRule

        rule = QuadratureRule(mu_q, w_q, "hermite-weighted", (-np.inf, np.inf))
        mu_values = np.asarray(mu_values, dtype=float)
        worst = 0.0
        for x in x_values:
            hq = self.reconstruct_h(x, mu_q)
            h, dh = self.reconstruct_h(x, mu_values, derivative=True)
            lhs = mu_values[:, None] * dh + h
            rhs = transport_rhs(mu_values, hq, rule, self.params)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst


def _b_real(mu, p):
    from .dispersion import b_matrix

    return b_matrix(mu, p).real


def solve(params: ModelParameters, G_v=1.0, **kw) -> KramersSolution:
    return KramersSolution(KramersProblem(params, G_v), **kw)
