"""Invariant suite run by ``kramers-hs verify``.

Each check returns a :class:`CheckResult`; nothing raises on a failed check
so the whole table is always produced.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import (
    ModelParameters,
    b_matrix,
    det2,
    kernel_full,
    kernel_reduced,
    lambda_det,
    lambda_tail_coefficient,
    omega_funcs,
    r_branch,
    s_matrix,
)
from .numerics import SQRT_PI, lambda0, lambda0_boundary
from .rhfactor import jacobi_residual
from .slip import KramersProblem, KramersSolution


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tolerance)


def _random_points(rng, n, scale=3.0):
    z = rng.uniform(-scale, scale, n) + 1j * rng.uniform(-scale, scale, n)
    return z[np.abs(z.imag) > 1e-3]


def determinant_identities(p: ModelParameters, seed=0, n=100):
    rng = np.random.default_rng(seed)
    mu, mup = rng.uniform(-4, 4, (2, n))
    z = _random_points(rng, n, 2.0)
    z = z[~p.cuts.contains(z, 1e-6)]
    o1, o2 = omega_funcs(z, p)
    errs = [
        np.abs(det2(kernel_full(mu, mup, p)) - p.gamma * (1 + p.omega * mu * mup)).max(),
        np.abs(det2(kernel_reduced(mup, p)) - p.gamma).max(),
        np.abs(det2(b_matrix(z, p)) + 0.125).max(),
        np.abs(det2(s_matrix(z, p)) - r_branch(z, p, check=False) / (16 * p.gamma)).max(),
        np.abs(lambda_det(z, p) - p.gamma * o1 * o2).max(),
    ]
    return CheckResult("determinant identities", float(max(errs)), 1e-10)


def sokhotsky_jump(seed=0, n=200):
    rng = np.random.default_rng(seed)
    mu = rng.uniform(-5, 5, n)
    jump = lambda0_boundary(mu, 1) - lambda0_boundary(mu, -1)
    err = np.abs(jump - 2j * SQRT_PI * mu * np.exp(-mu * mu)).max()
    return CheckResult("lambda0 jump across the real axis", float(err), 1e-10)


def lambda0_far_field(radius=100.0):
    z = radius * np.exp(1j * np.linspace(0.1, np.pi - 0.1, 9))
    approx = -1 / (2 * z ** 2) - 3 / (4 * z ** 4)
    err = np.abs(lambda0(z) / approx - 1).max()
    return CheckResult("lambda0 far field", float(err), 1e-6)


def dispersion_tail(p: ModelParameters, radius=100.0):
    z = radius * np.exp(1j * np.linspace(0.1, np.pi - 0.1, 9))
    c = lambda_tail_coefficient(p)
    err = np.abs(z * z * lambda_det(z, p) / c - 1).max()
    return CheckResult("z^2 lambda(z) tail", float(err), 1e-4)


def factorization_jump(sol: KramersSolution, n=100):
    f = sol.factor
    mu = np.linspace(8.0 / n, 8.0, n)
    xp, xm = f.x_matrix(mu, 1), f.x_matrix(mu, -1)
    err = np.linalg.norm(xp - f.jump_matrix(mu) @ xm, axis=(-2, -1)) / np.linalg.norm(xp, axis=(-2, -1))
    return CheckResult("X+ = G X- on the half-line", float(err.max()), 1e-6)


def cut_continuity(sol: KramersSolution, n=20):
    f, cuts = sol.factor, sol.params.cuts
    worst = 0.0
    for j in range(4):
        tau = cuts.sample(j, n)
        a, b = f.x_matrix(tau, 1), f.x_matrix(tau, -1)
        rel = np.linalg.norm(a - b, axis=(-2, -1)) / np.linalg.norm(a, axis=(-2, -1))
        worst = max(worst, float(rel.max()))
    return CheckResult("X continuous across the cuts of r", worst, 1e-6)


def jacobi(sol: KramersSolution):
    return CheckResult("Jacobi condition B_-1 = R_-1", float(jacobi_residual(sol.factor)), 1e-10)


def wall(sol: KramersSolution):
    return CheckResult("wall condition sup |h(0, mu)|", sol.wall_residual(), 1e-3)


def far_field(sol: KramersSolution, x=20.0, h=1e-3):
    U = sol.fields(np.array([x, x - h, x + h]))[0]
    s = sol.slip
    err = max(abs(U[0] - s.G_v * x - s.U_sl), abs((U[2] - U[1]) / (2 * h) - s.G_v))
    return CheckResult("far-field profile and gradient at x = 20", float(err), 1e-4)


def transport(sol: KramersSolution):
    err = sol.transport_residual([0.5, 2.0], np.linspace(-2.5, 2.5, 11) + 0.05)
    return CheckResult("transport-equation residual", err, 1e-4)


def linearity(p: ModelParameters):
    z = [KramersSolution(KramersProblem(p, g)).slip.zeta for g in (1e-3, 1.0, 10.0)]
    return CheckResult("zeta independent of G_v", float(max(z) - min(z)), 1e-12)


def run_all(p: ModelParameters, G_v=1.0):
    sol = KramersSolution(KramersProblem(p, G_v))
    return [
        determinant_identities(p),
        sokhotsky_jump(),
        lambda0_far_field(),
        dispersion_tail(p),
        factorization_jump(sol),
        cut_continuity(sol),
        jacobi(sol),
        wall(sol),
        far_field(sol),
        transport(sol),
        linearity(p),
    ]
