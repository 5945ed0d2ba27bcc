"""Discrete-ordinates half-space solver used to validate the analytic solution.

The velocity variable is replaced by a half-range Gauss rule for the weight
exp(-mu^2) on each side of mu = 0, which keeps the wall discontinuity at
mu = 0 out of the quadrature. The resulting ODE system
``M dh/dx = (C - I) h`` is solved in closed form from the eigenvectors of
``M^-1 (C - I)`` (analytical discrete ordinates): the deviation from the
Chapman-Enskog asymptote is a combination of the decaying modes only, and
the slip velocity enters as the coefficient of the constant mode.

Nothing here touches the Riemann-Hilbert machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .dispersion import ModelParameters, kernel_reduced
from .errors import ConvergenceError, DomainError
from .numerics import SQRT_PI, half_range_hermite_rule


@dataclass(frozen=True)
class OrdinateGrid:
    """Velocity nodes of both signs and a graded x mesh on [0, L]."""

    mu_nodes: np.ndarray
    weights: np.ndarray
    x_nodes: np.ndarray

    @property
    def order(self):
        return self.mu_nodes.size // 2

    @classmethod
    def build(cls, n=40, L=None, x_points=200):
        rule = half_range_hermite_rule(n)
        mu = np.concatenate([rule.nodes, -rule.nodes])
        w = np.concatenate([rule.weights, rule.weights])
        if L is None:
            # slowest mode decays like exp(-x/mu_max): e^{-L/mu_max} < 1e-12
            L = rule.nodes.max() * np.log(1e12)
        x = np.expm1(np.linspace(0.0, np.log1p(L), x_points))
        return cls(mu, w, x)


@dataclass(frozen=True)
class OracleProfile:
    x_nodes: np.ndarray
    U_y: np.ndarray
    Q_y: np.ndarray
    P_xy: np.ndarray
    wall_residual: float


@dataclass(frozen=True)
class OracleResult:
    zeta_num: float
    U_sl: float
    profile: OracleProfile
    iterations: int
    residual: float
    history: tuple = ()
    modes: object = field(default=None, repr=False)


class _Modes:
    """Closed-form discrete solution for one grid."""

    def __init__(self, p: ModelParameters, G_v, grid: OrdinateGrid):
        self.p, self.G_v, self.grid = p, G_v, grid
        mu, w = grid.mu_nodes, grid.weights
        n = mu.size
        K = kernel_reduced(mu, p).real                     # (n, 2, 2) over mu'
        row = 1.0 + p.omega * mu[:, None] * mu[None, :]    # first-row factor (mu, mu')
        C = np.empty((n, 2, n, 2))
        C[:, 0, :, :] = row[:, :, None] * K[None, :, 0, :]
        C[:, 1, :, :] = np.broadcast_to(K[None, :, 1, :], (n, n, 2))
        C *= (w / SQRT_PI)[None, None, :, None]
        C = C.reshape(2 * n, 2 * n)
        self.C = C
        A = (C - np.eye(2 * n)) / np.repeat(mu, 2)[:, None]
        lam, V = linalg.eig(A)
        order = np.argsort(lam.real)
        keep = order[: n - 1]                              # decaying modes
        # complex-conjugate pairs are kept complex; h is real in the end
        self.lam = lam[keep]
        self.V = V[:, keep]
        self.eig_residual = float(np.abs(A @ V[:, keep] - V[:, keep] * lam[keep]).max())
        half = n // 2
        const = np.zeros(2 * n)
        const[0::2] = 1.0
        rows = np.arange(2 * half)                         # mu > 0 rows come first
        M = np.column_stack([self.V[rows], const[rows]])
        rhs = np.zeros(2 * half, dtype=complex)
        rhs[0::2] = 4.0 * G_v * mu[:half] / (2.0 - p.omega)
        coef, *_ = linalg.lstsq(M, rhs)
        self.coef = coef[:-1]
        self.C0 = coef[-1].real
        self.bc_residual = float(np.abs(M @ coef - rhs).max()) if half else 0.0

    @property
    def U_sl(self):
        return 0.5 * self.C0

    def h(self, x):
        """h at every node for each x: shape (len(x), n, 2)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mu = self.grid.mu_nodes
        dev = ((np.exp(np.outer(x, self.lam)) * self.coef) @ self.V.T).real
        base = np.zeros((x.size, mu.size, 2))
        base[..., 0] = self.C0 + 2.0 * self.G_v * (x[:, None] - 2.0 * mu / (2.0 - self.p.omega))
        return base + dev.reshape(x.size, mu.size, 2)

    def dh(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mu = self.grid.mu_nodes
        dev = ((np.exp(np.outer(x, self.lam)) * self.coef * self.lam) @ self.V.T).real
        base = np.zeros((x.size, mu.size, 2))
        base[..., 0] = 2.0 * self.G_v
        return base + dev.reshape(x.size, mu.size, 2)

    def fields(self, x):
        h = self.h(x)
        mu, w = self.grid.mu_nodes, self.grid.weights / (2 * SQRT_PI)
        g = self.p.gamma
        s = mu * mu - 0.5
        a = h[..., 0] + g * s * h[..., 1]
        U = a @ w
        Q = (s * h[..., 0] + g * (s * s + 2) * h[..., 1]) @ w
        P = a @ (w * mu)
        return U, Q, P

    def transport_residual(self, x):
        """sup |mu h_x + h - C h| of the discrete system at the given x."""
        h = self.h(x).reshape(np.size(x), -1)
        dh = self.dh(x).reshape(np.size(x), -1)
        mu2 = np.repeat(self.grid.mu_nodes, 2)
        return float(np.abs(mu2 * dh + h - h @ self.C.T).max())


def solve_on_grid(p: ModelParameters, G_v, grid: OrdinateGrid) -> _Modes:
    return _Modes(p, G_v, grid)


def solve_halfspace(p: ModelParameters, G_v=1.0, grid: OrdinateGrid | None = None,
                    tol=1e-6, n_start=10, n_max=80, x_points=200) -> OracleResult:
    """Discrete-ordinates slip coefficient with order doubling until converged.

    Starting at ``n_start`` nodes per half-range, the order is doubled until
    successive slip coefficients agree to ``tol`` (relative). A supplied
    ``grid`` fixes the order and skips the convergence loop.
    """
    if not tol > 0:
        raise DomainError("tol > 0 required")
    if not np.isfinite(G_v):
        raise DomainError("G_v must be finite")
    history = []
    if grid is not None:
        modes = solve_on_grid(p, G_v, grid)
        history.append((grid.order, modes.U_sl))
    else:
        n, prev, modes = n_start, None, None
        while True:
            g = OrdinateGrid.build(n, x_points=x_points)
            modes = solve_on_grid(p, G_v, g)
            history.append((n, modes.U_sl))
            if prev is not None:
                scale = max(abs(modes.U_sl), 1e-300)
                if abs(modes.U_sl - prev) <= tol * scale or G_v == 0:
                    grid = g
                    break
            if 2 * n > n_max:
                raise ConvergenceError(
                    f"discrete-ordinates slip not converged to {tol:g} by n = {n}", history)
            prev, n = modes.U_sl, 2 * n
    U, Q, P = modes.fields(grid.x_nodes)
    profile = OracleProfile(grid.x_nodes, U, Q, P, modes.bc_residual)
    zeta = modes.U_sl / G_v if G_v != 0 else 0.0
    residual = max(modes.bc_residual, modes.transport_residual(grid.x_nodes[:: max(1, grid.x_nodes.size // 20)]))
    return OracleResult(zeta, modes.U_sl, profile, len(history), residual, tuple(history), modes)


def cross_validate(problem, x_max=10.0, x_points=41, tol=1e-6):
    """Compare the analytic solution with the discrete-ordinates oracle.

    ``problem`` is a KramersProblem. Returns a plain dict.
    """
    from .slip import KramersSolution

    ana = KramersSolution(problem)
    orc = solve_halfspace(problem.params, problem.G_v, tol=tol)
    x = np.linspace(0.0, x_max, x_points)
    Ua, Qa, Pa = ana.fields(x)
    Uo, Qo, Po = orc.modes.fields(x)
    sup = float(np.abs(Ua - Uo).max() / np.abs(Ua).max())
    h = 1e-3
    xg = np.array([20.0 - h, 20.0 + h])
    ga = np.diff(ana.fields(xg)[0])[0] / (2 * h)
    go = np.diff(orc.modes.fields(xg)[0])[0] / (2 * h)
    za, zo = ana.slip.zeta, orc.zeta_num
    return {
        "gamma": problem.params.gamma,
        "omega": problem.params.omega,
        "zeta_analytic": za,
        "zeta_oracle": zo,
        "relative_gap": abs(za - zo) / abs(za),
        "profile_sup_gap": sup,
        "gradient_analytic": ga,
        "gradient_oracle": go,
        "oracle_order": orc.history[-1][0],
    }
