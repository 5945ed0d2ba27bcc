"""Acceptance criteria, one test (or parametrized family) per criterion.

Each test records a PASS/FAIL line in ``conftest.ACCEPTANCE``; the lines are
printed in the terminal summary. Criteria that cannot be met are left failing.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, solution
from kramers_hs import checks
from kramers_hs.dispersion import ModelParameters
from kramers_hs.oracle import solve_halfspace
from kramers_hs.rhfactor import build_phases, factorize, jacobi_residual, solve_jacobi
from kramers_hs.slip import KramersProblem, KramersSolution

GRID = [(g, w) for g in (4 / 15, 0.3, 0.4) for w in (0.0, 0.5, 1.0)]


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_1_determinant_identities():
    t0 = time.perf_counter()
    res = checks.determinant_identities(ModelParameters(4 / 15, 0.5), seed=1, n=100)
    dt = time.perf_counter() - t0
    record("1 determinant identities", res.passed and dt < 1.0,
           f"max error {res.value:.2e} (< 1e-10), {dt:.2f} s (< 1 s)")


def test_2_lambda0_suite():
    jump = checks.sokhotsky_jump()
    far = checks.lambda0_far_field()
    record("2 lambda0 suite", jump.passed and far.passed,
           f"jump error {jump.value:.2e} (< 1e-10), far-field rel. error {far.value:.2e} (< 1e-6)")


@pytest.mark.parametrize("gamma", [0.2, 4 / 15, 0.4], ids=["0.2", "4/15", "0.4"])
def test_3_dispersion_tail(gamma):
    res = checks.dispersion_tail(ModelParameters(gamma, 0.0), radius=100.0)
    record(f"3 dispersion tail gamma={gamma:.4g}", res.passed,
           f"rel. error {res.value:.2e} (< 1e-4)")


@pytest.mark.parametrize("pair", [(4 / 15, 0.0), (0.4, 1.0)], ids=["g4/15-w0", "g0.4-w1"])
def test_4_factorization(pair):
    t0 = time.perf_counter()
    sol = KramersSolution(KramersProblem(ModelParameters(*pair)))
    jump = checks.factorization_jump(sol, n=100)
    cut = checks.cut_continuity(sol, n=20)
    dt = time.perf_counter() - t0
    record(f"4 factorization gamma={pair[0]:.4g} omega={pair[1]:g}",
           jump.passed and cut.passed and dt < 30.0,
           f"jump {jump.value:.2e}, cuts {cut.value:.2e} (< 1e-6), {dt:.1f} s (< 30 s)")


def test_5_jacobi_inversion():
    p = ModelParameters(4 / 15, 0.0)
    fac = factorize(p)
    res = jacobi_residual(fac)
    mu0_fine = solve_jacobi(build_phases(p, panels=64), p)
    drift = abs(mu0_fine - fac.mu0)
    record("5 Jacobi inversion", res < 1e-10 and drift < 1e-7,
           f"|B_-1 - R_-1| = {res:.2e} (< 1e-10), mu0 drift {drift:.2e} (< 1e-7)")


def test_6_regular_limits(base_solution):
    sol = base_solution
    scale = np.abs(sol.N(-1.0)).max()
    angles = (0.5, 1.5, 2.5, np.pi, -1.0, -2.5)
    # N ~ N(0) + O(z log z) near 0: limit sampled at 1e-8, approach radius 1e-6
    limit0 = np.mean([sol.N(1e-8 * np.exp(1j * a)) for a in angles], axis=0)
    dev0 = max(np.abs(sol.N(1e-6 * np.exp(1j * a)) - limit0).max() for a in angles)
    m0 = sol.factor.mu0
    up, down = sol.N(m0, side=1), sol.N(m0, side=-1)
    devm = max(np.abs(sol.N(m0 + 1e-6 * np.exp(1j * a)) - (up if np.sin(a) > 0 else down)).max()
               for a in (0.3, 1.5, 2.8, -0.3, -1.5, -2.8))
    worst = max(dev0, devm) / scale
    record("6 regularity near 0 and mu0", worst < 1e-3,
           f"max deviation / |N(-1)| = {worst:.2e} (< 1e-3)")


def test_6_decay_at_infinity(base_solution):
    vals = [np.abs(base_solution.N(500 * np.exp(1j * a))).max() for a in (0.3, 1.5, 2.8, -1.5)]
    worst = max(vals)
    record("6 decay at |z|=500", worst < 1e-4, f"max |N| = {worst:.2e} (< 1e-4)")


def test_7_wall_residual(base_solution):
    res = base_solution.wall_residual()
    record("7 wall residual", res < 1e-3, f"sup |h(0, mu)| = {res:.2e} (< 1e-3)")


def test_8_far_field(base_solution):
    sol, x, h = base_solution, 20.0, 1e-3
    U = sol.fields(np.array([x, x - h, x + h]))[0]
    s = sol.slip
    off = abs(U[0] - s.G_v * x - s.U_sl)
    grad = abs((U[2] - U[1]) / (2 * h) - s.G_v)
    record("8 far field", off < 1e-4 and grad < 1e-4,
           f"profile offset {off:.2e}, gradient error {grad:.2e} (< 1e-4)")


@pytest.mark.parametrize("pair", GRID, ids=[f"g{g:.4g}-w{w:g}" for g, w in GRID])
def test_9_oracle_equivalence(pair):
    t0 = time.perf_counter()
    za = solution(*pair).slip.zeta
    zo = solve_halfspace(ModelParameters(*pair)).zeta_num
    dt = time.perf_counter() - t0
    gap = abs(za - zo) / abs(za)
    record(f"9 oracle gamma={pair[0]:.4g} omega={pair[1]:g}", gap < 5e-3 and dt < 120.0,
           f"zeta {za:.10f} vs {zo:.10f}, rel. gap {gap:.2e} (< 5e-3), {dt:.1f} s (< 120 s)")


def test_10_linearity():
    z = [solution(4 / 15, 0.0, g).slip.zeta for g in (1e-3, 1.0, 10.0)]
    spread = max(z) - min(z)
    record("10 linearity", spread < 1e-12, f"zeta spread {spread:.2e} (< 1e-12)")
