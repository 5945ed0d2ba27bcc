import numpy as np
import pytest
from scipy import integrate

from kramers_hs.dispersion import ModelParameters, r_branch
from kramers_hs.errors import DomainError, PhaseError
from kramers_hs.rhfactor import (
    build_phases,
    cauchy_A,
    cauchy_B,
    cauchy_R,
    factorize,
    jacobi_residual,
    laurent_moments,
    phases_at,
    solve_jacobi,
)

P = ModelParameters(4 / 15, 0.0)


@pytest.fixture(scope="module")
def fac():
    return factorize(P)


def test_phase_range_and_origin():
    mu = np.linspace(0, 8, 401)
    t1, t2 = phases_at(mu, P)
    assert t1[0] == 0 and t2[0] == 0
    assert np.all((t1 >= 0) & (t1 <= np.pi)) and np.all((t2 >= 0) & (t2 <= np.pi))
    assert abs(t1[-1] + t2[-1] - np.pi) < 1e-6


def test_phases_reject_large_gamma():
    with pytest.raises(PhaseError, match="4/5"):
        build_phases(ModelParameters(0.85))


def test_cauchy_integrals_far_field(fac):
    z = 200 * np.exp(1j * np.array([0.4, 1.5, 2.8]))
    A, B = fac.moments.A, fac.moments.B
    assert np.abs(z * cauchy_A(z, fac.phases) - A[0]).max() < 5e-3 * abs(A[0]) + 1e-3
    assert np.abs(z * cauchy_B(z, fac.phases) - B[0]).max() < 5e-3 * abs(B[0]) + 1e-3


def test_b_against_quad(fac):
    z = -1.0
    f = lambda t: (lambda a, b: (a - b + np.pi))(*phases_at(t, P)) / r_branch(t, P).real / (t - z)
    ref = integrate.quad(f, 0, 8, limit=400, epsabs=1e-13)[0] / (2 * np.pi)
    assert abs(cauchy_B(z, fac.phases) - ref) < 1e-10


def test_r_transform_limits(fac):
    assert cauchy_R(1 + 1j, 0.0, P) == 0
    z = -0.7
    ref = integrate.quad(lambda t: 1 / (r_branch(t, P).real * (t - z)), 0, fac.mu0, epsabs=1e-14)[0]
    assert abs(cauchy_R(z, fac.mu0, P) - ref) < 1e-12


def test_laurent_relations(fac):
    m = fac.moments
    assert m.p0 * m.q0 == pytest.approx(1.0, abs=1e-14)
    assert m.p_m1 + m.q_m1 == pytest.approx(-2 * m.A[0], abs=1e-14)


def test_moment_stability_under_doubling(fac):
    fine = build_phases(P, panels=64)
    mu0 = solve_jacobi(fine, P)
    m2 = laurent_moments(fine, mu0, P)
    assert abs(mu0 - fac.mu0) < 1e-10
    for a, b in zip(fac.moments.A + fac.moments.B, m2.A + m2.B):
        assert abs(a - b) < 1e-9


def test_jacobi(fac):
    assert fac.mu0 > 0
    assert jacobi_residual(fac) < 1e-10


def test_u_product(fac):
    z = np.array([1 + 1j, -2.0, -0.5 - 0.3j, 3j])
    u1, u2 = fac.u_factors(z)
    assert np.abs(u1 * u2 - np.exp(-2 * cauchy_A(z, fac.phases))).max() < 1e-12
    assert np.abs(fac.det_x(z) - u1 * u2).max() < 1e-12


def test_u1_has_pole_at_origin(fac):
    # U1 ~ c/z near 0: |z U1| tends to a finite nonzero limit
    vals = [abs(rho * fac.u_factors(rho * np.exp(2.0j))[0]) for rho in (1e-4, 1e-6)]
    assert vals[0] > 0 and abs(vals[0] - vals[1]) < 1e-3 * vals[1]


def test_x_jump(fac):
    mu = np.linspace(0.1, 8, 60)
    xp, xm = fac.x_matrix(mu, 1), fac.x_matrix(mu, -1)
    err = np.linalg.norm(xp - fac.jump_matrix(mu) @ xm, axis=(-2, -1)) / np.linalg.norm(xp, axis=(-2, -1))
    assert err.max() < 1e-6


def test_x_requires_side_on_half_line(fac):
    with pytest.raises(DomainError):
        fac.x_matrix(1.0)


@pytest.mark.parametrize("ray", range(4))
def test_x_continuous_across_cuts(fac, ray):
    tau = P.cuts.sample(ray, 12)
    a, b = fac.x_matrix(tau, 1), fac.x_matrix(tau, -1)
    rel = np.linalg.norm(a - b, axis=(-2, -1)) / np.linalg.norm(a, axis=(-2, -1))
    assert rel.max() < 1e-6


def test_printed_elements(fac):
    z = np.array([1 + 1j, -2.0, -0.5 - 0.3j, 3j, 5 + 2j])
    assert np.abs(fac.x_matrix(z) - fac.x_printed(z)).max() < 1e-12
    x = fac.x_matrix(z)
    u1, u2 = fac.u_factors(z)
    assert np.abs(x[:, 1, 0] - (u1 - u2) / (P.gamma * r_branch(z, P))).max() < 1e-12


def test_x_expansion_at_infinity(fac):
    z = 1000 * np.exp(1j * np.array([0.3, 1.2, 2.5, -0.7, -2.0]))
    x = fac.x_matrix(z)
    approx = fac.X0 + fac.Xm1 / z[:, None, None]
    assert np.abs(x - approx).max() < 1e-5
    # the 1/z term is visible at |z| = 200, so X itself is not within 1e-5 of X0
    z = 200 * np.exp(0.9j)
    assert np.abs(fac.x_matrix(z) - fac.X0).max() > 1e-4


def test_det_x_winding(fac):
    # det X = exp(-2A) has no zeros or poles: zero winding on a large circle
    t = np.linspace(0, 2 * np.pi, 801)[:-1] + 1e-3
    z = 50 * np.exp(1j * t)
    d = fac.det_x(z)
    wind = np.sum(np.angle(np.roll(d, -1) / d)) / (2 * np.pi)
    assert round(wind) == 0
