import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from kramers_hs.dispersion import (
    BranchCutGeometry,
    ModelParameters,
    attached_solutions,
    b_matrix,
    det2,
    eigen_mu,
    inv2,
    kernel_full,
    kernel_reduced,
    lambda_det,
    lambda_matrix,
    lambda_offset,
    omega_funcs,
    p_matrix,
    q_poly,
    r_branch,
    r_side,
    s_inv,
    s_matrix,
    transport_rhs,
)
from kramers_hs.errors import BranchError, ParameterError
from kramers_hs.numerics import SQRT_PI, lambda0, lambda0_boundary

P = ModelParameters(4 / 15, 0.5)
RNG = np.random.default_rng(7)
Z = (RNG.uniform(-2.5, 2.5, 50) + 1j * RNG.uniform(-0.6, 0.6, 50))


def test_from_physical_examples():
    p = ModelParameters.from_physical(2 / 3, 1.0, 1.0)
    assert p.omega == 0 and p.gamma == pytest.approx(4 / 15, rel=1e-15)
    p = ModelParameters.from_physical(2 / 3, 0.75, 1.0)
    assert p.omega == pytest.approx(0.5) and p.gamma == pytest.approx(0.4)
    p = ModelParameters.from_physical(2 / 3, 1.0, 1.0, m=2.0, k=1.0, T=3.0)
    assert p.nu == pytest.approx(1.5) and p.beta == pytest.approx(1 / 3)


def test_parameter_domain_errors():
    with pytest.raises(ParameterError, match="gamma > 0"):
        ModelParameters.from_physical(1.0, 1.0, 1.0)
    with pytest.raises(ParameterError, match="omega < 2"):
        ModelParameters(0.3, 2.0)
    with pytest.raises(ParameterError):
        ModelParameters.from_physical(-1.0, 1.0, 1.0)
    assert ModelParameters(0.8).degenerate
    assert not ModelParameters(0.3).degenerate


@settings(max_examples=100, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4))
def test_kernel_determinants(mu, mup):
    assert abs(det2(kernel_full(mu, mup, P)) - P.gamma * (1 + P.omega * mu * mup)) < 1e-10
    assert abs(det2(kernel_reduced(mup, P)) - P.gamma) < 1e-10


def test_kernel_structure():
    p0 = ModelParameters(0.3, 0.0)
    mu = np.linspace(-3, 3, 7)
    assert np.allclose(kernel_full(mu, mu[::-1], p0), kernel_reduced(mu[::-1], p0))
    k = kernel_reduced(np.sqrt(0.5), P)
    assert abs(k[0, 1]) < 1e-15
    for m in (0.0, 1.0, -2.0):
        assert det2(kernel_reduced(m, P)) == pytest.approx(P.gamma)
        assert np.allclose(inv2(kernel_reduced(m, P)) @ kernel_reduced(m, P), np.eye(2), atol=1e-14)
    mu, mup = 0.7, -1.3
    E11 = np.diag([1.0, 0.0])
    expect = kernel_reduced(mup, P) + P.omega * mu * mup * E11 @ kernel_reduced(mup, P)
    assert np.allclose(kernel_full(mu, mup, P), expect, atol=1e-15)


def test_lambda_matrix_forms():
    l0 = lambda0(Z)
    K = kernel_reduced(Z, P)
    L = lambda_matrix(Z, P)
    assert np.abs(L - (l0[:, None, None] * K + lambda_offset(Z, P))).max() < 1e-12
    assert np.allclose(L[:, 0, 0], l0)
    g, s = P.gamma, Z * Z - 0.5
    explicit = np.stack([
        np.stack([l0, g * l0 * s + g / 2], -1),
        np.stack([0.5 * l0 * s + 0.25, 0.5 * g * (s * s + 2) * l0 + 1 + 0.25 * g * (Z * Z - 4.5)], -1),
    ], -2)
    assert np.abs(L - explicit).max() < 1e-12


def test_lambda_matrix_by_quadrature():
    z = 1 + 1j
    def entry(i, j, part):
        f = lambda t: (np.exp(-t * t) * kernel_reduced(t, P)[i, j] / (t - z))
        return integrate.quad(lambda t: getattr(f(t), part), -12, 12, epsabs=1e-13, limit=200)[0]
    M = np.array([[entry(i, j, "real") + 1j * entry(i, j, "imag") for j in range(2)] for i in range(2)])
    brute = np.eye(2) + z / SQRT_PI * M
    assert np.abs(brute - lambda_matrix(z, P)).max() < 1e-9


def test_b_and_p_matrices():
    for z in (0.0, 2.0, 1 + 1j):
        assert det2(b_matrix(z, P)) == pytest.approx(-1 / 8, abs=1e-14)
    direct = inv2(kernel_reduced(Z, P)) @ lambda_matrix(Z, P)
    assert np.abs(p_matrix(Z, P) - direct).max() < 1e-12
    mu = np.linspace(-3, 3, 13)
    jump = p_matrix(mu, P, 1) - p_matrix(mu, P, -1)
    dl = lambda0_boundary(mu, 1) - lambda0_boundary(mu, -1)
    assert np.abs(jump - dl[:, None, None] * np.eye(2)).max() < 1e-14


def test_q_and_r():
    r0 = r_branch(0.0, P)
    assert r0 ** 2 == pytest.approx((3.5 - 4 / P.gamma) ** 2 + 8)
    assert np.allclose(r_branch(Z, P) ** 2, q_poly(Z, P))
    for mu in (0.0, 1.0, 5.0):
        v = r_branch(mu, P)
        assert v.real > 0 and abs(v.imag) < 1e-12
    m1, m2 = eigen_mu(Z, P)
    assert np.abs(m1 * m2 + 1 / 8).max() < 1e-12
    assert np.abs(m1 + m2 + 0.25 * (Z * Z + 3.5 - 4 / P.gamma)).max() < 1e-12
    big = np.array([300.0, -300.0, 300j * 1e-3 + 300])
    c = 3.5 - 4 / P.gamma
    assert np.abs(r_branch(big, P) - big ** 2 - c).max() < 1e-3


def test_branch_geometry():
    cuts = BranchCutGeometry.for_gamma(P.gamma)
    a = cuts.a
    assert a.real > 0 and a.imag > 0
    assert abs(q_poly(a, P)) < 1e-10
    assert a ** 2 == pytest.approx(4 / P.gamma - 3.5 + 1j * np.sqrt(8))
    assert cuts.contains(a + 1.0) and cuts.contains(-a - 2.0) and not cuts.contains(0.0)
    with pytest.raises(BranchError):
        r_branch(a + 1.0, P)


@pytest.mark.parametrize("ray", range(4))
def test_r_flips_across_cuts(ray):
    tau = P.cuts.sample(ray, 10)
    for eps in (1e-6, 1e-9):
        s = r_branch(tau + 1j * eps, P) + r_branch(tau - 1j * eps, P)
        assert np.abs(s).max() < 1e3 * eps * np.abs(r_branch(tau + 1j * eps, P)).max()
    assert np.allclose(r_side(tau, P, 1), r_branch(tau + 1e-9j, P), rtol=1e-7)
    assert np.allclose(r_side(tau, P, -1), -r_side(tau, P, 1))


def test_similarity():
    S, Si = s_matrix(Z, P), s_inv(Z, P)
    assert np.abs(S @ Si - np.eye(2)).max() < 1e-12
    assert np.abs(det2(S) - r_branch(Z, P) / (16 * P.gamma)).max() < 1e-12
    assert np.abs(Si - inv2(S)).max() < 1e-12
    m1, m2 = eigen_mu(Z, P)
    D = Si @ b_matrix(Z, P) @ S
    assert np.abs(D[:, 0, 0] - m1).max() < 1e-12 and np.abs(D[:, 1, 1] - m2).max() < 1e-12
    assert np.abs(D[:, 0, 1]).max() < 1e-12 and np.abs(D[:, 1, 0]).max() < 1e-12
    with pytest.raises(BranchError):
        s_inv(P.cuts.a, P, r=0.0)


@pytest.mark.parametrize("ray", range(4))
def test_t_matrix_is_the_swap(ray):
    tau = P.cuts.sample(ray, 8)
    sp = s_matrix(tau, P, r_side(tau, P, 1))
    sm = s_matrix(tau, P, r_side(tau, P, -1))
    T = inv2(sp) @ sm
    assert np.abs(T - np.array([[0, 1], [1, 0]])).max() < 1e-10


def test_dispersion_function():
    o1, o2 = omega_funcs(Z, P)
    assert np.abs(lambda_det(Z, P) - P.gamma * o1 * o2).max() < 1e-12
    assert np.abs(lambda_det(Z, P) - det2(lambda_matrix(Z, P))).max() < 1e-12
    assert np.allclose(lambda_det(np.conj(Z), P), np.conj(lambda_det(Z, P)))


def test_attached_solutions_satisfy_transport():
    from kramers_hs.numerics import full_range_hermite_rule

    rule = full_range_hermite_rule(30)
    rng = np.random.default_rng(3)
    for p in (P, ModelParameters(0.4, 1.0)):
        for x in rng.uniform(0, 5, 3):
            mu = rng.uniform(-3, 3, 5)
            h1q, h2q = attached_solutions(x, rule.nodes, p)
            h1, h2 = attached_solutions(x, mu, p)
            for hq, h, dh in ((h1q, h1, 0.0), (h2q, h2, 1.0)):
                lhs = h.copy()
                lhs[:, 0] += mu * dh
                rhs = transport_rhs(mu, hq, rule, p)
                assert np.abs(lhs - rhs).max() < 1e-10
