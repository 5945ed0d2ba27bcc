"""Model constants and the algebraic objects of the reduced transport equation.

The unknown is the 2-vector h(x, mu) whose components carry the velocity and
heat-flux perturbations. Matrices are plain numpy arrays of shape
``(..., 2, 2)`` so that every function broadcasts over a grid of arguments.

Branch conventions
------------------
``r(z) = sqrt(q(z))`` with ``q(z) = (z^2 + c)^2 + 8`` and ``c = 7/2 - 4/gamma``.
The zeros of q are ``+-a`` and ``+-conj(a)`` with ``a = sqrt(-c + i sqrt(8))``
in the first quadrant. The branch used here is the product of four principal
square roots; its cuts are horizontal rays from ``a`` and ``conj(a)`` to
``+inf`` and from ``-a`` and ``-conj(a)`` to ``-inf``. On the strip between
the cuts r is positive on the real axis and behaves like ``z^2`` at infinity.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BranchError, ParameterError
from .numerics import SQRT_PI, lambda0_any

DEGENERATE_GAMMA = 0.8


@dataclass(frozen=True)
class ModelParameters:
    """Dimensionless constants of the kinetic model.

    ``gamma`` weights the heat-flux relaxation and ``omega`` the stress
    relaxation. The optional physical inputs are kept for reporting only.
    """

    gamma: float
    omega: float = 0.0
    Pr: float | None = None
    D: float | None = None
    nu_star: float | None = None
    nu: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and np.isfinite(self.omega)):
            raise ParameterError("gamma and omega must be finite")
        if not self.gamma > 0:
            raise ParameterError(f"gamma > 0 violated (gamma = {self.gamma!r})")
        if not self.omega < 2:
            raise ParameterError(f"omega < 2 violated (omega = {self.omega!r})")

    @property
    def degenerate(self) -> bool:
        """True at gamma = 4/5, where the z^-2 tail of the dispersion function vanishes."""
        return abs(self.gamma - DEGENERATE_GAMMA) < 1e-12

    @property
    def c(self) -> float:
        return 3.5 - 4.0 / self.gamma

    @classmethod
    def from_physical(cls, Pr, D, nu_star, m=None, k=None, T=None):
        """Build the model constants from Prandtl number, self-diffusion and viscosity.

        ``m``, ``k`` and ``T`` (molecular mass, Boltzmann constant,
        temperature) are optional; when all are given the collision frequency
        ``nu = kT/(mD)`` and ``beta = m/(2kT)`` are filled in as well.
        """
        for name, v in (("Pr", Pr), ("D", D), ("nu_star", nu_star)):
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} > 0 violated ({name} = {v!r})")
        omega = 2.0 * (1.0 - D / nu_star)
        gamma = 0.8 * (1.0 - (1.0 - omega / 2.0) * Pr)
        nu = beta = None
        if m is not None and k is not None and T is not None:
            if min(m, k, T) <= 0:
                raise ParameterError("m, k, T > 0 violated")
            nu = k * T / (m * D)
            beta = m / (2.0 * k * T)
        return cls(gamma, omega, Pr=Pr, D=D, nu_star=nu_star, nu=nu, beta=beta)

    @cached_property
    def cuts(self) -> "BranchCutGeometry":
        return BranchCutGeometry.for_gamma(self.gamma)


def _z(z):
    return np.asarray(z, dtype=complex)


def _mat(a11, a12, a21, a22):
    a11, a12, a21, a22 = np.broadcast_arrays(a11, a12, a21, a22)
    return np.stack([np.stack([a11, a12], -1), np.stack([a21, a22], -1)], -2)


def det2(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2(m):
    d = det2(m)[..., None, None]
    return _mat(m[..., 1, 1], -m[..., 0, 1], -m[..., 1, 0], m[..., 0, 0]) / d


# ---------------------------------------------------------------------------
# Kernels and the dispersion matrix
# ---------------------------------------------------------------------------

def kernel_reduced(mu_p, p: ModelParameters):
    """K(mu') of the reduced equation; det K = gamma."""
    s = _z(mu_p) ** 2 - 0.5
    g = p.gamma
    return _mat(np.ones_like(s), g * s, 0.5 * s, 0.5 * g * (s * s + 2.0))


def kernel_full(mu, mu_p, p: ModelParameters):
    """K(mu, mu') = K(mu') with its first row multiplied by 1 + omega mu mu'."""
    k = kernel_reduced(mu_p, p)
    f = 1.0 + p.omega * _z(mu) * _z(mu_p)
    k, f = np.broadcast_arrays(k, f[..., None, None])
    k = k.copy()
    k[..., 0, :] *= f[..., 0, :]
    return k


def lambda_offset(z, p: ModelParameters):
    """The polynomial part A(z) in Lambda(z) = lambda0(z) K(z) + A(z)."""
    z = _z(z)
    g = p.gamma
    return _mat(np.zeros_like(z), np.full_like(z, g / 2), np.full_like(z, 0.25),
                1.0 + 0.25 * g * (z * z - 4.5))


def lambda_matrix(z, p: ModelParameters, side=0):
    """Dispersion matrix Lambda(z); on the real axis ``side`` selects the boundary value."""
    z = _z(z)
    l0 = lambda0_any(z, side)
    return l0[..., None, None] * kernel_reduced(z, p) + lambda_offset(z, p)


def b_matrix(z, p: ModelParameters):
    """B(z) = K(z)^-1 A(z); det B = -1/8."""
    z = _z(z)
    g = p.gamma
    z2 = z * z
    return _mat(-(z2 - 0.5) / 4.0, (g - 1.0) * z2 + 0.5,
                np.full_like(z, 1.0 / (4.0 * g)), np.full_like(z, 1.0 / g - 1.0))


def p_matrix(z, p: ModelParameters, side=0):
    """P(z) = K(z)^-1 Lambda(z) = lambda0(z) E + B(z)."""
    z = _z(z)
    l0 = lambda0_any(z, side)
    return l0[..., None, None] * np.eye(2) + b_matrix(z, p)


def lambda_det(z, p: ModelParameters, side=0):
    """Dispersion function lambda(z) = det Lambda(z)."""
    z = _z(z)
    g = p.gamma
    l0 = lambda0_any(z, side)
    return g * l0 * l0 + (1.0 - 0.25 * g * (z * z + 3.5)) * l0 - g / 8.0


def lambda_tail_coefficient(p: ModelParameters) -> float:
    """Leading coefficient of z^2 lambda(z) at infinity: (5 gamma/4 - 1)/2."""
    return 0.5 * (1.25 * p.gamma - 1.0)


# ---------------------------------------------------------------------------
# Branch function r(z) and the diagonalising similarity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchCutGeometry:
    """Branch points of r(z) and the four horizontal cuts.

    ``rays[j] = (start, direction)`` with direction +1 (toward +inf) or -1.
    Order: from a, from -conj(a) (upper half-plane), from -a, from conj(a)
    (lower half-plane).
    """

    a: complex
    rays: tuple

    @classmethod
    def for_gamma(cls, gamma):
        c = 3.5 - 4.0 / gamma
        a = complex(np.sqrt(complex(-c, np.sqrt(8.0))))
        rays = ((a, 1), (-a.conjugate(), -1), (-a, -1), (a.conjugate(), 1))
        return cls(a, rays)

    @property
    def height(self) -> float:
        return self.a.imag

    def distance(self, z):
        """Distance from z to the union of the cuts."""
        z = _z(z)
        d = np.full(z.shape, np.inf)
        for start, sign in self.rays:
            along = sign * (z.real - start.real)
            dx = np.where(along > 0, 0.0, along)
            d = np.minimum(d, np.hypot(dx, z.imag - start.imag))
        return d

    def contains(self, z, tol=1e-12):
        return self.distance(z) <= tol * (1.0 + np.abs(_z(z)))

    def sample(self, ray, n, extent=8.0):
        """n points along a ray, starting just off the branch point."""
        start, sign = self.rays[ray]
        t = np.linspace(0.05, extent, n)
        return start + sign * t


def q_poly(z, p: ModelParameters):
    z2 = _z(z) ** 2
    return (z2 + p.c) ** 2 + 8.0


def _r_raw(z, a):
    ac = np.conj(a)
    return np.sqrt(a - z) * np.sqrt(ac - z) * np.sqrt(z + a) * np.sqrt(z + ac)


def r_branch(z, p: ModelParameters, check=True):
    """r(z) = sqrt(q(z)) on the cut plane, positive on the real axis."""
    z = _z(z)
    if check and np.any(p.cuts.contains(z)):
        raise BranchError("r(z) is evaluated on a branch cut")
    out = _r_raw(z, p.cuts.a)
    return out[()] if out.ndim == 0 else out


def r_side(z, p: ModelParameters, side):
    """Boundary value of r on a cut, from above (side=+1) or below (side=-1).

    Off the cuts this is just r(z). On a cut each square-root factor whose
    argument lies on the negative real axis gets a signed-zero imaginary part
    matching the approach direction.
    """
    z = _z(z)
    a = p.cuts.a
    ac = np.conj(a)
    shape = z.shape
    z = np.atleast_1d(z)
    on = p.cuts.contains(z, tol=1e-10)
    out = np.ones(z.shape, dtype=complex)
    for f, sgn in ((a - z, -1.0), (ac - z, -1.0), (z + a, 1.0), (z + ac, 1.0)):
        snap = on & (np.abs(f.imag) <= 1e-10 * (1.0 + np.abs(f))) & (f.real < 0)
        f = f.copy()
        f.imag[snap] = np.copysign(0.0, sgn * side)
        out = out * np.sqrt(f)
    return out.reshape(shape)[()]


def eigen_mu(z, p: ModelParameters, r=None):
    """Eigenvalues (mu1, mu2) = (t + r)/8, (t - r)/8 of B(z), t = -(z^2 + c).

    The smaller-magnitude root is taken from mu1 mu2 = -1/8 to avoid
    cancellation.
    """
    z = _z(z)
    if r is None:
        r = r_branch(z, p, check=False)
    t = -(z * z + p.c)
    plus, minus = t + r, t - r
    big = np.abs(plus) >= np.abs(minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = np.where(big, plus / 8.0, -1.0 / minus)
        m2 = np.where(big, -1.0 / plus, minus / 8.0)
    return m1, m2


def s_matrix(z, p: ModelParameters, r=None):
    """Columns are eigenvectors of B(z) for mu1 and mu2; det S = r/(16 gamma)."""
    m1, m2 = eigen_mu(z, p, r)
    g = p.gamma
    k = np.full_like(m1, 1.0 / (4.0 * g))
    return _mat(m1 - 1.0 / g + 1.0, m2 - 1.0 / g + 1.0, k, k)


def s_inv(z, p: ModelParameters, r=None):
    """Closed-form inverse (4/r)[[1, g(r+w)/2], [-1, g(r-w)/2]], w = z^2 - 9/2 + 4/g."""
    z = _z(z)
    if r is None:
        r = r_branch(z, p, check=False)
    r = np.asarray(r, dtype=complex)
    if np.any(np.abs(r) < 1e-10):
        raise BranchError("S(z) is singular at a branch point of r")
    g = p.gamma
    w = z * z - 4.5 + 4.0 / g
    one = np.ones_like(w)
    return (4.0 / r)[..., None, None] * _mat(one, 0.5 * g * (r + w), -one, 0.5 * g * (r - w))


def omega_funcs(z, p: ModelParameters, side=0, r=None):
    """Omega_j(z) = lambda0(z) + mu_j(z), the eigenvalues of P(z)."""
    z = _z(z)
    l0 = lambda0_any(z, side)
    m1, m2 = eigen_mu(z, p, r)
    return l0 + m1, l0 + m2


# ---------------------------------------------------------------------------
# Transport operator (used to check reconstructed solutions)
# ---------------------------------------------------------------------------

def collision_moments(h, rule, p: ModelParameters):
    """(1/sqrt(pi)) int exp(-mu'^2) K(mu') h(mu') dmu' for h tabulated on a full-range rule.

    ``rule`` must be Hermite weighted; ``h`` has shape (..., n, 2).
    Returns (m, m_mu) where m_mu uses the extra factor mu' for the omega term.
    """
    K = kernel_reduced(rule.nodes, p).real
    kh = np.einsum("nij,...nj->...ni", K, h)
    w = rule.weights / SQRT_PI
    m = np.einsum("n,...ni->...i", w, kh)
    m_mu = np.einsum("n,...ni->...i", w * rule.nodes, kh)
    return m, m_mu


def transport_rhs(mu, h, rule, p: ModelParameters):
    """Right-hand side (1/sqrt(pi)) int exp(-mu'^2) K(mu, mu') h(mu') dmu' at velocities mu."""
    m, m_mu = collision_moments(h, rule, p)
    mu = np.asarray(mu, dtype=float)
    out = np.broadcast_to(m[..., None, :], m.shape[:-1] + mu.shape + (2,)).copy()
    out[..., 0] += p.omega * mu * m_mu[..., None, 0]
    return out


def attached_solutions(x, mu, p: ModelParameters):
    """The two solutions belonging to the point at infinity.

    h1 = (1, 0) and h2 = (x - 2 mu/(2 - omega)) (1, 0); returns arrays of shape
    (..., 2) broadcast over x and mu.
    """
    x, mu = np.broadcast_arrays(np.asarray(x, float), np.asarray(mu, float))
    zero = np.zeros_like(x)
    h1 = np.stack([np.ones_like(x), zero], -1)
    h2 = np.stack([x - 2.0 * mu / (2.0 - p.omega), zero], -1)
    return h1, h2
