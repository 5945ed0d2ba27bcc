"""Plasma dispersion function and Cauchy-type quadrature.

Everything here is a pure function of its inputs. Complex arguments are
ordinary Python/numpy complex numbers; functions broadcast over arrays.

Boundary values on the real axis are selected with an integer ``side``:
``+1`` is the limit from the upper half-plane, ``-1`` from the lower one and
``0`` the principal value (the mean of the two).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import dawsn, roots_legendre, wofz

from .errors import DomainError, IntegrationError

SQRT_PI = np.sqrt(np.pi)

_SIDES = {"above": 1, "below": -1, "+": 1, "-": -1, 1: 1, -1: -1, 0: 0}


def as_side(side) -> int:
    try:
        return _SIDES[side]
    except (KeyError, TypeError):
        raise DomainError(f"side must be one of +1, -1, 0, 'above', 'below'; got {side!r}") from None


def _check_finite(z):
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite argument")


# ---------------------------------------------------------------------------
# lambda_0
# ---------------------------------------------------------------------------

def lambda0(z):
    """1 + (z/sqrt(pi)) * int exp(-t^2)/(t - z) dt for z off the real axis.

    Evaluated with the Faddeeva function w(z) = exp(-z^2) erfc(-iz):
    the integral equals i sqrt(pi) w(z) above the axis and its conjugate
    reflection below it. ``z = 0`` is accepted (both half-plane limits are 1).
    """
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    on_axis = (z.imag == 0) & (z.real != 0)
    if np.any(on_axis):
        raise DomainError("lambda0 is discontinuous on the real axis; use lambda0_boundary")
    upper = z.imag >= 0
    zu = np.where(upper, z, np.conj(z))
    val = 1.0 + zu * 1j * SQRT_PI * wofz(zu)
    out = np.where(upper, val, np.conj(val))
    return out[()] if out.ndim == 0 else out


def lambda0_pv(mu):
    """Principal value of lambda_0 on the real axis: 1 - 2 mu D(mu), D = Dawson."""
    mu = np.asarray(mu, dtype=float)
    _check_finite(mu)
    out = 1.0 - 2.0 * mu * dawsn(mu)
    return out[()] if out.ndim == 0 else out


def lambda0_boundary(mu, side):
    """Boundary value lambda_0^(+/-)(mu) = PV +/- i sqrt(pi) mu exp(-mu^2)."""
    s = as_side(side)
    mu = np.asarray(mu, dtype=float)
    out = lambda0_pv(mu) + 1j * s * SQRT_PI * mu * np.exp(-mu * mu)
    return out[()] if np.ndim(out) == 0 else out


def lambda0_any(z, side=0):
    """lambda_0 off the axis, or the requested boundary value for real z."""
    z = np.asarray(z, dtype=complex)
    real = z.imag == 0
    if not np.any(real):
        return lambda0(z)
    s = as_side(side)
    out = np.empty(z.shape, dtype=complex)
    if np.any(~real):
        out[~real] = lambda0(z[~real])
    out[real] = lambda0_boundary(z[real].real, s)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    # barycentric weights of the Legendre nodes
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / diff.prod(axis=1)
    return x, w, bw / np.abs(bw).max()


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on an interval.

    ``kind`` is ``"finite-interval"``, ``"semi-infinite"`` (a finite rule on
    ``[0, mu_max]`` standing in for ``[0, inf)``) or ``"hermite-weighted"``
    (weights already contain ``exp(-mu^2)``). Composite Gauss-Legendre rules
    also record their panel edges so Cauchy integrals can use panel-local
    interpolation.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    interval: tuple[float, float]
    edges: np.ndarray | None = field(default=None, repr=False)
    order: int = 0

    def __post_init__(self):
        # Hermite weights of far nodes may underflow to zero; negatives never occur
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise IntegrationError("quadrature weights must be non-negative and finite")

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, values, axis=-1):
        return np.tensordot(np.asarray(values), self.weights, axes=([axis], [0]))

    def panel_of(self, x):
        """Index of the panel whose real extent is closest to Re x."""
        k = np.searchsorted(self.edges, np.real(x), side="right") - 1
        return np.clip(k, 0, self.edges.size - 2)

    def interpolate(self, values, z):
        """Panel-local polynomial interpolant of ``values`` evaluated at z (may be complex)."""
        z = np.asarray(z, dtype=complex)
        ref, _, bw = _legendre(self.order)
        k = self.panel_of(z)
        lo, hi = self.edges[k], self.edges[k + 1]
        zr = (2.0 * z - (lo + hi)) / (hi - lo)
        vals = np.asarray(values).reshape(-1, self.order)[k]
        d = zr[..., None] - ref
        hit = d == 0
        d = np.where(hit, 1.0, d)
        c = bw / d
        out = (c * vals).sum(-1) / c.sum(-1)
        exact = hit.any(-1)
        if np.any(exact):
            out = np.where(exact, (vals * hit).sum(-1), out)
        return out


def gauss_legendre_rule(a, b, panels=1, order=16, grading=0, kind="finite-interval"):
    """Composite Gauss-Legendre rule on [a, b].

    ``grading`` splits the first panel geometrically toward ``a`` that many
    times (each level halves), which resolves end-point structure such as
    ``x log x``.
    """
    if not b > a:
        raise DomainError("empty interval")
    edges = np.linspace(a, b, panels + 1)
    if grading:
        h = edges[1] - a
        inner = a + h * 2.0 ** -np.arange(grading, 0, -1)
        edges = np.concatenate([[a], inner, edges[1:]])
    x, w, _ = _legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return QuadratureRule(nodes, weights, kind, (float(a), float(b)), edges, order)


def semi_infinite_rule(mu_max=8.0, panels=32, order=16, grading=0):
    """Stand-in for [0, inf): beyond mu_max the Gaussian factor is below e^-64."""
    return gauss_legendre_rule(0.0, mu_max, panels, order, grading, kind="semi-infinite")


@lru_cache(maxsize=None)
def _half_range_hermite(n, fine=4000, cutoff=12.0):
    # discretised Stieltjes procedure (Lanczos) for exp(-t^2) dt on (0, inf)
    x, w = roots_legendre(fine)
    t = 0.5 * cutoff * (x + 1.0)
    wt = 0.5 * cutoff * w * np.exp(-t * t)
    alpha = np.zeros(n)
    beta = np.zeros(n)
    mass = wt.sum()
    p_prev = np.zeros_like(t)
    p = np.full_like(t, 1.0 / np.sqrt(mass))
    for k in range(n):
        alpha[k] = np.sum(wt * t * p * p)
        q = (t - alpha[k]) * p - (beta[k - 1] * p_prev if k else 0.0)
        if k < n - 1:
            beta[k] = np.sqrt(np.sum(wt * q * q))
            p_prev, p = p, q / beta[k]
    nodes, vecs = eigh_tridiagonal(alpha, beta[: n - 1])
    return nodes, mass * vecs[0] ** 2


MAX_HALF_RANGE_ORDER = 100


def half_range_hermite_rule(n):
    """Gauss rule for int_0^inf exp(-mu^2) f(mu) dmu, exact for deg f <= 2n-1.

    Built from the discretised weight on [0, 12], which limits the order to
    MAX_HALF_RANGE_ORDER.
    """
    if not 1 <= n <= MAX_HALF_RANGE_ORDER:
        raise DomainError(f"half-range order must be in [1, {MAX_HALF_RANGE_ORDER}]")
    nodes, weights = _half_range_hermite(int(n))
    return QuadratureRule(nodes.copy(), weights.copy(), "hermite-weighted", (0.0, np.inf))


def full_range_hermite_rule(n):
    nodes, weights = np.polynomial.hermite.hermgauss(int(n))
    return QuadratureRule(nodes, weights, "hermite-weighted", (-np.inf, np.inf))


# ---------------------------------------------------------------------------
# Cauchy-type integrals
# ---------------------------------------------------------------------------

def log_ratio(z, a, b, side=0):
    """int_a^b dt/(t - z); for real z inside (a, b) the side picks the boundary value."""
    z = np.asarray(z, dtype=complex)
    inside = (z.imag == 0) & (z.real > a) & (z.real < b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(np.log(b - z) - np.log(a - z))
        if np.any(inside):
            x = z.real[inside]
            out[inside] = np.log((b - x) / (x - a)) + 1j * np.pi * side
    return out[()]


_COINCIDE = 1e-10
_SHIFT = 1e-6


def cauchy_transform(values, rule, z, side=0, at=None):
    """int f(t)/(t - z) dt over the rule's interval from tabulated f.

    For targets near the support the singular part is subtracted,
    ``f(t)/(t-z) = [f(t) - f(z)]/(t - z) + f(z)/(t - z)``, with ``f(z)`` from
    ``at`` when given (exact density values) and from the panel interpolant
    otherwise. Real targets inside the interval give the principal value
    (``side=0``) or the boundary value from the indicated half-plane.
    """
    side = as_side(side)
    values = np.asarray(values)
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    at = None if at is None else np.broadcast_to(np.asarray(at, dtype=complex), shape).ravel()
    t, w = rule.nodes, rule.weights
    a, b = rule.interval
    out = np.empty(z.shape, dtype=complex)

    lo, hi = rule.edges[:-1], rule.edges[1:]
    dx = np.maximum(np.maximum(lo - z.real[:, None], z.real[:, None] - hi), 0.0)
    dist = np.hypot(dx, z.imag[:, None])
    near = (dist / (hi - lo)).min(axis=1) < 1.0

    far = ~near
    if np.any(far):
        out[far] = (w * values / (t - z[far, None])).sum(axis=1)
    if np.any(near):
        idx = np.flatnonzero(near)
        zn = z[idx]
        gap = np.abs(t - zn[:, None]).min(axis=1)
        tol = _COINCIDE * (1.0 + np.abs(zn))
        # nodes and end points are removable for the smooth transform
        clash = (gap < tol) | (np.abs(zn - a) < tol) | (np.abs(zn - b) < tol)
        ok = idx[~clash]
        if ok.size:
            zo = z[ok]
            c = at[ok] if at is not None else rule.interpolate(values, zo)
            q = (values - c[:, None]) / (t - zo[:, None])
            out[ok] = (w * q).sum(axis=1) + c * log_ratio(zo, a, b, side)
        bad = idx[clash]
        if bad.size:
            # transform is smooth along the axis: average symmetric neighbours
            zb = z[bad]
            out[bad] = 0.5 * (cauchy_transform(values, rule, zb + _SHIFT, side)
                              + cauchy_transform(values, rule, zb - _SHIFT, side))
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def pv_cauchy(f, z, rule=None, side=0, mu_max=8.0):
    """int_0^inf f(mu)/(mu - z) dmu, principal value for real positive z.

    ``f`` is a vectorised real function on [0, inf). The integral is truncated
    at ``mu_max``; an integrand that has not decayed there raises
    IntegrationError.
    """
    if rule is None:
        rule = semi_infinite_rule(mu_max)
    vals = np.asarray(f(rule.nodes), dtype=float)
    scale = np.abs(vals).max()
    tail = np.abs(vals[-rule.order:]).max() if rule.order else np.abs(vals[-1])
    if scale > 0 and tail > 1e-12 * max(scale, 1.0):
        raise IntegrationError(
            f"integrand has not decayed at mu_max={rule.interval[1]} (|f| = {tail:.3e})")
    z = np.asarray(z, dtype=complex)
    at = None
    if np.all(z.imag == 0):
        at = np.asarray(f(z.real), dtype=complex)
    return cauchy_transform(vals, rule, z, side=side, at=at)


def divided_difference(f, base, z, order=1, radius=0.1, points=64):
    """f[base, z] (order 1) or f[base, base, z] (order 2) for analytic f.

    Close to ``base`` the quotient is evaluated with the trapezoid rule on a
    circle of the given radius (no cancellation); farther away directly.
    ``f`` must be vectorised and analytic in the disc.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    k = np.arange(points)
    zeta = base + radius * np.exp(2j * np.pi * (k + 0.5) / points)
    fz = f(zeta)
    out = np.empty(z.shape, dtype=complex)
    close = np.abs(z - base) < 0.5 * radius
    zc = z[close, None]
    if order == 1:
        out[close] = (fz / (zeta - zc)).mean(-1)
    else:
        out[close] = (fz / ((zeta - base) * (zeta - zc))).mean(-1)
    zf = z[~close]
    if zf.size:
        fb = f(np.array([base], dtype=complex))[0]
        first = (f(zf) - fb) / (zf - base)
        if order == 1:
            out[~close] = first
        else:
            slope = (fz / (zeta - base)).mean()
            out[~close] = (first - slope) / (zf - base)
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def subtracted_transform(values, rule, z, at):
    """int [f(t) - f(z)]/(t - z) dt with f(z) supplied as ``at``.

    This is the regular part of the Cauchy transform; it has no jump across
    the support, so no side is needed.
    """
    values = np.asarray(values)
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    at = np.broadcast_to(np.asarray(at, dtype=complex), shape).ravel()
    t, w = rule.nodes, rule.weights
    gap = np.abs(t - z[:, None]).min(axis=1) if z.size else np.zeros(0)
    clash = gap < _COINCIDE * (1.0 + np.abs(z))
    out = (w * (values - at[:, None]) / np.where(clash[:, None], 1.0, t - z[:, None])).sum(axis=1)
    if np.any(clash):
        zb = z[clash]
        interp = rule.interpolate(values, zb + _SHIFT), rule.interpolate(values, zb - _SHIFT)
        out[clash] = 0.5 * (subtracted_transform(values, rule, zb + _SHIFT, interp[0])
                            + subtracted_transform(values, rule, zb - _SHIFT, interp[1]))
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out
