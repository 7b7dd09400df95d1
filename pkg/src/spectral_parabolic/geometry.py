"""Mappings from the unit ball onto the physical domain.

A :class:`MappedDomain` bundles the map ``phi``, its Jacobian, the Jacobian
determinant and (optionally) the inverse map.  All callables are vectorized
over an (M, d) array of points.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument, SingularJacobianError

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class MappedDomain:
    dim: int
    phi: Callable
    jacobian: Callable
    det_j: Optional[Callable] = None
    inverse: Optional[Callable] = None
    name: str = "domain"
    smoothness: str = "analytic"
    boundary: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InvalidArgument(f"dimension must be 2 or 3, got {self.dim}")

    def map(self, x):
        return _apply(self.phi, x)

    def jac(self, x):
        return _apply(self.jacobian, x)

    def det(self, x):
        if self.det_j is not None:
            return _apply(self.det_j, x)
        return np.linalg.det(self.jac(x))

    def pull_back(self, s):
        """Reference-ball coordinates of physical points ``s``."""
        if self.inverse is not None:
            return _apply(self.inverse, s)
        return _apply(lambda pts: newton_inverse(self, pts), s)


def _apply(fn, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return fn(x[None, :])[0]
    return fn(x)


def identity_ball(d):
    """The unit ball itself: phi = id."""
    if d not in (2, 3):
        raise InvalidArgument(f"dimension must be 2 or 3, got {d}")
    eye = np.eye(d)
    return MappedDomain(
        dim=d,
        phi=lambda x: np.array(x, dtype=float),
        jacobian=lambda x: np.broadcast_to(eye, (x.shape[0], d, d)).copy(),
        det_j=lambda x: np.ones(x.shape[0]),
        inverse=lambda s: np.array(s, dtype=float),
        name=f"ball{d}",
    )


def dilated_ball(d, factor):
    """phi(x) = factor * x; handy for checking how integrals scale."""
    if factor <= 0:
        raise InvalidArgument("dilation factor must be positive")
    eye = np.eye(d) * factor
    return MappedDomain(
        dim=d,
        phi=lambda x: factor * np.asarray(x, dtype=float),
        jacobian=lambda x: np.broadcast_to(eye, (x.shape[0], d, d)).copy(),
        det_j=lambda x: np.full(x.shape[0], factor ** d),
        inverse=lambda s: np.asarray(s, dtype=float) / factor,
        name=f"ball{d}x{factor:g}",
    )


def mapped3d_example(a=0.7, b=0.9):
    """phi(x) = (x1 - x2 + a x1^2, x1 + x2, 2 x3 + b x3^2), 0 < a, b < 1."""
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise InvalidArgument(f"parameters must lie in (0, 1), got a={a}, b={b}")

    def phi(x):
        x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
        return np.stack([x1 - x2 + a * x1 * x1, x1 + x2, 2.0 * x3 + b * x3 * x3], axis=1)

    def jacobian(x):
        m = x.shape[0]
        jac = np.zeros((m, 3, 3))
        jac[:, 0, 0] = 1.0 + 2.0 * a * x[:, 0]
        jac[:, 0, 1] = -1.0
        jac[:, 1, 0] = 1.0
        jac[:, 1, 1] = 1.0
        jac[:, 2, 2] = 2.0 + 2.0 * b * x[:, 2]
        return jac

    def det_j(x):
        return 4.0 * (1.0 + a * x[:, 0]) * (1.0 + b * x[:, 2])

    def inverse(s):
        s1, s2, s3 = s[:, 0], s[:, 1], s[:, 2]
        root = np.sqrt(1.0 + a * (s1 + s2))
        x1 = (root - 1.0) / a
        x2 = (a * s2 + 1.0 - root) / a
        x3 = (np.sqrt(1.0 + b * s3) - 1.0) / b
        return np.stack([x1, x2, x3], axis=1)

    return MappedDomain(3, phi, jacobian, det_j, inverse, name=f"mapped3d(a={a:g},b={b:g})")


# ---------------------------------------------------------------------------
# star-like planar domains

@dataclass(frozen=True)
class FourierRadius:
    """rho(theta) = mean + sum_m c_m cos(m theta) + s_m sin(m theta)."""

    mean: float
    cos: tuple = ()
    sin: tuple = ()

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, float(self.mean))
        for m, c in self.cos:
            out += c * np.cos(m * theta)
        for m, s in self.sin:
            out += s * np.sin(m * theta)
        return out

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for m, c in self.cos:
            out -= m * c * np.sin(m * theta)
        for m, s in self.sin:
            out += m * s * np.cos(m * theta)
        return out


LIMACON = FourierRadius(3.0, cos=((1, 1.0),), sin=((1, 2.0),))
AMOEBA = FourierRadius(5.0, cos=((5, -1.0),), sin=((1, 1.0), (3, 1.0)))


def _fd_derivative(rho):
    h = 1e-3

    def drho(theta):
        return (-rho(theta + 2 * h) + 8 * rho(theta + h) - 8 * rho(theta - h)
                + rho(theta - 2 * h)) / (12 * h)
    return drho


class _Ramp:
    """Radial blend g(r) with g(0) = 0, g(1) = 1, g ~ r^3 at 0 and 0 <= g' <= smax.

    g' rises as a cubic smoothstep on [0, r1] and stays at smax on [r1, 1];
    r1 is fixed by g(1) = 1.
    """

    def __init__(self, smax):
        if not 1.0 < smax <= 2.0:
            raise InvalidArgument("ramp slope bound must lie in (1, 2]")
        self.smax = smax
        self.r1 = 2.0 * (smax - 1.0) / smax

    def g(self, r):
        u = np.minimum(r / self.r1, 1.0)
        inner = self.smax * self.r1 * (u ** 3 - 0.5 * u ** 4)
        outer = self.smax * (0.5 * self.r1 + (r - self.r1))
        return np.where(r < self.r1, inner, outer)

    def dg(self, r):
        u = np.minimum(r / self.r1, 1.0)
        return self.smax * (3.0 * u * u - 2.0 * u ** 3)

    def sigma_terms(self, r):
        """sigma = g/r, sigma'/r and sigma/r^2, all finite at r = 0."""
        smax, r1 = self.smax, self.r1
        u = r / r1
        inside = r < r1
        rs = np.where(inside, 1.0, r)
        sig_in = smax * (u * u - 0.5 * u ** 3)
        dsig_r_in = smax * (2.0 - 1.5 * u) / (r1 * r1)
        sig_r2_in = smax * (1.0 - 0.5 * u) / (r1 * r1)
        g_out = self.g(rs)
        sig_out = g_out / rs
        dsig_out = (self.dg(rs) * rs - g_out) / (rs * rs)
        sigma = np.where(inside, sig_in, sig_out)
        dsig_r = np.where(inside, dsig_r_in, dsig_out / rs)
        sig_r2 = np.where(inside, sig_r2_in, sig_out / (rs * rs))
        return sigma, dsig_r, sig_r2


def starlike2d(rho, drho=None, mode="smoothed", name="starlike", samples=4096):
    """Map the unit disk onto {r < rho(theta)}.

    ``mode="smoothed"`` (default) uses

        phi(x) = x * (rho_bar + sigma(|x|) * (rho(theta) - rho_bar)),

    where rho_bar is the mean radius and sigma = g(r)/r with g a C^2 ramp
    whose slope is bounded so that the radial derivative of |phi| stays
    positive (no fold-over).  Near the origin phi equals rho_bar * x up to
    O(|x|^3).  ``mode="radial"`` uses phi(x) = rho(theta) * x, which is only
    Lipschitz at the origin.
    """
    if drho is None:
        drho = getattr(rho, "derivative", None) or _fd_derivative(rho)
    theta_s = 2.0 * np.pi * np.arange(samples) / samples
    rho_s = np.asarray(rho(theta_s), dtype=float)
    if np.any(rho_s <= 0.0) or not np.all(np.isfinite(rho_s)):
        raise InvalidArgument("boundary radius must be positive")
    rho_bar = float(np.mean(rho_s))

    def polar(x):
        r = np.hypot(x[:, 0], x[:, 1])
        th = np.arctan2(x[:, 1], x[:, 0])
        return r, th

    if mode == "radial":
        def phi(x):
            _, th = polar(x)
            return x * rho(th)[:, None]

        def jacobian(x):
            r, th = polar(x)
            rs = np.where(r > 0, r, 1.0)
            grad_th = np.stack([-x[:, 1], x[:, 0]], axis=1) / (rs * rs)[:, None]
            jac = rho(th)[:, None, None] * np.eye(2)[None]
            jac += x[:, :, None] * (drho(th)[:, None] * grad_th)[:, None, :]
            return jac

        def det_j(x):
            _, th = polar(x)
            return rho(th) ** 2

        def inverse(s):
            r, th = polar(s)
            return s / rho(th)[:, None]

        return MappedDomain(2, phi, jacobian, det_j, inverse, name=name, smoothness="lipschitz",
                            boundary=rho)

    if mode != "smoothed":
        raise InvalidArgument(f"unknown extension mode {mode!r}")

    delta_min = float(np.min(rho_s)) - rho_bar
    kappa = rho_bar / -delta_min if delta_min < 0 else math.inf
    ramp = _Ramp(min(1.0 + 0.5 * (kappa - 1.0), 2.0))

    def phi(x):
        r, th = polar(x)
        sigma, _, _ = ramp.sigma_terms(r)
        return x * (rho_bar + sigma * (rho(th) - rho_bar))[:, None]

    def jacobian(x):
        r, th = polar(x)
        sigma, dsig_r, sig_r2 = ramp.sigma_terms(r)
        delta = rho(th) - rho_bar
        scale = rho_bar + sigma * delta
        perp = np.stack([-x[:, 1], x[:, 0]], axis=1)
        row = (dsig_r * delta)[:, None] * x + (sig_r2 * drho(th))[:, None] * perp
        return scale[:, None, None] * np.eye(2)[None] + x[:, :, None] * row[:, None, :]

    def det_j(x):
        r, th = polar(x)
        sigma, _, _ = ramp.sigma_terms(r)
        delta = rho(th) - rho_bar
        return (rho_bar + sigma * delta) * (rho_bar + ramp.dg(r) * delta)

    def inverse(s):
        big_r, th = polar(s)
        delta = rho(th) - rho_bar
        lo = np.zeros_like(big_r)
        hi = np.ones_like(big_r)
        # |phi| is strictly increasing in r along each ray
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            val = rho_bar * mid + ramp.g(mid) * delta
            below = val < big_r
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        r = 0.5 * (lo + hi)
        for _ in range(2):
            r = r - (rho_bar * r + ramp.g(r) * delta - big_r) / (rho_bar + ramp.dg(r) * delta)
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)

    return MappedDomain(2, phi, jacobian, det_j, inverse, name=name, smoothness="C2",
                        boundary=rho)


def limacon_domain(mode="smoothed"):
    return starlike2d(LIMACON, mode=mode, name="limacon")


def amoeba_domain(mode="smoothed"):
    return starlike2d(AMOEBA, mode=mode, name="amoeba")


# ---------------------------------------------------------------------------
# user-supplied polynomial maps

@dataclass(frozen=True)
class PolynomialMap:
    """phi_t(x) = sum of c * x1^i1 x2^i2 (x3^i3) over the terms of component t."""

    dim: int
    terms: tuple  # (component (0-based), exponents, coefficient)

    def phi(self, x):
        out = np.zeros((x.shape[0], self.dim))
        for comp, exps, c in self.terms:
            out[:, comp] += c * np.prod(x ** np.array(exps), axis=1)
        return out

    def jacobian(self, x):
        out = np.zeros((x.shape[0], self.dim, self.dim))
        for comp, exps, c in self.terms:
            for j, e in enumerate(exps):
                if e == 0:
                    continue
                lowered = list(exps)
                lowered[j] -= 1
                out[:, comp, j] += c * e * np.prod(x ** np.array(lowered), axis=1)
        return out


def parse_polynomial_map(text):
    """Parse lines ``component i1 i2 [i3] coefficient`` (component is 1-based)."""
    terms = []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (4, 5):
            raise InvalidArgument(f"line {lineno}: expected 4 or 5 fields, got {len(fields)}")
        d = len(fields) - 2
        if dim is None:
            dim = d
        elif d != dim:
            raise InvalidArgument(f"line {lineno}: mixed dimensions in mapping file")
        try:
            comp = int(fields[0]) - 1
            exps = tuple(int(f) for f in fields[1:-1])
            coef = float(fields[-1])
        except ValueError as exc:
            raise InvalidArgument(f"line {lineno}: {exc}") from None
        if not 0 <= comp < d or any(e < 0 for e in exps):
            raise InvalidArgument(f"line {lineno}: bad component or exponent")
        terms.append((comp, exps, coef))
    if dim is None:
        raise InvalidArgument("mapping file contains no terms")
    return PolynomialMap(dim, tuple(terms))


def polynomial_domain(poly, name="polynomial"):
    dom = MappedDomain(poly.dim, poly.phi, poly.jacobian, name=name, smoothness="polynomial")
    det = dom.det(np.zeros(poly.dim))
    if abs(det) < SINGULAR_TOL:
        raise SingularJacobianError("polynomial map is singular at the origin")
    return dom


def load_polynomial_domain(path):
    with open(path) as fh:
        return polynomial_domain(parse_polynomial_map(fh.read()), name=str(path))


def newton_inverse(domain, s, tol=1e-13, maxiter=50):
    """Invert phi by damped Newton iteration, started from a scaled guess."""
    s = np.asarray(s, dtype=float)
    x0 = np.zeros((1, domain.dim))
    centre = domain.phi(x0)[0]
    scale = abs(np.linalg.det(domain.jacobian(x0)[0])) ** (1.0 / domain.dim)
    x = (s - centre) / scale
    for _ in range(maxiter):
        res = domain.phi(x) - s
        step = np.linalg.solve(domain.jacobian(x), res[:, :, None])[:, :, 0]
        x = x - step
        if np.max(np.abs(step), initial=0.0) < tol:
            break
    return x


# ---------------------------------------------------------------------------
# transformed diffusion

def transform_diffusion(jac, a=None):
    """J^{-1} A J^{-T} for stacks of (M, d, d) Jacobians; A = I when omitted.

    Uses batched LU solves rather than forming J^{-1}.
    """
    jac = np.asarray(jac, dtype=float)
    det = np.linalg.det(jac)
    bad = np.abs(det) < SINGULAR_TOL
    if np.any(bad):
        raise SingularJacobianError(
            f"|det J| < {SINGULAR_TOL:g} at {int(bad.sum())} point(s)")
    if a is None:
        a = np.broadcast_to(np.eye(jac.shape[-1]), jac.shape)
    y = np.linalg.solve(jac, a)                               # J^{-1} A
    return np.linalg.solve(jac, np.swapaxes(y, -1, -2)).swapaxes(-1, -2)  # (J^{-1} Y^T)^T


def a_tilde(domain, diffusion=None):
    """Return (x, t, z) -> J^{-1} A(phi(x), t, z) J^{-T}, shape (M, d, d).

    ``diffusion`` is a callable (s, t, z) -> (M, d, d); ``None`` means A = I.
    """
    def evaluate(x, t=0.0, z=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        jac = domain.jac(x)
        if diffusion is None:
            return transform_diffusion(jac)
        if z is None:
            z = np.zeros(x.shape[0])
        return transform_diffusion(jac, diffusion(domain.map(x), t, z))
    return evaluate
