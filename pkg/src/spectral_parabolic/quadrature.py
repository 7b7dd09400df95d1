"""Gauss rules on intervals and product rules on the unit disk and unit ball.

All Galerkin integrals are evaluated with :func:`disk_rule` (d = 2) or
:func:`ball_rule` (d = 3).  Rules are cached per order and their arrays are
read-only, so a rule object can be shared freely.
"""
import functools
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .jacobi import recurrence_coefficients


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Rule1D:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class BallRule:
    """Quadrature on the open unit ball B_d; ``nodes`` has shape (M, d)."""

    dim: int
    q: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return self.weights.shape[0]

    def integrate(self, f):
        """Apply the rule to a callable taking an (M, d) array of points."""
        return float(np.dot(self.weights, f(self.nodes)))

    def to_csv(self):
        cols = ",".join(f"x{i + 1}" for i in range(self.dim))
        buf = io.StringIO()
        buf.write(f"{cols},weight\n")
        for x, w in zip(self.nodes, self.weights):
            buf.write(",".join(f"{v:.17g}" for v in (*x, w)) + "\n")
        return buf.getvalue()


def _legendre_and_derivative(m, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, m * (x * p1 - p0) / (x * x - 1.0)


def _legendre_newton(m):
    """Gauss-Legendre nodes/weights on [-1, 1] by Newton's method."""
    i = np.arange(m)
    # Chebyshev-like starting values, ascending
    x = -np.cos(np.pi * (i + 0.75) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre_and_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(m, interval=(-1.0, 1.0)):
    """m-point Gauss-Legendre rule on ``interval``; exact to degree 2m - 1."""
    if int(m) != m or m < 1:
        raise InvalidArgument(f"number of Gauss points must be >= 1, got {m}")
    a, b = map(float, interval)
    if not b > a:
        raise InvalidArgument("interval must satisfy a < b")
    x, w = _cached_legendre(int(m))
    half = 0.5 * (b - a)
    return Rule1D(_freeze(a + half * (x + 1.0)), _freeze(half * w))


@functools.lru_cache(maxsize=None)
def _cached_legendre(m):
    x, w = _legendre_newton(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(m, a, b):
    """m-point Gauss rule for weight (1-t)^a (1+t)^b on [-1, 1] (Golub-Welsch)."""
    if int(m) != m or m < 1:
        raise InvalidArgument(f"number of Gauss points must be >= 1, got {m}")
    diag, off, mu0 = recurrence_coefficients(m, a, b)
    jac = np.diag(diag) + np.diag(off[:-1], 1) + np.diag(off[:-1], -1)
    x, v = np.linalg.eigh(jac)
    w = mu0 * v[0, :] ** 2
    return Rule1D(_freeze(x), _freeze(w))


def radial_r2_rule(q):
    """q-point Gauss rule on [0, 1] for the weight r^2.

    Obtained from Gauss-Jacobi(0, 2) via r = (zeta + 1) / 2.
    """
    if int(q) != q or q < 1:
        raise InvalidArgument(f"radial order must be >= 1, got {q}")
    return _cached_r2(int(q))


@functools.lru_cache(maxsize=None)
def _cached_r2(q):
    gj = gauss_jacobi(q, 0.0, 2.0)
    return Rule1D(_freeze(0.5 * (gj.nodes + 1.0)), _freeze(gj.weights / 8.0))


def disk_rule(q):
    """Product rule on the unit disk, exact on polynomials of degree <= 2q.

    (q+1)-point Gauss-Legendre in r on [0, 1] times the (2q+1)-point
    trapezoidal rule in the angle.  Nodes are ordered radius-major.
    """
    if int(q) != q or q < 1:
        raise InvalidArgument(f"disk rule order must be >= 1, got {q}")
    return _cached_disk(int(q))


@functools.lru_cache(maxsize=None)
def _cached_disk(q):
    radial = gauss_legendre(q + 1, (0.0, 1.0))
    nth = 2 * q + 1
    theta = 2.0 * np.pi * np.arange(nth) / nth
    r = radial.nodes[:, None]
    pts = np.stack([(r * np.cos(theta)).ravel(), (r * np.sin(theta)).ravel()], axis=1)
    w = (radial.weights * radial.nodes)[:, None] * np.full(nth, 2.0 * np.pi / nth)
    return BallRule(2, q, _freeze(pts), _freeze(w.ravel()))


def ball_rule(q):
    """Product rule on the unit ball in R^3 with 2 q^3 nodes.

    Trapezoidal rule with 2q points in azimuth, q-point Gauss-Legendre in
    cos(polar angle), q-point r^2-weighted Gauss rule in r.  Exact on
    polynomials of degree <= 2q - 1.
    """
    if int(q) != q or q < 1:
        raise InvalidArgument(f"ball rule order must be >= 1, got {q}")
    return _cached_ball(int(q))


@functools.lru_cache(maxsize=None)
def _cached_ball(q):
    azim = np.pi * np.arange(1, 2 * q + 1) / q
    polar = gauss_legendre(q)
    radial = radial_r2_rule(q)
    cphi = polar.nodes
    sphi = np.sqrt(1.0 - cphi * cphi)
    # index order (i, j, k): azimuth, polar, radius
    ct, st = np.cos(azim)[:, None, None], np.sin(azim)[:, None, None]
    sp, cp = sphi[None, :, None], cphi[None, :, None]
    r = radial.nodes[None, None, :]
    shape = (2 * q, q, q)
    x1 = np.broadcast_to(r * sp * ct, shape)
    x2 = np.broadcast_to(r * sp * st, shape)
    x3 = np.broadcast_to(r * cp, shape)
    pts = np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=1)
    w = (math.pi / q) * polar.weights[None, :, None] * radial.weights[None, None, :]
    w = np.broadcast_to(w, shape).ravel()
    return BallRule(3, q, _freeze(pts), _freeze(w))


def rule_for(dim, q):
    if dim == 2:
        return disk_rule(q)
    if dim == 3:
        return ball_rule(q)
    raise InvalidArgument(f"unsupported dimension {dim}")


def ball_volume(dim):
    return math.pi if dim == 2 else 4.0 * math.pi / 3.0
