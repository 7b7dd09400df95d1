"""Ridge-polynomial orthonormal basis of polynomials on the unit disk.

The degree-m block consists of

    phi_{m,k}(x) = U_m(x1 cos(k h) + x2 sin(k h)) / sqrt(pi),  h = pi / (m + 1),

for k = 0..m, with U_m the Chebyshev polynomial of the second kind.  Blocks
are stacked lexicographically in (m, k), so the flat index of (m, k) is
m (m + 1) / 2 + k.  The bubble functions (1 - |x|^2) phi_{m,k} span the trial
space of the Galerkin method.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class ChebyshevEval:
    values: np.ndarray
    derivatives: np.ndarray


def chebyshev_u(n, t):
    """U_0..U_n and their derivatives at ``t``.

    Arrays have shape ``(n + 1,) + np.shape(t)``.
    """
    t = np.asarray(t, dtype=float)
    # clamp rounding overshoot only; genuine outside arguments stay polynomial
    t = np.where(np.abs(t) <= 1.0 + 1e-12, np.clip(t, -1.0, 1.0), t)
    u = np.empty((n + 1,) + t.shape)
    du = np.empty_like(u)
    u[0] = 1.0
    du[0] = 0.0
    if n >= 1:
        u[1] = 2.0 * t
        du[1] = 2.0
    for k in range(1, n):
        u[k + 1] = 2.0 * t * u[k] - u[k - 1]
        du[k + 1] = 2.0 * u[k] + 2.0 * t * du[k] - du[k - 1]
    return ChebyshevEval(u, du)


def dimension(n):
    return (n + 1) * (n + 2) // 2


def flat_index(m, k):
    return m * (m + 1) // 2 + k


def index_pairs(n):
    """The (m, k) labels in flat order."""
    return [(m, k) for m in range(n + 1) for k in range(m + 1)]


class RidgeBasis:
    """All N_n ridge functions of degree <= n, evaluated together."""

    dim = 2

    def __init__(self, n):
        if n < 0:
            raise InvalidArgument("degree must be non-negative")
        self.degree = n
        self.size = dimension(n)
        self.labels = index_pairs(n)
        m = np.array([mk[0] for mk in self.labels])
        k = np.array([mk[1] for mk in self.labels])
        angle = k * np.pi / (m + 1)
        self._m = m
        self._dirs = np.stack([np.cos(angle), np.sin(angle)], axis=1)

    def _ridge(self, x):
        # t[p, i] = x_p . direction_i; U evaluated up to degree n on every column
        t = x @ self._dirs.T
        ev = chebyshev_u(self.degree, t)
        cols = np.arange(self.size)
        vals = ev.values[self._m, :, cols].T * _INV_SQRT_PI
        ders = ev.derivatives[self._m, :, cols].T * _INV_SQRT_PI
        return vals, ders

    def evaluate(self, x):
        """Orthonormal ridge values, shape (M, N) for points of shape (M, 2)."""
        x, single = _as_points(x)
        vals, _ = self._ridge(x)
        return vals[0] if single else vals

    def evaluate_with_gradient(self, x):
        x, single = _as_points(x)
        vals, ders = self._ridge(x)
        grads = ders[:, :, None] * self._dirs[None, :, :]
        if single:
            return vals[0], grads[0]
        return vals, grads

    def bubble(self, x):
        """Bubble values (M, N) and gradients (M, N, 2)."""
        x, single = _as_points(x)
        vals, ders = self._ridge(x)
        w = 1.0 - np.sum(x * x, axis=1)
        bub = w[:, None] * vals
        grads = (w[:, None, None] * ders[:, :, None] * self._dirs[None, :, :]
                 - 2.0 * x[:, None, :] * vals[:, :, None])
        if single:
            return bub[0], grads[0]
        return bub, grads


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def ridge_basis(n, x):
    return RidgeBasis(n).evaluate(x)


def bubble_basis(n, x):
    return RidgeBasis(n).bubble(x)
