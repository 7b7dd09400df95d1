"""Orthonormal Jacobi polynomials via the three-term recurrence.

The recurrence coefficients are shared by the Golub-Welsch quadrature
generator and by the radial factor of the 3D ball basis.
"""
import math

import numpy as np

from .errors import InvalidArgument


def recurrence_coefficients(n, a, b):
    """Coefficients of the orthonormal recurrence for weight (1-t)^a (1+t)^b.

    Returns ``(diag, offdiag, mu0)`` where

        t p_j = off[j] p_{j+1} + diag[j] p_j + off[j-1] p_{j-1}

    with ``diag`` of length ``n``, ``off`` of length ``n`` (``off[j]`` couples
    ``p_j`` and ``p_{j+1}``) and ``mu0`` the total mass of the weight.
    """
    if n < 1:
        raise InvalidArgument("need at least one recurrence coefficient")
    if a <= -1 or b <= -1:
        raise InvalidArgument("Jacobi parameters must exceed -1")
    j = np.arange(n, dtype=float)
    s = 2.0 * j + a + b
    diag = np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (b * b - a * a) / (s * (s + 2.0))
    diag[0] = (b - a) / (a + b + 2.0)

    k = j + 1.0
    sk = 2.0 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = (4.0 * k * (k + a) * (k + b) * (k + a + b)
                / (sk * sk * (sk + 1.0) * (sk - 1.0)))
    # k = 1 has a removable 0/0 when a + b = -1 or 0
    off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    off = np.sqrt(off2)

    mu0 = math.exp((a + b + 1.0) * math.log(2.0) + math.lgamma(a + 1.0)
                   + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0))
    return diag, off, mu0


def jacobi_orthonormal(jmax, a, b, t, derivative=True):
    """Values (and derivatives) of orthonormal Jacobi polynomials p_0..p_jmax.

    Output arrays have shape ``(jmax + 1,) + np.shape(t)``.
    """
    t = np.asarray(t, dtype=float)
    diag, off, mu0 = recurrence_coefficients(jmax + 1, a, b)
    p = np.empty((jmax + 1,) + t.shape)
    dp = np.empty_like(p)
    p[0] = 1.0 / math.sqrt(mu0)
    dp[0] = 0.0
    if jmax >= 1:
        p[1] = (t - diag[0]) * p[0] / off[0]
        dp[1] = p[0] / off[0]
    for j in range(1, jmax):
        p[j + 1] = ((t - diag[j]) * p[j] - off[j - 1] * p[j - 1]) / off[j]
        dp[j + 1] = ((t - diag[j]) * dp[j] + p[j] - off[j - 1] * dp[j - 1]) / off[j]
    if derivative:
        return p, dp
    return p


def jacobi_normalized(jmax, alpha, t):
    """Orthonormal p_j^{(0, alpha)} on [-1, 1] under (1 + t)^alpha, with derivatives.

    Raises InvalidArgument if any ``|t| > 1`` (beyond a rounding allowance).
    """
    if jmax < 0:
        raise InvalidArgument("jmax must be non-negative")
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise InvalidArgument("Jacobi argument outside [-1, 1]")
    t = np.clip(t, -1.0, 1.0)
    return jacobi_orthonormal(jmax, 0.0, alpha, t)
