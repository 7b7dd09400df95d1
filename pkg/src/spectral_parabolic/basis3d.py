"""Orthonormal polynomial basis of the unit ball in R^3.

    phi_{m,j,beta}(x) = c_{m,j} p_j(2|x|^2 - 1) |x|^k S_{beta,k}(x / |x|),   k = m - 2j,

with p_j the orthonormal Jacobi polynomial for the weight (1 + t)^(k + 1/2),
S_{beta,k} the real spherical harmonics of order k and c_{m,j} = 2^(5/4 + m/2 - j).

The product |x|^k S_{beta,k}(x/|x|) is a homogeneous harmonic polynomial (a solid
harmonic).  It is evaluated directly in Cartesian form so that values and
gradients are regular everywhere, including the origin and the polar axis.

Labels (m, j, beta) are ordered lexicographically: m = 0..n, j = 0..floor(m/2),
beta = 0..2(m - 2j).  Even beta = 2l carries cos(l phi), odd beta = 2l - 1
carries sin(l phi).
"""
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .jacobi import jacobi_normalized


def dimension(n):
    return (n + 1) * (n + 2) * (n + 3) // 6


def index_triples(n):
    return [(m, j, beta)
            for m in range(n + 1)
            for j in range(m // 2 + 1)
            for beta in range(2 * (m - 2 * j) + 1)]


def normalization_constant(m, j):
    return 2.0 ** (1.25 + 0.5 * m - j)


def _order(beta):
    """Azimuthal order and trig kind of harmonic number ``beta``."""
    if beta % 2 == 0:
        return beta // 2, "cos"
    return (beta + 1) // 2, "sin"


@functools.lru_cache(maxsize=None)
def _legendre_coefficients(kmax):
    """Recurrence constants for associated Legendre functions normalized on [-1, 1]."""
    diag = np.zeros(kmax + 1)   # P_l^l = diag[l] * sin^l
    a = np.zeros((kmax + 1, kmax + 1))
    b = np.zeros((kmax + 1, kmax + 1))
    diag[0] = 1.0 / math.sqrt(2.0)
    for l in range(1, kmax + 1):
        diag[l] = diag[l - 1] * math.sqrt((2 * l + 1) / (2 * l))
    for l in range(kmax + 1):
        for k in range(l + 2, kmax + 1):
            a[k, l] = math.sqrt((4 * k * k - 1) / (k * k - l * l))
            b[k, l] = math.sqrt(((k - 1) ** 2 - l * l) / (4 * (k - 1) ** 2 - 1))
    return diag, a, b


def _azimuthal_norm(l):
    return 1.0 / math.sqrt(2.0 * math.pi) if l == 0 else 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class SphericalHarmonicEval:
    """Real spherical harmonics; row k*k + beta holds S_{beta,k}."""

    kmax: int
    values: np.ndarray
    d_phi: np.ndarray
    d_theta: np.ndarray

    def get(self, beta, k):
        return self.values[k * k + beta]


def spherical_harmonics(kmax, phi, theta):
    """S_{beta,k}(phi, theta) for k <= kmax, phi azimuth, theta polar angle.

    Evaluated from the angular associated Legendre recurrence, independently
    of the Cartesian route used by the ball basis.
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi, theta = np.broadcast_arrays(phi, theta)
    x, s = np.cos(theta), np.sin(theta)
    diag, a, b = _legendre_coefficients(kmax)
    shape = ((kmax + 1) ** 2,) + phi.shape
    vals = np.empty(shape)
    dphi = np.empty(shape)
    dth = np.empty(shape)
    for l in range(kmax + 1):
        p = [None] * (kmax + 1)
        dp = [None] * (kmax + 1)
        p[l] = diag[l] * s ** l
        dp[l] = diag[l] * l * s ** (l - 1) * x if l > 0 else np.zeros_like(x)
        if l + 1 <= kmax:
            c = math.sqrt(2 * l + 3)
            p[l + 1] = c * x * p[l]
            dp[l + 1] = c * (x * dp[l] - s * p[l])
        for k in range(l + 2, kmax + 1):
            p[k] = a[k, l] * (x * p[k - 1] - b[k, l] * p[k - 2])
            dp[k] = a[k, l] * (x * dp[k - 1] - s * p[k - 1] - b[k, l] * dp[k - 2])
        nrm = _azimuthal_norm(l)
        for k in range(l, kmax + 1):
            if l == 0:
                row = k * k
                vals[row] = nrm * p[k]
                dphi[row] = 0.0
                dth[row] = nrm * dp[k]
                continue
            c_, s_ = np.cos(l * phi), np.sin(l * phi)
            row_c, row_s = k * k + 2 * l, k * k + 2 * l - 1
            vals[row_c] = nrm * c_ * p[k]
            dphi[row_c] = -nrm * l * s_ * p[k]
            dth[row_c] = nrm * c_ * dp[k]
            vals[row_s] = nrm * s_ * p[k]
            dphi[row_s] = nrm * l * c_ * p[k]
            dth[row_s] = nrm * s_ * dp[k]
    return SphericalHarmonicEval(kmax, vals, dphi, dth)


def solid_harmonics(kmax, x):
    """Solid harmonics r^k S_{beta,k}(x/r) and Cartesian gradients.

    ``x`` has shape (M, 3).  Returns values ((kmax+1)^2, M) and gradients
    ((kmax+1)^2, M, 3), rows ordered as in :class:`SphericalHarmonicEval`.

    r^k P_k^l(z/r) = (x1^2 + x2^2)^(l/2) Q_k^l(z, r^2) with Q polynomial, and
    (x1^2 + x2^2)^(l/2) e^{i l phi} = (x1 + i x2)^l.
    """
    x = np.asarray(x, dtype=float)
    x1, x2, z = x[:, 0], x[:, 1], x[:, 2]
    rho = x1 * x1 + x2 * x2 + z * z
    diag, a, b = _legendre_coefficients(kmax)
    npts = x.shape[0]
    vals = np.empty(((kmax + 1) ** 2, npts))
    grads = np.empty(((kmax + 1) ** 2, npts, 3))

    w = x1 + 1j * x2
    wpow = [np.ones(npts, dtype=complex)]
    for _ in range(kmax):
        wpow.append(wpow[-1] * w)

    zeros = np.zeros(npts)
    for l in range(kmax + 1):
        # Q and its partials in z and in rho
        q = [None] * (kmax + 1)
        qz = [None] * (kmax + 1)
        qr = [None] * (kmax + 1)
        q[l] = np.full(npts, diag[l])
        qz[l] = zeros
        qr[l] = zeros
        if l + 1 <= kmax:
            c = math.sqrt(2 * l + 3)
            q[l + 1] = c * z * q[l]
            qz[l + 1] = c * q[l]
            qr[l + 1] = zeros
        for k in range(l + 2, kmax + 1):
            ak, bk = a[k, l], b[k, l]
            q[k] = ak * (z * q[k - 1] - bk * rho * q[k - 2])
            qz[k] = ak * (q[k - 1] + z * qz[k - 1] - bk * rho * qz[k - 2])
            qr[k] = ak * (z * qr[k - 1] - bk * q[k - 2] - bk * rho * qr[k - 2])

        nrm = _azimuthal_norm(l)
        wl = wpow[l]
        # d/dx1 w^l = l w^(l-1), d/dx2 w^l = i l w^(l-1)
        dwl = l * wpow[l - 1] if l > 0 else np.zeros(npts, dtype=complex)
        trig = [("cos", wl.real, dwl.real, -dwl.imag)]
        if l > 0:
            trig.append(("sin", wl.imag, dwl.imag, dwl.real))
        for k in range(l, kmax + 1):
            gq = np.stack([2.0 * x1 * qr[k], 2.0 * x2 * qr[k], qz[k] + 2.0 * z * qr[k]], axis=1)
            for kind, t, tx1, tx2 in trig:
                row = k * k + (2 * l if kind == "cos" else 2 * l - 1)
                vals[row] = nrm * q[k] * t
                g = gq * t[:, None]
                g[:, 0] += q[k] * tx1
                g[:, 1] += q[k] * tx2
                grads[row] = nrm * g
    return vals, grads


class BallBasis:
    """All N_n orthonormal ball polynomials of degree <= n in R^3."""

    dim = 3

    def __init__(self, n, check_normalization=True):
        if n < 0:
            raise InvalidArgument("degree must be non-negative")
        self.degree = n
        self.size = dimension(n)
        self.labels = index_triples(n)
        self._m = np.array([t[0] for t in self.labels])
        self._j = np.array([t[1] for t in self.labels])
        self._k = self._m - 2 * self._j
        self._row = self._k * self._k + np.array([t[2] for t in self.labels])
        self._c = np.array([normalization_constant(m, j) for m, j, _ in self.labels])
        if check_normalization:
            _check_normalization(n)

    def _parts(self, x):
        n = self.degree
        r2 = np.sum(x * x, axis=1)
        t = np.clip(2.0 * r2 - 1.0, -1.0, 1.0)
        h, dh = solid_harmonics(n, x)
        # radial Jacobi factors, one family per harmonic order k
        p = np.empty((self.size, x.shape[0]))
        dp = np.empty_like(p)
        for k in range(n + 1):
            sel = np.nonzero(self._k == k)[0]
            if sel.size == 0:
                continue
            pv, pd = jacobi_normalized((n - k) // 2, k + 0.5, t)
            p[sel] = pv[self._j[sel]]
            dp[sel] = pd[self._j[sel]]
        hv = h[self._row]
        hg = dh[self._row]
        vals = self._c[:, None] * p * hv
        # grad of p(2|x|^2 - 1) is 4 p'(.) x
        grads = self._c[:, None, None] * (4.0 * (dp * hv)[:, :, None] * x[None, :, :]
                                          + p[:, :, None] * hg)
        return vals.T, grads.transpose(1, 0, 2)

    def evaluate(self, x):
        x, single = _as_points(x)
        vals, _ = self._parts(x)
        return vals[0] if single else vals

    def evaluate_with_gradient(self, x):
        x, single = _as_points(x)
        vals, grads = self._parts(x)
        if single:
            return vals[0], grads[0]
        return vals, grads

    def bubble(self, x):
        """Bubble values (M, N) and gradients (M, N, 3)."""
        x, single = _as_points(x)
        vals, grads = self._parts(x)
        w = 1.0 - np.sum(x * x, axis=1)
        bub = w[:, None] * vals
        bgrad = w[:, None, None] * grads - 2.0 * x[:, None, :] * vals[:, :, None]
        if single:
            return bub[0], bgrad[0]
        return bub, bgrad


@functools.lru_cache(maxsize=None)
def _check_normalization(n):
    """Compare the closed-form constants with a quadrature Gram diagonal."""
    from .quadrature import ball_rule

    rule = ball_rule(n + 2)
    basis = BallBasis(n, check_normalization=False)
    v = basis.evaluate(rule.nodes)
    diag = np.einsum("m,mi,mi->i", rule.weights, v, v)
    dev = float(np.max(np.abs(diag - 1.0)))
    if dev > 1e-10:
        warnings.warn(f"ball basis normalization off by {dev:.3e} at degree {n}",
                      RuntimeWarning, stacklevel=3)
    return dev


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def ball3_basis(n, x):
    return BallBasis(n).evaluate(x)


def bubble_basis3(n, x):
    return BallBasis(n).bubble(x)
