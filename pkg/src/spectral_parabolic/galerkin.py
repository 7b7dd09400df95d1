"""Galerkin matrices on the reference ball.

With bubble functions psi_k on B_d, nodes x_m, weights w_m and the map phi,

    G[k, l]  = sum_m w_m det J(x_m) psi_k psi_l
    B[k, l]  = -sum_m w_m det J(x_m) grad psi_k . At(x_m, t, u_n) grad psi_l
    f_N[l]   = sum_m w_m det J(x_m) f(phi(x_m), t, u_n(x_m)) psi_l

where At = J^{-1} A J^{-T}.  The coefficient ODE is G a' = B(t, a) a + f_N(t, a).
"""
import io
from functools import cached_property

import numpy as np
import scipy.linalg

from . import basis2d, basis3d, quadrature
from .errors import AssemblyError, EvaluationError, InvalidArgument
from .geometry import transform_diffusion


def make_basis(dim, n):
    if dim == 2:
        return basis2d.RidgeBasis(n)
    if dim == 3:
        return basis3d.BallBasis(n)
    raise InvalidArgument(f"unsupported dimension {dim}")


def default_order(dim, n):
    """Quadrature order: q = 2n, raised where needed for exact mass/projection."""
    if dim == 2:
        return max(2 * n, n + 2)
    # ball rule exactness is 2q - 1
    return max(2 * n, n + 3)


class GalerkinSystem:
    """Assembled Galerkin operators for one problem and degree.

    Parameters
    ----------
    problem : ParabolicProblem
    n : int
        Polynomial degree of the trial space.
    q : int, optional
        Quadrature order; defaults to :func:`default_order`.
    projection : {"ball", "domain"}
        Inner product used by :meth:`project_initial`; ``"ball"`` projects
        u0 o phi in L2(B_d), ``"domain"`` uses the det J weighted product.
    """

    def __init__(self, problem, n, q=None, projection="ball"):
        if n < 0:
            raise InvalidArgument("degree must be non-negative")
        if projection not in ("ball", "domain"):
            raise InvalidArgument(f"unknown projection {projection!r}")
        self.problem = problem
        self.domain = problem.domain
        self.dim = problem.dim
        self.degree = n
        self.q = default_order(self.dim, n) if q is None else int(q)
        self.projection = projection
        self.basis = make_basis(self.dim, n)
        self.size = self.basis.size
        self.rule = quadrature.rule_for(self.dim, self.q)

        x = self.rule.nodes
        self.nodes = x
        self.points = self.domain.map(x)
        self.jac = self.domain.jac(x)
        det = self.domain.det(x)
        if np.any(det == 0) or (np.any(det > 0) and np.any(det < 0)):
            raise AssemblyError("det J changes sign or vanishes at quadrature nodes")
        self.det = np.abs(det)
        self.wdet = self.rule.weights * self.det
        self.psi, self.dpsi = self.basis.bubble(x)
        self._static_b = None

    # -- mass matrix ---------------------------------------------------------

    @cached_property
    def mass(self):
        g = self.psi.T @ (self.wdet[:, None] * self.psi)
        g = 0.5 * (g + g.T)
        return g

    @cached_property
    def mass_factor(self):
        try:
            return scipy.linalg.cho_factor(self.mass, lower=True)
        except np.linalg.LinAlgError as exc:
            raise AssemblyError(
                f"mass matrix is not positive definite (degree {self.degree}, q {self.q})"
            ) from exc

    def solve_mass(self, rhs):
        return scipy.linalg.cho_solve(self.mass_factor, rhs)

    # -- stiffness -----------------------------------------------------------

    def _state_at_nodes(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.size,):
            raise InvalidArgument(f"expected {self.size} coefficients, got {coeffs.shape}")
        return self.psi @ coeffs

    @cached_property
    def _a_tilde_identity(self):
        return transform_diffusion(self.jac)

    def _assemble_b(self, at):
        m, n, d = self.dpsi.shape
        flux = np.matmul(self.dpsi, at) * self.wdet[:, None, None]   # (M, N, d)
        lhs = flux.transpose(1, 0, 2).reshape(n, m * d)
        rhs = self.dpsi.transpose(1, 0, 2).reshape(n, m * d)
        return -(lhs @ rhs.T)

    def stiffness(self, t=0.0, coeffs=None):
        """B(t, u_n); cached when A does not depend on t or the solution."""
        p = self.problem
        if p.diffusion is None:
            if self._static_b is None:
                self._static_b = self._assemble_b(self._a_tilde_identity)
            return self._static_b
        if coeffs is None:
            coeffs = np.zeros(self.size)
        z = self._state_at_nodes(coeffs)
        a = np.asarray(p.diffusion(self.points, t, z), dtype=float)
        return self._assemble_b(transform_diffusion(self.jac, a))

    # -- load ----------------------------------------------------------------

    def forcing_at_nodes(self, t, z):
        # non-finite values are reported below, so numpy's warnings are noise
        with np.errstate(over="ignore", invalid="ignore"):
            fv = np.asarray(self.problem.forcing(self.points, t, z), dtype=float)
        fv = np.broadcast_to(fv, z.shape)
        bad = ~np.isfinite(fv)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationError(
                f"non-finite forcing at t={float(t):.17g}, node x={self.nodes[i].tolist()}, "
                f"s={self.points[i].tolist()}")
        return fv

    def load(self, t, coeffs):
        z = self._state_at_nodes(coeffs)
        return self.psi.T @ (self.wdet * self.forcing_at_nodes(t, z))

    # -- ODE right-hand side -------------------------------------------------

    def rhs(self, t, coeffs):
        return self.solve_mass(self.stiffness(t, coeffs) @ coeffs + self.load(t, coeffs))

    # -- initial projection --------------------------------------------------

    @cached_property
    def _projection_gram(self):
        w = self.rule.weights if self.projection == "ball" else self.wdet
        g = self.psi.T @ (w[:, None] * self.psi)
        try:
            return scipy.linalg.cho_factor(0.5 * (g + g.T), lower=True)
        except np.linalg.LinAlgError as exc:
            raise AssemblyError("projection Gram matrix is singular") from exc

    def project_initial(self, u0=None, on_ball=False):
        """Coefficients of the L2 projection of u0 o phi onto the trial space.

        ``u0`` takes physical points; with ``on_ball=True`` it takes reference
        points instead.  Defaults to the problem's initial data.
        """
        if self.q < self.degree + 2:
            raise InvalidArgument(
                f"projection needs q >= n + 2 (q={self.q}, n={self.degree})")
        u0 = self.problem.initial if u0 is None else u0
        vals = np.asarray(u0(self.nodes if on_ball else self.points), dtype=float)
        w = self.rule.weights if self.projection == "ball" else self.wdet
        return scipy.linalg.cho_solve(self._projection_gram, self.psi.T @ (w * vals))

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, coeffs, x):
        """u_n at phi(x) for reference points ``x`` (shape (M, d))."""
        return evaluate_solution(self.basis, coeffs, x)


def evaluate_solution(basis, coeffs, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    vals, _ = basis.bubble(x)
    return vals @ np.asarray(coeffs, dtype=float)


def assemble_mass(system):
    return system.mass


def assemble_stiffness(system, t, coeffs):
    return system.stiffness(t, coeffs)


def assemble_load(system, t, coeffs):
    return system.load(t, coeffs)


def project_initial(system, u0=None):
    return system.project_initial(u0)


def coefficients_to_csv(coeffs, basis, t=None):
    """Flat index, label, value (17 significant digits)."""
    buf = io.StringIO()
    labels = basis.labels
    if basis.dim == 2:
        buf.write("# index map: flat = m*(m+1)/2 + k over (m, k), 0 <= k <= m <= n\n")
        head = "index,m,k,value\n"
    else:
        buf.write("# index map: lexicographic (m, j, beta), j <= m/2, beta <= 2(m-2j)\n")
        head = "index,m,j,beta,value\n"
    if t is not None:
        buf.write(f"# t = {t:.17g}\n")
    buf.write(head)
    for i, (lab, v) in enumerate(zip(labels, coeffs)):
        buf.write(",".join([str(i), *map(str, lab), f"{v:.17g}"]) + "\n")
    return buf.getvalue()


def read_coefficients_csv(text):
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return np.array([float(r.split(",")[-1]) for r in rows[1:]])
