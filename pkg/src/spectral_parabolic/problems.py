"""Parabolic model problems, including manufactured-solution forcing.

All callables are vectorized: points ``s`` come as (M, d) arrays, ``z`` as (M,).
A problem solves

    u_t = div(A(s, t, u) grad u) + f(s, t, u),   u = 0 on the boundary,

and the manufactured problems take f = f1(s, t, z) + f2(s, t) with
f2 = u_t - div(A grad u) - f1(s, t, u) for a chosen exact u.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geometry
from .errors import InvalidArgument

EPS = 0.05 * math.pi


@dataclass(frozen=True)
class ExactSolution:
    u: Callable
    u_t: Callable
    laplacian: Callable  # div(A grad u); the plain Laplacian when A = I


@dataclass(frozen=True)
class ParabolicProblem:
    domain: geometry.MappedDomain
    forcing: Callable
    initial: Callable
    diffusion: Optional[Callable] = None
    exact: Optional[ExactSolution] = None
    name: str = "problem"
    forcing_depends_on_z: bool = True
    diffusion_depends_on_z: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.domain.dim

    def residual(self, s, t):
        """u_t - div(A grad u) - f(s, t, u) for the exact solution."""
        if self.exact is None:
            raise InvalidArgument(f"problem {self.name!r} has no exact solution")
        ex = self.exact
        return ex.u_t(s, t) - ex.laplacian(s, t) - self.forcing(s, t, ex.u(s, t))


# ---------------------------------------------------------------------------
# nonlinearity menu

def f1_zero(s, t, z):
    return np.zeros(np.shape(z))


def f1_exp_cos(s, t, z):
    return np.exp(-z) * math.cos(math.pi * t)


F1_MENU = {"zero": f1_zero, "exp-cos": f1_exp_cos}


def make_manufactured(exact, f1, domain, diffusion=None, name="manufactured",
                      f1_depends_on_z=True, diffusion_depends_on_z=True):
    def f2(s, t):
        return exact.u_t(s, t) - exact.laplacian(s, t) - f1(s, t, exact.u(s, t))

    def forcing(s, t, z):
        return f1(s, t, z) + f2(s, t)

    return ParabolicProblem(
        domain=domain,
        forcing=forcing,
        initial=lambda s: exact.u(s, 0.0),
        diffusion=diffusion,
        exact=exact,
        name=name,
        forcing_depends_on_z=f1_depends_on_z,
        diffusion_depends_on_z=diffusion is not None and diffusion_depends_on_z,
        meta={"f2": f2},
    )


# ---------------------------------------------------------------------------
# exact solutions of the form w(s) cos(t + eps P(s)) with P harmonic

def _cos_product_solution(w, grad_w, lap_w, poly, grad_poly, eps=EPS):
    """u = w(s) cos(t + eps P(s)); P must be harmonic (lap P = 0)."""

    def u(s, t):
        return w(s) * np.cos(t + eps * poly(s))

    def u_t(s, t):
        return -w(s) * np.sin(t + eps * poly(s))

    def lap(s, t):
        arg = t + eps * poly(s)
        c, sn = np.cos(arg), np.sin(arg)
        gp = grad_poly(s)
        gw = grad_w(s)
        # lap c = -eps^2 |grad P|^2 cos - eps sin lap P, and lap P = 0
        lap_c = -eps * eps * np.sum(gp * gp, axis=1) * c
        cross = -2.0 * eps * sn * np.sum(gw * gp, axis=1)
        return lap_w(s) * c + cross + w(s) * lap_c

    return ExactSolution(u, u_t, lap)


def example_disk2d():
    """u = (1 - |s|^2) cos(t + 0.05 pi s1 s2) on the unit disk, f1 = exp(-z) cos(pi t)."""
    exact = _cos_product_solution(
        w=lambda s: 1.0 - np.sum(s * s, axis=1),
        grad_w=lambda s: -2.0 * s,
        lap_w=lambda s: np.full(s.shape[0], -4.0),
        poly=lambda s: s[:, 0] * s[:, 1],
        grad_poly=lambda s: np.stack([s[:, 1], s[:, 0]], axis=1),
    )
    return make_manufactured(exact, f1_exp_cos, geometry.identity_ball(2), name="disk")


def example_mapped3d(a=0.7, b=0.9):
    """u = (1 - |Psi(s)|^2) cos(t + 0.05 pi s1 s2 s3) on the mapped 3D domain."""
    domain = geometry.mapped3d_example(a, b)

    def parts(s):
        s1, s2, s3 = s[:, 0], s[:, 1], s[:, 2]
        sig = np.sqrt(1.0 + a * (s1 + s2))
        tau = np.sqrt(1.0 + b * s3)
        x = np.stack([(sig - 1.0) / a, s2 + (1.0 - sig) / a, (tau - 1.0) / b], axis=1)
        zero = np.zeros_like(s1)
        h = 0.5 / sig
        grads = np.stack([
            np.stack([h, h, zero], axis=1),
            np.stack([-h, 1.0 - h, zero], axis=1),
            np.stack([zero, zero, 0.5 / tau], axis=1),
        ], axis=1)                                   # grads[:, i] = grad x_i
        laps = np.stack([-a / (2.0 * sig ** 3), a / (2.0 * sig ** 3),
                         -b / (4.0 * tau ** 3)], axis=1)
        return x, grads, laps

    def w(s):
        x, _, _ = parts(s)
        return 1.0 - np.sum(x * x, axis=1)

    def grad_w(s):
        x, grads, _ = parts(s)
        return -2.0 * np.einsum("mi,mij->mj", x, grads)

    def lap_w(s):
        x, grads, laps = parts(s)
        return -2.0 * (np.sum(grads * grads, axis=(1, 2)) + np.sum(x * laps, axis=1))

    exact = _cos_product_solution(
        w, grad_w, lap_w,
        poly=lambda s: s[:, 0] * s[:, 1] * s[:, 2],
        grad_poly=lambda s: np.stack([s[:, 1] * s[:, 2], s[:, 0] * s[:, 2],
                                      s[:, 0] * s[:, 1]], axis=1),
    )
    return make_manufactured(exact, f1_exp_cos, domain, name="mapped3d")


def _bubble_decay(dim):
    """u = (1 - |s|^2) e^{-t} on the unit ball, with its derivatives."""
    def u(s, t):
        return (1.0 - np.sum(s * s, axis=1)) * math.exp(-t)

    def u_t(s, t):
        return -u(s, t)

    def lap(s, t):
        return np.full(s.shape[0], -2.0 * dim * math.exp(-t))

    return u, u_t, lap


def heat_disk():
    """u = (1 - |s|^2) e^{-t} on the unit disk with f1 = 0; u lies in the n = 0 space."""
    u, u_t, lap = _bubble_decay(2)
    return make_manufactured(ExactSolution(u, u_t, lap), f1_zero, geometry.identity_ball(2),
                             name="disk_heat", f1_depends_on_z=False)


def heat_ball():
    u, u_t, lap = _bubble_decay(3)
    return make_manufactured(ExactSolution(u, u_t, lap), f1_zero, geometry.identity_ball(3),
                             name="ball_heat", f1_depends_on_z=False)


def disk_variable_diffusion():
    """A = diag(1 + s1^2/4, 1) with u = (1 - |s|^2) e^{-t}."""
    u, u_t, _ = _bubble_decay(2)

    def diffusion(s, t, z):
        a = np.zeros((s.shape[0], 2, 2))
        a[:, 0, 0] = 1.0 + 0.25 * s[:, 0] ** 2
        a[:, 1, 1] = 1.0
        return a

    def div_a_grad(s, t):
        return -(4.0 + 1.5 * s[:, 0] ** 2) * math.exp(-t)

    return make_manufactured(ExactSolution(u, u_t, div_a_grad), f1_zero,
                             geometry.identity_ball(2), diffusion=diffusion,
                             name="disk_variable_diffusion", f1_depends_on_z=False,
                             diffusion_depends_on_z=False)


def disk_nonlinear_diffusion():
    """A = (1 + z^2/2) I with u = (1 - |s|^2) e^{-t} and f1 = exp(-z) cos(pi t)."""
    u, u_t, _ = _bubble_decay(2)

    def diffusion(s, t, z):
        return (1.0 + 0.5 * z * z)[:, None, None] * np.eye(2)[None]

    def div_a_grad(s, t):
        uu = u(s, t)
        e = math.exp(-t)
        grad2 = 4.0 * np.sum(s * s, axis=1) * e * e
        return (1.0 + 0.5 * uu * uu) * (-4.0 * e) + uu * grad2

    return make_manufactured(ExactSolution(u, u_t, div_a_grad), f1_exp_cos,
                             geometry.identity_ball(2), diffusion=diffusion,
                             name="disk_nonlinear_diffusion")


def zero_problem(domain):
    """u0 = 0, f = 0; the exact solution is identically zero."""
    zero_u = lambda s, t: np.zeros(s.shape[0])  # noqa: E731
    exact = ExactSolution(zero_u, zero_u, zero_u)
    return ParabolicProblem(domain, forcing=lambda s, t, z: np.zeros(s.shape[0]),
                            initial=lambda s: np.zeros(s.shape[0]), exact=exact,
                            name=f"zero[{domain.name}]", forcing_depends_on_z=False,
                            diffusion_depends_on_z=False)


def free_decay(domain, f1=f1_zero, name=None):
    """u0 = 1 - |Psi(s)|^2 with f = f1 and no exact solution."""
    def initial(s):
        x = domain.pull_back(s)
        return 1.0 - np.sum(x * x, axis=-1)

    return ParabolicProblem(domain, forcing=f1, initial=initial,
                            name=name or f"free[{domain.name}]",
                            forcing_depends_on_z=f1 is not f1_zero,
                            diffusion_depends_on_z=False)


def example_starlike(name, mode="smoothed"):
    """Limacon or amoeba domain with f = exp(-z) cos(pi t) and u0 = 1 - |Psi(s)|^2."""
    builders = {"limacon": geometry.limacon_domain, "amoeba": geometry.amoeba_domain}
    if name not in builders:
        raise InvalidArgument(f"unknown star-like domain {name!r}")
    return free_decay(builders[name](mode), f1_exp_cos, name=name)


def custom_problem(mapping_path, f1="exp-cos"):
    if f1 not in F1_MENU:
        raise InvalidArgument(f"unknown f1 {f1!r}; choose from {sorted(F1_MENU)}")
    domain = geometry.load_polynomial_domain(mapping_path)
    return free_decay(domain, F1_MENU[f1], name=f"custom[{domain.name}]")


PROBLEMS = {
    "disk": example_disk2d,
    "disk_heat": heat_disk,
    "ball_heat": heat_ball,
    "mapped3d": example_mapped3d,
    "limacon": lambda: example_starlike("limacon"),
    "amoeba": lambda: example_starlike("amoeba"),
    "disk_variable_diffusion": disk_variable_diffusion,
    "disk_nonlinear_diffusion": disk_nonlinear_diffusion,
    "disk_zero": lambda: zero_problem(geometry.identity_ball(2)),
    "disk_free": lambda: free_decay(geometry.identity_ball(2), name="disk_free"),
    "limacon_free": lambda: free_decay(geometry.limacon_domain(), name="limacon_free"),
    "amoeba_free": lambda: free_decay(geometry.amoeba_domain(), name="amoeba_free"),
    "ball_free": lambda: free_decay(geometry.identity_ball(3), name="ball_free"),
    "mapped3d_free": lambda: free_decay(geometry.mapped3d_example(), name="mapped3d_free"),
}


def get_problem(name, mapping=None, f1="exp-cos"):
    if mapping is not None:
        return custom_problem(mapping, f1)
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise InvalidArgument(
            f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
