"""Time integration of the coefficient system a' = G^{-1} (B(t, a) a + f_N(t, a)).

The default integrator is SciPy's variable-order (1-5), variable-step BDF
with a user Jacobian.  SciPy's Radau IIA (order 5) is available for runs that
need time errors near machine precision, where BDF stalls around 1e-13.  A
fixed-step BDF2 and a classical RK4 are included for debugging and for
comparing against an explicit method.
"""
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import InvalidArgument, StiffFailure


@dataclass
class IvpProblem:
    rhs: Callable
    jac: Callable
    a0: np.ndarray
    t_final: float
    rtol: float = 1e-8
    atol: float = 1e-10
    t0: float = 0.0

    def __post_init__(self):
        self.a0 = np.asarray(self.a0, dtype=float)
        if not self.t_final > self.t0:
            raise InvalidArgument("final time must exceed the initial time")
        if self.rtol <= 0 or self.atol <= 0:
            raise InvalidArgument("tolerances must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    coeffs: np.ndarray          # (len(times), N)
    stats: dict = field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        n = self.coeffs.shape[1]
        buf.write("time," + ",".join(f"a{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(self.times, self.coeffs):
            buf.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def stats_json(self):
        return json.dumps(self.stats, indent=2, sort_keys=True)


def jacobian_estimate(system, t, a, fd_step=None):
    """G^{-1} B(t, a) plus a forward-difference estimate of G^{-1} d f_N / d a.

    The solution dependence of B itself is not differentiated.
    """
    a = np.asarray(a, dtype=float)
    jac = system.solve_mass(system.stiffness(t, a))
    if not system.problem.forcing_depends_on_z:
        return jac
    base = system.load(t, a)
    eps = math.sqrt(np.finfo(float).eps) if fd_step is None else fd_step
    dload = np.empty((a.size, a.size))
    for k in range(a.size):
        h = eps * (1.0 + abs(a[k]))
        ak = a.copy()
        ak[k] += h
        dload[:, k] = (system.load(t, ak) - base) / h
    return jac + system.solve_mass(dload)


def ivp_from_system(system, a0, t_final, rtol=1e-8, atol=1e-10, t0=0.0):
    return IvpProblem(
        rhs=system.rhs,
        jac=lambda t, a: jacobian_estimate(system, t, a),
        a0=a0, t_final=t_final, rtol=rtol, atol=atol, t0=t0,
    )


def _check_times(problem, output_times):
    ts = np.asarray(output_times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise InvalidArgument("output times must be a non-empty 1D sequence")
    if np.any(np.diff(ts) <= 0):
        raise InvalidArgument("output times must be strictly increasing")
    if ts[0] < problem.t0 or ts[-1] > problem.t_final * (1 + 1e-14):
        raise InvalidArgument("output times must lie in [t0, T]")
    return ts


def solve_ivp(problem, output_times, method="bdf", step=None):
    """Integrate ``problem`` and sample the solution at ``output_times``.

    ``method`` is ``"bdf"`` (adaptive, default), ``"radau"`` (adaptive),
    ``"bdf2"`` or ``"rk4"``; the fixed-step methods need ``step``.
    """
    ts = _check_times(problem, output_times)
    if method in _ADAPTIVE:
        return _solve_adaptive(problem, ts, method)
    if step is None or step <= 0:
        raise InvalidArgument(f"method {method!r} needs a positive step size")
    if method == "bdf2":
        return _solve_fixed(problem, ts, step, _bdf2_stepper(problem))
    if method == "rk4":
        return _solve_fixed(problem, ts, step, _rk4_stepper(problem))
    raise InvalidArgument(f"unknown method {method!r}")


def _finite_rhs(problem):
    def fun(t, a):
        out = problem.rhs(t, a)
        if not np.all(np.isfinite(out)):
            raise StiffFailure(f"non-finite right-hand side at t={t:.17g}")
        return out
    return fun


_ADAPTIVE = {"bdf": scipy.integrate.BDF, "radau": scipy.integrate.Radau}


def _solve_adaptive(problem, ts, method):
    fun = _finite_rhs(problem)
    solver = _ADAPTIVE[method](fun, problem.t0, problem.a0, problem.t_final,
                               rtol=problem.rtol, atol=problem.atol, jac=problem.jac)
    out = np.empty((ts.size, problem.a0.size))
    i = 0
    while i < ts.size and ts[i] <= problem.t0:
        out[i] = problem.a0
        i += 1
    steps = 0
    while i < ts.size:
        if solver.status != "running":
            raise StiffFailure(f"integrator stopped at t={solver.t:.17g} before t={ts[i]:.17g}")
        msg = solver.step()
        if solver.status == "failed":
            raise StiffFailure(f"{method} failure at t={solver.t:.17g}: {msg}")
        steps += 1
        dense = None
        while i < ts.size and ts[i] <= solver.t:
            if ts[i] == solver.t:
                out[i] = solver.y
            else:
                if dense is None:
                    dense = solver.dense_output()
                out[i] = dense(ts[i])
            i += 1
    stats = {"method": method, "steps": steps, "nfev": int(solver.nfev),
             "njev": int(solver.njev), "nlu": int(solver.nlu)}
    return Trajectory(ts, out, stats)


def _solve_fixed(problem, ts, step, stepper):
    out = np.empty((ts.size, problem.a0.size))
    t, a = problem.t0, problem.a0.copy()
    stats = {"method": stepper.name, "steps": 0, "nfev": 0, "njev": 0}
    state = stepper.start(t, a)
    for i, target in enumerate(ts):
        span = target - t
        if span > 0:
            nsub = max(1, math.ceil(span / step - 1e-12))
            h = span / nsub
            for _ in range(nsub):
                t_new = t + h
                a, state = stepper.advance(t, a, h, state, stats)
                t = t_new
                stats["steps"] += 1
                if not np.all(np.isfinite(a)):
                    raise StiffFailure(f"{stepper.name} produced non-finite values at t={t:.17g}")
            t = target
        out[i] = a
    return Trajectory(ts, out, stats)


@dataclass
class _Stepper:
    name: str
    start: Callable
    advance: Callable


def _rk4_stepper(problem):
    f = _finite_rhs(problem)

    def advance(t, a, h, state, stats):
        k1 = f(t, a)
        k2 = f(t + 0.5 * h, a + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, a + 0.5 * h * k2)
        k4 = f(t + h, a + h * k3)
        stats["nfev"] += 4
        return a + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), state

    return _Stepper("rk4", lambda t, a: None, advance)


def _bdf2_stepper(problem, newton_tol=None, max_newton=8):
    """Variable-step BDF2 (BDF1 start) with a simplified Newton iteration."""
    f = _finite_rhs(problem)
    tol = 0.1 * problem.rtol if newton_tol is None else newton_tol

    def advance(t, a, h, prev, stats):
        t_new = t + h
        if prev is None:
            # backward Euler: y - h f(y) = a
            c_new, rhs_const = h, a
        else:
            a_prev, h_prev = prev
            w = h / h_prev
            c_new = h * (1 + w) / (1 + 2 * w)
            rhs_const = ((1 + w) ** 2 * a - w * w * a_prev) / (1 + 2 * w)
        y = a + h * f(t, a)
        stats["nfev"] += 1
        jac = problem.jac(t_new, y)
        stats["njev"] += 1
        lu = scipy.linalg.lu_factor(np.eye(a.size) - c_new * jac)
        for _ in range(max_newton):
            res = y - c_new * f(t_new, y) - rhs_const
            stats["nfev"] += 1
            dy = scipy.linalg.lu_solve(lu, res)
            y = y - dy
            if np.linalg.norm(dy) <= tol * (problem.atol / problem.rtol + np.linalg.norm(y)):
                break
        else:
            raise StiffFailure(f"BDF2 Newton iteration did not converge at t={t_new:.17g}")
        return y, (a, h)

    return _Stepper("bdf2", lambda t, a: None, advance)


def condition_number(matrix):
    """2-norm condition number from the singular values; inf if singular."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgument("condition number needs a square matrix")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] == 0 or sv[-1] <= sv[0] * np.finfo(float).eps:
        return math.inf
    return float(sv[0] / sv[-1])


def energy(system, coeffs):
    """a^T G a, the squared L2(Omega) norm of u_n."""
    coeffs = np.asarray(coeffs, dtype=float)
    return float(coeffs @ system.mass @ coeffs)


def integrate(system, t_final, output_times, rtol=1e-8, atol=1e-10, a0=None,
              method="bdf", step=None):
    """Project the initial data (unless ``a0`` is given) and integrate."""
    if a0 is None:
        a0 = system.project_initial()
    problem = ivp_from_system(system, a0, t_final, rtol=rtol, atol=atol)
    return solve_ivp(problem, output_times, method=method, step=step)
