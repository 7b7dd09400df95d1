import json
import math

import numpy as np
import pytest

from spectral_parabolic import geometry, problems
from spectral_parabolic.errors import InvalidArgument, StiffFailure
from spectral_parabolic.galerkin import GalerkinSystem
from spectral_parabolic.timestepper import (IvpProblem, condition_number, energy, integrate,
                                            ivp_from_system, jacobian_estimate, solve_ivp)


def scalar_decay(rate=6.0, a0=1.0, t_final=1.0, rtol=1e-8, atol=1e-14):
    return IvpProblem(rhs=lambda t, a: -rate * a, jac=lambda t, a: np.array([[-rate]]),
                      a0=np.array([a0]), t_final=t_final, rtol=rtol, atol=atol)


def test_zero_dynamics_keeps_initial_state():
    a0 = np.array([1.0, -2.0, 0.5])
    prob = IvpProblem(rhs=lambda t, a: np.zeros_like(a), jac=lambda t, a: np.zeros((3, 3)),
                      a0=a0, t_final=3.0)
    traj = solve_ivp(prob, np.linspace(0, 3, 17))
    assert np.max(np.abs(traj.coeffs - a0)) < 1e-14


def test_single_mode_decay():
    system = GalerkinSystem(problems.get_problem("disk_free"), 0)
    a0 = system.project_initial()
    rhs = system.rhs(0.0, a0)
    assert rhs[0] == pytest.approx(-6.0 * a0[0], rel=1e-13)
    rtol = 1e-8
    times = [0.0, 0.5, 1.0]
    exact = a0[0] * np.exp(-6.0 * np.array(times))
    radau = integrate(system, 1.0, times, rtol=rtol, atol=1e-14, method="radau")
    assert np.max(np.abs(radau.coeffs[:, 0] - exact) / exact) < 10 * rtol
    # BDF controls the local error only; against the amplitude a(0) it is
    # well inside 10 rtol, while the pointwise relative error at t = 1 sits
    # near 27 rtol (local errors accumulate over ~150 steps)
    bdf = integrate(system, 1.0, times, rtol=rtol, atol=1e-14)
    err = np.abs(bdf.coeffs[:, 0] - exact)
    assert np.max(err) < 10 * rtol * abs(a0[0])
    assert err[-1] / exact[-1] < 50 * rtol


@pytest.mark.parametrize("n", [0, 1, 2])
def test_exact_subspace_solution(n):
    p = problems.get_problem("disk_heat")
    system = GalerkinSystem(p, n)
    rtol = 1e-8
    times = np.linspace(0, 2, 21)
    traj = integrate(system, 2.0, times, rtol=rtol, atol=1e-12)
    x = np.array([[0.0, 0.0], [0.3, -0.4], [-0.7, 0.1]])
    for t, a in zip(times, traj.coeffs):
        err = np.abs(system.evaluate(a, x) - p.exact.u(x, t))
        assert err.max() <= 10 * rtol


def test_tightening_tolerance_reduces_error():
    errs = []
    rtols = [1e-6 / 2 ** k for k in range(8)]
    for rtol in rtols:
        traj = solve_ivp(scalar_decay(rtol=rtol, atol=1e-16), [0.0, 0.5, 1.0])
        errs.append(abs(traj.coeffs[-1, 0] - math.exp(-6.0)))
    for a, b in zip(errs, errs[1:]):
        assert b <= 2 * a
    assert errs[-1] < 0.1 * errs[0]


def test_jacobian_linear_problem_is_exact():
    system = GalerkinSystem(problems.get_problem("disk_heat"), 4)
    a = np.linspace(-1, 1, system.size)
    ref = np.linalg.solve(system.mass, system.stiffness())
    np.testing.assert_allclose(jacobian_estimate(system, 0.3, a), ref, atol=1e-10)


def test_jacobian_identity_forcing():
    p = problems.ParabolicProblem(geometry.identity_ball(2), forcing=lambda s, t, z: z,
                                  initial=lambda s: np.zeros(s.shape[0]))
    system = GalerkinSystem(p, 4)
    a = np.linspace(-1, 1, system.size)
    ref = np.linalg.solve(system.mass, system.stiffness()) + np.eye(system.size)
    assert np.max(np.abs(jacobian_estimate(system, 0.0, a) - ref)) < 1e-6


def test_jacobian_fd_step_self_consistent():
    system = GalerkinSystem(problems.get_problem("disk"), 4)
    a = system.project_initial()
    h = math.sqrt(np.finfo(float).eps)
    j1 = jacobian_estimate(system, 0.7, a, fd_step=h)
    j2 = jacobian_estimate(system, 0.7, a, fd_step=h / 2)
    assert np.max(np.abs(j1 - j2)) < 1e-5


def test_condition_number():
    assert condition_number(np.eye(4)) == pytest.approx(1.0)
    assert condition_number(np.diag([1.0, 10.0])) == pytest.approx(10.0)
    assert condition_number(np.array([[1.0, 2.0], [2.0, 4.0]])) == math.inf
    with pytest.raises(InvalidArgument):
        condition_number(np.ones((2, 3)))


def test_conditioning_grows_with_degree():
    p = problems.get_problem("disk")
    conds = []
    for n in (2, 4, 6):
        system = GalerkinSystem(p, n)
        conds.append(condition_number(np.linalg.solve(system.mass, system.stiffness())))
    assert conds[0] < conds[1] < conds[2]


@pytest.mark.parametrize("name,n", [("disk_free", 6), ("limacon_free", 6), ("ball_free", 3)])
def test_energy_dissipation(name, n):
    system = GalerkinSystem(problems.get_problem(name), n)
    traj = integrate(system, 2.0, np.linspace(0, 2, 100), atol=1e-12)
    e = np.array([energy(system, a) for a in traj.coeffs])
    assert np.all(np.diff(e) <= 1e-10 * e[:-1])


def test_determinism():
    system = GalerkinSystem(problems.get_problem("disk"), 5)
    times = np.linspace(0, 3, 31)
    a = integrate(system, 3.0, times)
    b = integrate(GalerkinSystem(problems.get_problem("disk"), 5), 3.0, times)
    assert a.to_csv() == b.to_csv()
    assert a.stats == b.stats


@pytest.mark.parametrize("method,order", [("bdf2", 2), ("rk4", 4)])
def test_fixed_step_convergence_order(method, order):
    errs = []
    for h in [0.02, 0.01, 0.005]:
        traj = solve_ivp(scalar_decay(), [0.0, 1.0], method=method, step=h)
        errs.append(abs(traj.coeffs[-1, 0] - math.exp(-6.0)))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(abs(r - order) < 0.3 for r in rates), rates


def test_radau_matches_bdf():
    system = GalerkinSystem(problems.get_problem("disk"), 4)
    times = np.linspace(0, 2, 11)
    a = integrate(system, 2.0, times, rtol=1e-10, atol=1e-12)
    b = integrate(system, 2.0, times, rtol=1e-10, atol=1e-12, method="radau")
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-8
    assert b.stats["method"] == "radau"


def test_non_finite_rhs_raises():
    prob = IvpProblem(rhs=lambda t, a: a * (np.nan if t > 0.5 else -1.0),
                      jac=lambda t, a: -np.eye(1), a0=np.ones(1), t_final=1.0)
    with pytest.raises(StiffFailure, match="t="):
        solve_ivp(prob, [0.0, 1.0])
    with pytest.raises(StiffFailure):
        solve_ivp(prob, [0.0, 1.0], method="rk4", step=0.1)


def test_blow_up_reports_failure():
    prob = IvpProblem(rhs=lambda t, a: a * a, jac=lambda t, a: np.diag(2 * a),
                      a0=np.ones(1), t_final=2.0)
    with pytest.raises(StiffFailure):
        solve_ivp(prob, [0.0, 2.0])


def test_argument_validation():
    with pytest.raises(InvalidArgument):
        scalar_decay(t_final=0.0)
    with pytest.raises(InvalidArgument):
        scalar_decay(rtol=0.0)
    prob = scalar_decay()
    with pytest.raises(InvalidArgument):
        solve_ivp(prob, [0.0, 0.5, 0.5])
    with pytest.raises(InvalidArgument):
        solve_ivp(prob, [0.0, 1.5])
    with pytest.raises(InvalidArgument):
        solve_ivp(prob, [])
    with pytest.raises(InvalidArgument):
        solve_ivp(prob, [1.0], method="rk4")
    with pytest.raises(InvalidArgument):
        solve_ivp(prob, [1.0], method="euler", step=0.1)


def test_dense_output_at_arbitrary_times():
    traj = solve_ivp(scalar_decay(rtol=1e-10), np.array([0.0, 0.123, 0.456, 0.789, 1.0]))
    np.testing.assert_allclose(traj.coeffs[:, 0], np.exp(-6.0 * traj.times), rtol=1e-8)


def test_trajectory_exports():
    system = GalerkinSystem(problems.get_problem("disk_heat"), 1)
    prob = ivp_from_system(system, system.project_initial(), 1.0)
    traj = solve_ivp(prob, [0.0, 0.5, 1.0])
    lines = traj.to_csv().strip().split("\n")
    assert lines[0] == "time,a1,a2,a3"
    assert len(lines) == 4
    np.testing.assert_array_equal([float(v) for v in lines[2].split(",")[1:]], traj.coeffs[1])
    stats = json.loads(traj.stats_json())
    assert {"method", "steps", "nfev", "njev", "nlu"} <= set(stats)
    assert stats["steps"] > 0
