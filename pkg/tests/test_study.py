import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_parabolic import study
from spectral_parabolic.errors import ConfigError, SpectralError


def test_default_sample_layout():
    pts = study.sample_points(801, 2)
    assert pts.shape == (801, 2)
    np.testing.assert_array_equal(pts[0], [0.0, 0.0])
    radii = np.round(np.hypot(pts[1:, 0], pts[1:, 1]), 12)
    values, counts = np.unique(radii, return_counts=True)
    np.testing.assert_allclose(values, 0.999 * np.arange(1, 21) / 20, atol=1e-12)
    assert set(counts) == {40}


@given(st.integers(1, 3000))
def test_disk_samples_exact_count_and_interior(count):
    pts = study.sample_points(count, 2)
    assert pts.shape == (count, 2)
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) < 1.0)


@given(st.integers(1, 5000))
def test_ball_samples_interior(count):
    pts = study.sample_points(count, 3)
    assert np.all(np.linalg.norm(pts, axis=1) < 1.0)
    assert len(np.unique(pts, axis=0)) == len(pts)


def test_ball_default_grid():
    pts = study.sample_points(801, 3)
    assert pts.shape == (801, 3)


def test_sample_points_deterministic():
    np.testing.assert_array_equal(study.sample_points(801, 2), study.sample_points(801, 2))
    np.testing.assert_array_equal(study.sample_points(500, 3), study.sample_points(500, 3))
    with pytest.raises(ConfigError):
        study.sample_points(0, 2)
    with pytest.raises(ConfigError):
        study.sample_points(10, 4)


@pytest.mark.parametrize("bad", [
    {"degrees": ()}, {"degrees": (4, 2)}, {"degrees": (2, 2)}, {"degrees": (-1,)},
    {"t_final": 0.0}, {"n_samples": 0}, {"n_times": 1}, {"rtol": 0.0},
    {"method": "euler"}, {"method": "rk4"}, {"q": 0}, {"jobs": 0}, {"f1": "cubic"},
    {"projection": "h1"},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        study.StudyConfig(**bad)


def test_config_from_dict():
    cfg = study.StudyConfig.from_dict({"problem": "limacon", "degrees": [2, 4]})
    assert cfg.degrees == (2, 4)
    with pytest.raises(ConfigError):
        study.StudyConfig.from_dict({"colour": "red"})
    assert cfg.resolved_t_final(2) == 20.0 and cfg.resolved_t_final(3) == 2.0
    assert len(cfg.output_times(2)) == 200
    assert json.loads(cfg.echo())["problem"] == "limacon"


def test_unknown_problem_is_config_error():
    with pytest.raises(ConfigError):
        study.StudyConfig(problem="torus").make_problem()


def test_exact_subspace_run(tmp_path):
    rtol = 1e-10
    cfg = study.StudyConfig(problem="disk_heat", degrees=(0,), t_final=1.0, rtol=rtol,
                            outdir=str(tmp_path))
    traj, report = study.run_solve(cfg)
    assert report.max_errors[0] <= 10 * rtol
    assert np.all(report.errors >= 0) and np.all(np.isfinite(report.errors))
    for name in ["trajectory.csv", "stats.json", "errors_over_time.csv", "errors_over_time.svg"]:
        assert (tmp_path / name).exists()
    rows = (tmp_path / "errors_over_time.csv").read_text().strip().split("\n")
    assert rows[0] == "time,max_abs_error" and len(rows) == 201


def test_zero_problem_has_zero_error():
    cfg = study.StudyConfig(problem="disk_zero", degrees=(4,), t_final=1.0, n_times=5)
    traj, report = study.run_solve(cfg)
    assert np.all(traj.coeffs == 0.0)
    assert np.all(report.errors == 0.0)


def test_solve_without_exact_solution(tmp_path):
    cfg = study.StudyConfig(problem="limacon", degrees=(3,), t_final=0.5, n_times=6,
                            outdir=str(tmp_path))
    traj, report = study.run_solve(cfg)
    assert report.errors is None and report.max_errors is None
    assert not (tmp_path / "errors_over_time.csv").exists()
    assert (tmp_path / "trajectory.csv").exists()


def test_solver_failure_echoes_config():
    cfg = study.StudyConfig(problem="disk", degrees=(3,), method="rk4", step=1.0, t_final=20.0,
                            n_times=3)
    # the unstable explicit run overflows; whichever error surfaces carries the config
    with pytest.raises(SpectralError, match="config"):
        study.run_solve(cfg)


def test_convergence_self_mode(tmp_path):
    cfg = study.StudyConfig(problem="limacon", degrees=(2, 3, 4, 6), t_final=0.5, n_times=6,
                            n_samples=101, outdir=str(tmp_path))
    report = study.run_convergence(cfg)
    assert report.error_kind.startswith("self-convergence")
    assert report.max_errors[-1] == 0.0
    text = (tmp_path / "convergence.csv").read_text()
    assert text.startswith("# errors: self-convergence vs n=6")
    assert (tmp_path / "convergence.svg").exists()
    fit = json.loads((tmp_path / "convergence_fit.json").read_text())
    assert fit["points"] == 3


def test_convergence_needs_four_degrees():
    with pytest.raises(ConfigError):
        study.run_convergence(study.StudyConfig(degrees=(2, 4, 6)))
    with pytest.raises(ConfigError):
        study.run_conditioning(study.StudyConfig(degrees=(2, 4, 6)))


def test_conditioning_table(tmp_path):
    cfg = study.StudyConfig(problem="disk", degrees=(2, 4, 6, 8), outdir=str(tmp_path))
    report = study.run_conditioning(cfg)
    assert all(a < b for a, b in zip(report.conditions, report.conditions[1:]))
    rows = (tmp_path / "conditioning.csv").read_text().strip().split("\n")
    assert rows[0] == "degree,N,N2,cond"
    assert rows[2].split(",")[:3] == ["4", "15", "225"]


def test_linear_fit():
    fit = study.linear_fit([0, 1, 2, 3], [1, 3, 5, 7])
    assert fit["slope"] == pytest.approx(2.0) and fit["r2"] == pytest.approx(1.0)
    assert math.isnan(study.linear_fit([1], [1])["slope"])


def test_parallel_matches_serial():
    base = study.StudyConfig(problem="disk", degrees=(1, 2, 3, 4), t_final=1.0, n_times=5,
                             n_samples=41)
    serial = study.run_convergence(base)
    parallel = study.run_convergence(base.replace(jobs=2))
    assert serial.max_errors == parallel.max_errors
