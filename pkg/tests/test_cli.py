import json
import subprocess
import sys

import pytest

from spectral_parabolic import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_problems(capsys):
    code, out, _ = run(["list-problems"], capsys)
    assert code == 0 and "disk" in out.split() and "mapped3d" in out.split()


def test_dump_rule(capsys, tmp_path):
    code, out, _ = run(["dump-rule", "--dim", "2", "--q", "1"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "x1,x2,weight" and len(out.splitlines()) == 7
    target = tmp_path / "rule.csv"
    assert run(["dump-rule", "--dim", "3", "--q", "2", "--out", str(target)], capsys)[0] == 0
    assert len(target.read_text().splitlines()) == 17


def test_dump_rule_bad_order(capsys):
    code, _, err = run(["dump-rule", "--dim", "2", "--q", "0"], capsys)
    assert code == 1 and "config error" in err


def test_solve_with_config_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('problem = "disk_heat"\ndegrees = [3]\nt_final = 1.0\nrtol = 1e-10\n'
                   'n_times = 11\n')
    out_dir = tmp_path / "out"
    code, out, _ = run(["solve", "--config", str(cfg), "--degree", "0", "--out", str(out_dir)],
                       capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["degree"] == 0 and summary["max_error"] <= 1e-9
    assert (out_dir / "errors_over_time.csv").read_text().count("\n") == 12


def test_study_commands(capsys, tmp_path):
    code, out, _ = run(["study", "conditioning", "--problem", "disk", "--degrees", "2", "3",
                        "4", "5", "--out", str(tmp_path)], capsys)
    assert code == 0 and '"slope"' in out
    code, out, _ = run(["study", "convergence", "--problem", "disk", "--degrees", "1", "2", "3",
                        "4", "--t-final", "0.5", "--n-times", "4", "--samples", "41",
                        "--out", str(tmp_path)], capsys)
    assert code == 0 and "errors: exact" in out
    assert (tmp_path / "convergence.csv").exists()


def test_project_initial(capsys, tmp_path):
    code, out, _ = run(["project-initial", "--problem", "disk_heat", "--degree", "2"], capsys)
    assert code == 0
    rows = [r for r in out.splitlines() if not r.startswith("#")]
    assert rows[0] == "index,m,k,value" and len(rows) == 7
    assert float(rows[1].split(",")[-1]) == pytest.approx(1.7724538509055159, abs=1e-12)


def test_exit_codes(capsys, tmp_path):
    assert run(["solve", "--problem", "torus"], capsys)[0] == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("degrees = [")
    assert run(["solve", "--config", str(bad)], capsys)[0] == 1
    bad.write_text("speed = 3\n")
    assert run(["solve", "--config", str(bad)], capsys)[0] == 1
    assert run(["solve", "--problem", "disk", "--degree", "2", "--method", "rk4"], capsys)[0] == 1
    code, _, err = run(["solve", "--problem", "disk", "--degree", "3", "--method", "rk4",
                        "--step", "1.0", "--n-times", "3"], capsys)
    assert code == 2 and "solver failure" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spectral_parabolic", "list-problems"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "amoeba" in proc.stdout
