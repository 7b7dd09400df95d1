"""Command-line entry point.

    spectral-parabolic solve --problem disk --degree 8 --out runs/disk
    spectral-parabolic study convergence --problem disk --degrees 4 6 8 10 12
    spectral-parabolic study conditioning --degrees 4 6 8 10 12 14 16
    spectral-parabolic dump-rule --dim 2 --q 4
    spectral-parabolic project-initial --problem disk --degree 4

Settings come from an optional TOML file (``--config``) whose keys are the
StudyConfig field names; command-line flags override the file.

Exit codes: 0 success, 1 configuration error, 2 solver failure.
"""
import argparse
import json
import sys

from . import __version__, quadrature, study
from .errors import ConfigError, InvalidArgument, SpectralError
from .galerkin import GalerkinSystem, coefficients_to_csv
from .problems import PROBLEMS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _add_common(p, degrees_flag):
    p.add_argument("--config", help="TOML file with StudyConfig keys")
    p.add_argument("--problem", help=f"one of: {', '.join(sorted(PROBLEMS))}")
    p.add_argument("--mapping", help="polynomial map file for a custom domain")
    p.add_argument("--f1", choices=["zero", "exp-cos"], help="nonlinearity f1(s, t, z)")
    if degrees_flag:
        p.add_argument("--degrees", type=int, nargs="+", help="ascending degree list")
    else:
        p.add_argument("--degree", type=int, help="polynomial degree n")
    p.add_argument("--q", type=int, help="quadrature order (default max(2n, n+2) in 2D)")
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--n-times", type=int, dest="n_times", help="output times in [0, T]")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--samples", type=int, dest="n_samples", help="error sample points")
    p.add_argument("--method", choices=list(study.METHODS))
    p.add_argument("--step", type=float, help="step size for bdf2 / rk4")
    p.add_argument("--jobs", type=int, help="parallel degree solves")
    p.add_argument("--projection", choices=["ball", "domain"])
    p.add_argument("--out", dest="outdir", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="spectral-parabolic", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("solve", help="solve one problem at one degree"), False)

    st = sub.add_parser("study", help="degree sweeps")
    st_sub = st.add_subparsers(dest="study", required=True)
    _add_common(st_sub.add_parser("convergence", help="max error vs degree"), True)
    _add_common(st_sub.add_parser("conditioning", help="cond(G^-1 B) vs N^2"), True)

    dr = sub.add_parser("dump-rule", help="print a quadrature rule as CSV")
    dr.add_argument("--dim", type=int, choices=[2, 3], required=True)
    dr.add_argument("--q", type=int, required=True)
    dr.add_argument("--out", help="file to write instead of stdout")

    pi = sub.add_parser("project-initial", help="initial coefficients as CSV")
    _add_common(pi, False)

    sub.add_parser("list-problems", help="print built-in problem names")
    return parser


def load_config(args, degrees_flag):
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for key in ("problem", "mapping", "f1", "q", "t_final", "n_times", "rtol", "atol",
                "n_samples", "method", "step", "jobs", "projection", "outdir"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if degrees_flag and args.degrees is not None:
        data["degrees"] = args.degrees
    if not degrees_flag and args.degree is not None:
        data["degrees"] = [args.degree]
    if "degrees" in data and not isinstance(data["degrees"], (list, tuple)):
        data["degrees"] = [data["degrees"]]
    return study.StudyConfig.from_dict(data)


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args):
    config = load_config(args, False)
    traj, report = study.run_solve(config)
    summary = {"problem": config.problem, "degree": config.degrees[-1], "stats": traj.stats}
    if report.max_errors is not None:
        summary["max_error"] = report.max_errors[0]
    print(json.dumps(summary, sort_keys=True))


def _cmd_study(args):
    config = load_config(args, True)
    if args.study == "convergence":
        report = study.run_convergence(config)
        print(f"errors: {report.error_kind}")
        for n, e in zip(report.degrees, report.max_errors):
            print(f"n={n:3d}  max error {e:.3e}")
    else:
        report = study.run_conditioning(config)
        for n, c in zip(report.degrees, report.conditions):
            print(f"n={n:3d}  cond {c:.6e}")
    print(json.dumps(report.fit, sort_keys=True))


def _cmd_dump_rule(args):
    rule = quadrature.rule_for(args.dim, args.q)
    _emit(rule.to_csv(), args.out)


def _cmd_project(args):
    config = load_config(args, False)
    problem = config.make_problem()
    system = GalerkinSystem(problem, config.degrees[-1], q=config.q, projection=config.projection)
    text = coefficients_to_csv(system.project_initial(), system.basis)
    _emit(text, None if config.outdir is None else config.outdir)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            _cmd_solve(args)
        elif args.command == "study":
            _cmd_study(args)
        elif args.command == "dump-rule":
            _cmd_dump_rule(args)
        elif args.command == "project-initial":
            _cmd_project(args)
        elif args.command == "list-problems":
            print("\n".join(sorted(PROBLEMS)))
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
