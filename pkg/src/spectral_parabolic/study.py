"""Study drivers: error-over-time runs, degree sweeps and conditioning tables.

Every driver writes plain CSV first and renders the SVG from that CSV, so a
plot never carries numbers the table does not.  CSV values use 17 significant
digits and contain no timings, so identical single-threaded runs give
identical bytes.
"""
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import problems, svgplot
from .errors import ConfigError, SpectralError
from .galerkin import GalerkinSystem
from .timestepper import condition_number, integrate

METHODS = ("bdf", "radau", "bdf2", "rk4")


@dataclass(frozen=True)
class StudyConfig:
    problem: str = "disk"
    degrees: tuple = (8,)
    q: Optional[int] = None             # None: galerkin.default_order
    t_final: Optional[float] = None     # None: 20 in 2D, 2 in 3D
    n_times: int = 200
    rtol: float = 1e-8
    atol: float = 1e-10
    n_samples: int = 801
    outdir: Optional[str] = None
    method: str = "bdf"
    step: Optional[float] = None
    jobs: int = 1
    mapping: Optional[str] = None
    f1: str = "exp-cos"
    projection: str = "ball"

    def __post_init__(self):
        degs = tuple(int(n) for n in self.degrees)
        object.__setattr__(self, "degrees", degs)
        if not degs:
            raise ConfigError("at least one degree is required")
        if any(n < 0 for n in degs) or any(b <= a for a, b in zip(degs, degs[1:])):
            raise ConfigError(f"degrees must be non-negative and strictly ascending: {degs}")
        if self.t_final is not None and not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if self.n_times < 2:
            raise ConfigError("n_times must be at least 2")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be at least 1")
        if self.rtol <= 0 or self.atol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method in ("bdf2", "rk4") and not (self.step and self.step > 0):
            raise ConfigError(f"method {self.method!r} needs a positive step")
        if self.q is not None and self.q < 1:
            raise ConfigError("quadrature order must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.f1 not in problems.F1_MENU:
            raise ConfigError(f"unknown f1 {self.f1!r}")
        if self.projection not in ("ball", "domain"):
            raise ConfigError(f"unknown projection {self.projection!r}")

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        data = dict(data)
        if "degrees" in data:
            data["degrees"] = tuple(data["degrees"])
        return cls(**data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def make_problem(self):
        try:
            return problems.get_problem(self.problem, mapping=self.mapping, f1=self.f1)
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_t_final(self, dim):
        if self.t_final is not None:
            return float(self.t_final)
        return 20.0 if dim == 2 else 2.0

    def output_times(self, dim):
        return np.linspace(0.0, self.resolved_t_final(dim), self.n_times)

    def echo(self):
        return json.dumps(dataclasses.asdict(self), sort_keys=True)


@dataclass
class ErrorReport:
    """Errors from one run or one sweep; fields that do not apply are None."""
    times: Optional[np.ndarray] = None
    errors: Optional[np.ndarray] = None          # per-time max-abs error
    degrees: Optional[list] = None
    max_errors: Optional[list] = None            # per-degree max-over-time error
    conditions: Optional[list] = None
    error_kind: str = "exact"                    # or "self-convergence"
    fit: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# sample points

def sample_points(count=801, dim=2):
    """Deterministic interior points of the unit ball.

    2D: the centre plus concentric rings at radii i/R * 0.999, i = 1..R,
    with R = round(sqrt((count - 1) / 2)); 801 points are 20 rings of 40.
    Exactly ``count`` points are returned.

    3D: the centre plus a product grid of 4 shells (radii i/4 * 0.999),
    P polar angles (j + 1/2) pi / P and 2P azimuths, with P chosen so that
    1 + 8 P^2 is closest to ``count``; 801 gives P = 10 exactly.
    """
    if count < 1:
        raise ConfigError("sample count must be at least 1")
    if dim == 2:
        return _disk_samples(count)
    if dim == 3:
        return _ball_samples(count)
    raise ConfigError(f"unsupported dimension {dim}")


def _disk_samples(count):
    pts = [np.zeros((1, 2))]
    rest = count - 1
    if rest:
        rings = max(1, round(math.sqrt(rest / 2)))
        base, extra = divmod(rest, rings)
        for i in range(1, rings + 1):
            k = base + (1 if i > rings - extra else 0)
            if k == 0:
                continue
            r = 0.999 * i / rings
            th = 2 * np.pi * np.arange(k) / k
            pts.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))
    return np.concatenate(pts)


def _ball_samples(count, shells=4):
    p = max(1, round(math.sqrt(max(count - 1, 0) / (2 * shells)))) if count > 1 else 0
    if p == 0:
        return np.zeros((1, 3))
    r = 0.999 * np.arange(1, shells + 1) / shells
    polar = (np.arange(p) + 0.5) * np.pi / p
    azim = np.arange(2 * p) * np.pi / p
    rr, pp, aa = np.meshgrid(r, polar, azim, indexing="ij")
    rr, pp, aa = rr.ravel(), pp.ravel(), aa.ravel()
    grid = np.stack([rr * np.sin(pp) * np.cos(aa), rr * np.sin(pp) * np.sin(aa),
                     rr * np.cos(pp)], axis=1)
    return np.concatenate([np.zeros((1, 3)), grid])


# ---------------------------------------------------------------------------
# single-degree solve

@dataclass
class DegreeResult:
    degree: int
    size: int
    trajectory: object
    samples: np.ndarray            # u_n at the sample points, (len(times), M)
    errors: Optional[np.ndarray]   # per-time max-abs error, or None


def solve_degree(config, n):
    """Solve ``config``'s problem at degree ``n`` and sample u_n."""
    problem = config.make_problem()
    dim = problem.dim
    times = config.output_times(dim)
    try:
        system = GalerkinSystem(problem, n, q=config.q, projection=config.projection)
        traj = integrate(system, times[-1], times, rtol=config.rtol, atol=config.atol,
                         method=config.method, step=config.step)
    except SpectralError as exc:
        raise type(exc)(f"{exc} [degree {n}; config {config.echo()}]") from exc
    x = sample_points(config.n_samples, dim)
    psi, _ = system.basis.bubble(x)
    samples = traj.coeffs @ psi.T
    errors = None
    if problem.exact is not None:
        s = problem.domain.map(x)
        exact = np.stack([problem.exact.u(s, t) for t in times])
        errors = np.max(np.abs(samples - exact), axis=1)
    return DegreeResult(n, system.size, traj, samples, errors)


def _solve_many(config, degrees):
    if config.jobs > 1 and len(degrees) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(solve_degree, [config] * len(degrees), degrees))
    return [solve_degree(config, n) for n in degrees]


# ---------------------------------------------------------------------------
# writers

def _fmt(v):
    return f"{v:.17g}"


def _write(outdir, name, text):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def errors_csv(times, errors):
    buf = io.StringIO()
    buf.write("time,max_abs_error\n")
    for t, e in zip(times, errors):
        buf.write(f"{_fmt(t)},{_fmt(e)}\n")
    return buf.getvalue()


def convergence_csv(report, sizes):
    buf = io.StringIO()
    if report.error_kind != "exact":
        buf.write(f"# errors: {report.error_kind}\n")
    buf.write("degree,N,max_error\n")
    for n, size, e in zip(report.degrees, sizes, report.max_errors):
        buf.write(f"{n},{size},{_fmt(e)}\n")
    return buf.getvalue()


def conditioning_csv(degrees, sizes, conds):
    buf = io.StringIO()
    buf.write("degree,N,N2,cond\n")
    for n, size, c in zip(degrees, sizes, conds):
        buf.write(f"{n},{size},{size * size},{_fmt(c)}\n")
    return buf.getvalue()


def linear_fit(x, y):
    """Least-squares line y = slope x + intercept with its R^2."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        return {"slope": math.nan, "intercept": math.nan, "r2": math.nan, "points": int(x.size)}
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2,
            "points": int(x.size)}


# ---------------------------------------------------------------------------
# drivers

def run_solve(config, degree=None):
    """Solve at one degree (default: the last of ``config.degrees``).

    Returns (trajectory, report).  With ``config.outdir`` set, writes
    trajectory.csv, stats.json and, when an exact solution exists,
    errors_over_time.csv and errors_over_time.svg.
    """
    n = config.degrees[-1] if degree is None else degree
    res = solve_degree(config, n)
    traj = res.trajectory
    report = ErrorReport(times=traj.times, errors=res.errors, degrees=[n],
                         max_errors=None if res.errors is None else [float(res.errors.max())])
    if config.outdir:
        _write(config.outdir, "trajectory.csv", traj.to_csv())
        _write(config.outdir, "stats.json", traj.stats_json() + "\n")
        if res.errors is not None:
            path = _write(config.outdir, "errors_over_time.csv", errors_csv(traj.times, res.errors))
            svgplot.plot_csv(path, os.path.join(config.outdir, "errors_over_time.svg"),
                             "time", ["max_abs_error"], xlabel="t", ylabel="max |u - u_n|",
                             title=f"{config.problem}, n = {n}", logy=True)
    return traj, report


def run_convergence(config):
    """Max-over-time error per degree and a semilog line fit.

    Without an exact solution, each degree is compared to the largest one
    (self-convergence) on the sample points and output times.
    """
    if len(config.degrees) < 4:
        raise ConfigError("a convergence study needs at least 4 degrees")
    results = _solve_many(config, config.degrees)
    if all(r.errors is not None for r in results):
        kind = "exact"
        max_errors = [float(r.errors.max()) for r in results]
    else:
        ref = results[-1].samples
        kind = f"self-convergence vs n={results[-1].degree}"
        max_errors = [float(np.max(np.abs(r.samples - ref))) for r in results]
    degrees = [r.degree for r in results]
    sizes = [r.size for r in results]
    keep = [(n, e) for n, e in zip(degrees, max_errors) if e > 0 and math.isfinite(e)]
    fit = linear_fit([n for n, _ in keep], [math.log10(e) for _, e in keep])
    fit["axes"] = "log10(max_error) vs degree"
    report = ErrorReport(degrees=degrees, max_errors=max_errors, error_kind=kind, fit=fit)
    if config.outdir:
        path = _write(config.outdir, "convergence.csv", convergence_csv(report, sizes))
        _write(config.outdir, "convergence_fit.json", json.dumps(fit, indent=2, sort_keys=True) + "\n")
        svgplot.plot_csv(path, os.path.join(config.outdir, "convergence.svg"), "degree",
                         ["max_error"], xlabel="n", ylabel="max over t of max |u - u_n|",
                         title=f"{config.problem}: {kind}", logy=True)
    return report


def run_conditioning(config):
    """cond_2(G^{-1} B) at t = 0 with the projected initial coefficients.

    Degrees whose SVD fails are reported as nan and left out of the fit of
    log cond against log N^2.
    """
    if len(config.degrees) < 4:
        raise ConfigError("a conditioning study needs at least 4 degrees")
    problem = config.make_problem()
    sizes, conds = [], []
    for n in config.degrees:
        system = GalerkinSystem(problem, n, q=config.q, projection=config.projection)
        a0 = system.project_initial()
        op = system.solve_mass(system.stiffness(0.0, a0))
        try:
            c = condition_number(op)
        except np.linalg.LinAlgError:
            c = math.nan
        sizes.append(system.size)
        conds.append(c)
    keep = [(s, c) for s, c in zip(sizes, conds) if math.isfinite(c) and c > 0]
    fit = linear_fit([2 * math.log(s) for s, _ in keep], [math.log(c) for _, c in keep])
    fit["axes"] = "log(cond) vs log(N^2)"
    report = ErrorReport(degrees=list(config.degrees), conditions=conds, fit=fit)
    if config.outdir:
        path = _write(config.outdir, "conditioning.csv",
                      conditioning_csv(config.degrees, sizes, conds))
        _write(config.outdir, "conditioning_fit.json", json.dumps(fit, indent=2, sort_keys=True) + "\n")
        svgplot.plot_csv(path, os.path.join(config.outdir, "conditioning.svg"), "N2", ["cond"],
                         xlabel="N^2", ylabel="cond(G^-1 B)", title=f"{config.problem}",
                         logx=True, logy=True)
    return report


__all__ = [
    "StudyConfig", "ErrorReport", "DegreeResult", "sample_points", "solve_degree",
    "run_solve", "run_convergence", "run_conditioning", "linear_fit",
    "errors_csv", "convergence_csv", "conditioning_csv",
]
