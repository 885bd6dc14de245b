"""Batch front end: ``liouville <command> --config cfg.json``.

Exit codes: 0 ok, 1 invalid config, 2 solver non-convergence, 3 verification
failure. Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .coeff import validate_matrix
from .errors import ConfigError, LiouvilleError, SolverError
from .io import dumps, write_csv, write_json, write_profile_csv
from .masses_pi import mass_report, solve_report
from .radial_ode import SolveOptions
from .shooting import (
    InversionTarget,
    NewtonOptions,
    continuation_gaps,
    continuation_solve,
    injectivity_sweep,
    invert_sigma,
)
from .variational import jacobian_report
from .verify import all_passed, summary_line, verify_solution

COMMANDS = ("solve", "masses", "jacobian", "invert", "sweep", "continuation", "verify")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

CONFIG_HELP = f"""\
config keys (JSON object; unknown keys are rejected):
  A            n x n matrix, row-major (required)
  h            positive weights, default all 1
  beta         initial values u_i(0): n entries, or n-1 entries with u_n(0)=0
               appended (solve, masses, jacobian, verify, continuation)
  grid         sweep points: {{"points": [[...], ...]}} or
               {{"start": [...], "stop": [...], "count": [...]}} per axis
  sigma_head   target masses sigma_1..sigma_(n-1) (invert)
  beta0        Newton initial guess, default zeros (invert)
  eps_path     list of eps >= 0 for A + eps I (continuation)
  radii        Pohozaev radii, default [1, 5, R_cut] (verify)
  options      solver options, defaults: {json.dumps(SolveOptions().to_dict())}
  newton       Newton options, defaults: {json.dumps(NewtonOptions().__dict__)}

output: <out>/<command>-<config stem>/{{report.json, profile.csv, trace.csv, meta.json}}
with <out> from --out, else $LIOUVILLE_OUT, else ./out
"""


@dataclass
class RunConfig:
    A: list
    h: list | None = None
    beta: list | None = None
    grid: dict | None = None
    sigma_head: list | None = None
    beta0: list | None = None
    eps_path: list | None = None
    radii: list | None = None
    options: dict = field(default_factory=dict)
    newton: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if "A" not in raw:
            raise ConfigError("config needs key 'A'")
        cfg = cls(**raw)
        bad = sorted(set(cfg.options) - set(SolveOptions.__dataclass_fields__))
        if bad:
            raise ConfigError(f"unknown solver options: {bad}")
        bad = sorted(set(cfg.newton) - set(NewtonOptions.__dataclass_fields__))
        if bad:
            raise ConfigError(f"unknown newton options: {bad}")
        return cfg

    def resolved(self, tol: float | None = None) -> dict:
        """Config with every default filled in, as embedded in reports."""
        A = validate_matrix(self.A)
        out = {
            "A": A.tolist(),
            "h": self.weights(A.n).tolist(),
            "options": self.solve_options(tol).to_dict(),
            "newton": NewtonOptions(**self.newton).__dict__,
        }
        for key in ("beta", "grid", "sigma_head", "beta0", "eps_path", "radii"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def weights(self, n: int) -> np.ndarray:
        h = np.ones(n) if self.h is None else np.asarray(self.h, dtype=float)
        if h.shape != (n,):
            raise ConfigError(f"h must have {n} entries")
        return h

    def full_beta(self, n: int) -> np.ndarray:
        if self.beta is None:
            raise ConfigError("config needs key 'beta'")
        b = np.asarray(self.beta, dtype=float).reshape(-1)
        if b.size == n - 1:
            b = np.append(b, 0.0)
        if b.size != n:
            raise ConfigError(f"beta must have {n} or {n - 1} entries")
        return b

    def solve_options(self, tol: float | None = None) -> SolveOptions:
        opts = dict(self.options)
        if tol is not None:
            opts["rel_tol"] = tol
        try:
            return SolveOptions(**opts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid solver options: {exc}") from exc

    def grid_points(self) -> list:
        g = self.grid
        if g is None:
            raise ConfigError("config needs key 'grid'")
        if set(g) == {"points"}:
            return [np.atleast_1d(np.asarray(p, dtype=float)) for p in g["points"]]
        if set(g) == {"start", "stop", "count"}:
            axes = [np.linspace(a, b, int(c)) for a, b, c in zip(g["start"], g["stop"], g["count"])]
            return [np.array(pt) for pt in itertools.product(*axes)]
        raise ConfigError("grid must be {points} or {start, stop, count}")


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(raw)


def _pool_jobs(n):
    return max(1, int(n))


def cmd_solve(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    rep = solve_report(A, cfg.weights(A.n), cfg.full_beta(A.n), cfg.solve_options(args.tol))
    report = {"config": resolved, **mass_report(rep.profile), "diagnostics": rep.diagnostics}
    write_json(outdir / "report.json", report)
    write_profile_csv(outdir / "profile.csv", rep.profile)
    return report, EXIT_OK


def cmd_masses(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    rep = solve_report(A, cfg.weights(A.n), cfg.full_beta(A.n), cfg.solve_options(args.tol))
    report = {"config": resolved, **mass_report(rep.profile)}
    write_json(outdir / "report.json", report)
    return report, EXIT_OK


def cmd_jacobian(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    rep = solve_report(A, cfg.weights(A.n), cfg.full_beta(A.n), cfg.solve_options(args.tol))
    report = {"config": resolved, **jacobian_report(rep.profile)}
    write_json(outdir / "report.json", report)
    return report, EXIT_OK


def cmd_invert(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    if cfg.sigma_head is None:
        raise ConfigError("config needs key 'sigma_head'")
    target = InversionTarget(cfg.sigma_head, A, cfg.weights(A.n))
    res = invert_sigma(target, cfg.beta0, cfg.solve_options(args.tol), NewtonOptions(**cfg.newton))
    achieved = mass_report(res.profile)
    report = {"config": resolved, **res.to_dict(), "sigma": achieved["sigma"],
              "lambda_I": achieved["lambda_I"]}
    write_json(outdir / "report.json", report)
    write_profile_csv(outdir / "profile.csv", res.profile)
    return report, EXIT_OK


def cmd_sweep(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    sw = injectivity_sweep(A, cfg.weights(A.n), cfg.grid_points(), cfg.solve_options(args.tol),
                           jobs=_pool_jobs(args.jobs))
    n = A.n
    dim = 1 if n == 1 else n - 1
    header = [f"beta_{i}" for i in range(1, dim + 1)] + [f"sigma_{i}" for i in range(1, n + 1)]
    header += ["lambda_I", "det_M", "converged"]
    rows = []
    for pt in sw.points:
        sig = pt.sigma if pt.sigma is not None else [float("nan")] * n
        rows.append([*pt.head, *sig, pt.lambda_I, pt.det_M, pt.converged])
    write_csv(outdir / "trace.csv", header, rows)
    report = {"config": resolved, **sw.to_dict(),
              "errors": [pt.error for pt in sw.points if pt.error]}
    write_json(outdir / "report.json", report)
    return report, EXIT_VERIFY if sw.violations else EXIT_OK


def cmd_continuation(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    if cfg.eps_path is None:
        raise ConfigError("config needs key 'eps_path'")
    reps = continuation_solve(A, cfg.weights(A.n), cfg.full_beta(A.n), cfg.eps_path,
                              cfg.solve_options(args.tol), jobs=_pool_jobs(args.jobs))
    gaps = continuation_gaps(reps)
    entries, rows = [], []
    for eps, r, gap in zip(cfg.eps_path, reps, gaps):
        if isinstance(r, LiouvilleError):
            entries.append({"eps": eps, "error": str(r)})
            rows.append([eps, *[float("nan")] * A.n, float("nan"), gap])
        else:
            entries.append({**r.to_dict(), "gap": gap})
            rows.append([eps, *r.masses.sigma, r.pi.lambda_I, gap])
    header = ["eps", *[f"sigma_{i}" for i in range(1, A.n + 1)], "lambda_I", "gap"]
    write_csv(outdir / "trace.csv", header, rows)
    report = {"config": resolved, "reports": entries}
    write_json(outdir / "report.json", report)
    failed = any(isinstance(r, LiouvilleError) for r in reps)
    return report, EXIT_SOLVER if failed else EXIT_OK


def cmd_verify(cfg, args, outdir, resolved):
    A = validate_matrix(cfg.A)
    checks, trace = verify_solution(A, cfg.weights(A.n), cfg.full_beta(A.n),
                                    cfg.solve_options(args.tol), radii=cfg.radii)
    write_csv(outdir / "trace.csv", ["R", "nonlinear_residual", "linear_residual"], trace.rows())
    ok = all_passed(checks)
    report = {"config": resolved, "passed": ok, "checks": [c.to_dict() for c in checks]}
    write_json(outdir / "report.json", report)
    if not args.quiet:
        for c in checks:
            print(summary_line(c))
    return report, EXIT_OK if ok else EXIT_VERIFY


HANDLERS = {
    "solve": cmd_solve,
    "masses": cmd_masses,
    "jacobian": cmd_jacobian,
    "invert": cmd_invert,
    "sweep": cmd_sweep,
    "continuation": cmd_continuation,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the JSON run config")
    common.add_argument("--out", default=None,
                        help="output root (default: $LIOUVILLE_OUT or ./out)")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker threads for sweep and continuation (default 1)")
    common.add_argument("--tol", type=float, default=None,
                        help=f"override options.rel_tol (default {SolveOptions().rel_tol:g})")
    common.add_argument("--quiet", action="store_true", help="no summary on stdout")
    parser = argparse.ArgumentParser(
        prog="liouville", description="Radial Liouville systems: masses, Jacobians, inversion.",
        epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], epilog=CONFIG_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        cfg = load_config(args.config)
        resolved = cfg.resolved(args.tol)
    except (LiouvilleError, ValueError, TypeError) as exc:
        return _fail(EXIT_CONFIG, exc)
    out_root = Path(args.out or os.environ.get("LIOUVILLE_OUT") or "out")
    outdir = out_root / f"{args.command}-{Path(args.config).stem}"
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        report, code = HANDLERS[args.command](cfg, args, outdir, resolved)
    except SolverError as exc:
        code, report = _fail(EXIT_SOLVER, exc), None
    except (LiouvilleError, ValueError, TypeError) as exc:
        code, report = _fail(EXIT_CONFIG, exc), None
    write_json(outdir / "meta.json", {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started_unix": started,
        "wall_seconds": time.time() - started,
        "exit_code": code,
    })
    if report is not None and not args.quiet and args.command != "verify":
        brief = {k: v for k, v in report.items() if k != "config"}
        sys.stdout.write(dumps(brief))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
