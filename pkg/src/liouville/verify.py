"""Invariant battery for a single configuration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeff import CoefficientMatrix
from .masses_pi import solve_report
from .pohozaev import PohozaevTrace, pohozaev_trace
from .radial_ode import SolveOptions
from .shooting import InversionTarget, invert_sigma
from .variational import jacobian_sigma, kernel_check

PI_TOL = 1e-5
SLOPE_FIT_TOL = 1e-3
KERNEL_TOL = 1e-7
ORTHO_TOL = 1e-6
CONSTRAINT_TOL = 1e-5
DET_MIN = 1e-8
POHOZAEV_TOL = 1e-5
ROUNDTRIP_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed}


def _below(name, value, tol):
    value = float(value)
    return Check(name, value, tol, bool(abs(value) < tol))


def _above(name, value, tol):
    value = float(value)
    return Check(name, value, tol, bool(value > tol))


def verify_solution(A: CoefficientMatrix, h, beta, opts: SolveOptions | None = None,
                    radii=None, round_trip: bool = True) -> tuple[list[Check], PohozaevTrace]:
    """Run every invariant check on one solve; returns the checks and the Pohozaev trace.

    ``radii`` defaults to ``(1, 5, R_cut)``; radii beyond ``R_cut`` are clipped to it.
    """
    opts = opts or SolveOptions()
    n = A.n
    h = np.ones(n) if h is None else np.asarray(h, dtype=float)
    rep = solve_report(A, h, beta, opts)
    p, mv, pi = rep.profile, rep.masses, rep.pi
    checks = [
        _below("lambda_I", pi.lambda_I, PI_TOL),
        Check("min_proper_lambda", pi.min_proper_lambda, 0.0,
              bool(n == 1 or pi.min_proper_lambda > 0)),
        _above("min_m_minus_2", (mv.m - 2).min(), opts.slope_margin),
        _below("tail_fit_vs_m", np.abs(rep.fit.m_hat - mv.m).max(), SLOPE_FIT_TOL),
    ]
    kc = kernel_check(p)
    checks += [
        _below("kernel_deviation", kc.deviation, KERNEL_TOL),
        _below("orthogonality", kc.orthogonality_residual, ORTHO_TOL),
    ]
    basis = jacobian_sigma(p)
    checks.append(_below("mass_constraint", np.abs(basis.constraint_residual(mv.m)).max(),
                         CONSTRAINT_TOL))
    if n > 1:
        checks.append(_above("abs_det_M_reduced", abs(basis.det_M_reduced), DET_MIN))
    radii = [1.0, 5.0, p.R_cut] if radii is None else [min(float(R), p.R_cut) for R in radii]
    trace = pohozaev_trace(p, radii, basis.psi[0])
    checks.append(_below("pohozaev_nonlinear", max(map(abs, trace.nonlinear_residual)),
                         POHOZAEV_TOL))
    checks.append(_below("pohozaev_linear", max(map(abs, trace.linear_residual)), POHOZAEV_TOL))
    if round_trip and n > 1:
        # normalize u_n(0) = 0; masses are invariant under beta + c(1,..,1)
        head = (p.beta - p.beta[-1])[:-1]
        target = InversionTarget(mv.sigma[:-1], A, h)
        res = invert_sigma(target, np.zeros(n - 1), opts)
        checks.append(_below("round_trip", np.abs(res.beta - head).max(), ROUNDTRIP_TOL))
    return checks, trace


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)


def summary_line(check: Check) -> str:
    status = "PASS" if check.passed else "FAIL"
    return f"{status} {check.name}: {check.value:.3e} (tol {check.tol:g})"

