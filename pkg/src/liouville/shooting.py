"""Inverting the mass map, injectivity sweeps and diagonal-perturbation continuation.

Initial data are normalized with ``u_n(0) = 0``; the remaining ``beta_1..beta_{n-1}``
parametrize the radial solutions modulo scaling.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coeff import CoefficientMatrix, pi_residual
from .errors import (
    DuplicateGridPoint,
    InadmissiblePerturbedMatrix,
    LiouvilleError,
    MaxIterations,
    NoAdmissibleRoot,
    SingularJacobian,
    SolveFailed,
    SolverError,
)
from .masses_pi import SolveReport, solve_report
from .radial_ode import RadialProfile, SolveOptions
from .variational import jacobian_sigma


def complete_sigma(A: CoefficientMatrix, sigma_head) -> np.ndarray:
    """Append the last mass so that ``Lambda_I = 0`` and every proper ``Lambda_J > 0``.

    ``Lambda_I = 0`` is quadratic in ``sigma_n``:
    ``a_nn x^2 + (2 a_{n,head} . s - 4) x + (s^T A_head s - 4 sum s) = 0``.
    """
    n = A.n
    s = np.asarray(sigma_head, dtype=float).reshape(-1)
    if s.shape != (n - 1,):
        raise ValueError(f"sigma_head must have {n - 1} entries")
    if np.any(s <= 0):
        raise ValueError("sigma_head must be positive")
    a = A.a
    qa = a[-1, -1]
    qb = 2 * a[-1, :-1] @ s - 4
    qc = s @ a[:-1, :-1] @ s - 4 * s.sum()
    if qa == 0:
        roots = [-qc / qb] if qb != 0 else []
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            # stable pair of roots
            q = -0.5 * (qb + math.copysign(sq, qb)) if qb != 0 else 0.5 * sq
            roots = [q / qa] + ([qc / q] if q != 0 else [-q / qa])
    if len(roots) == 2 and math.isclose(roots[0], roots[1], rel_tol=1e-14):
        roots = roots[:1]
    candidates = []
    for x in roots:
        if not x > 0:
            continue
        full = np.append(s, x)
        if pi_residual(A, full).min_proper_lambda > 0:
            candidates.append(full)
    if len(candidates) > 1:
        candidates = [c for c in candidates if np.all(a @ c > 2)]
    if len(candidates) != 1:
        raise NoAdmissibleRoot(
            f"NoAdmissibleRoot: {len(candidates)} admissible roots among {roots} for head {s.tolist()}")
    return candidates[0]


@dataclass(frozen=True)
class InversionTarget:
    """First ``n - 1`` raw masses to hit; the last follows from ``Lambda_I = 0``."""

    sigma_target: np.ndarray
    A: CoefficientMatrix
    h: np.ndarray

    def __post_init__(self):
        n = self.A.n
        s = np.asarray(self.sigma_target, dtype=float).reshape(-1)
        h = np.ones(n) if self.h is None else np.asarray(self.h, dtype=float).reshape(-1)
        object.__setattr__(self, "sigma_target", s)
        object.__setattr__(self, "h", h)
        self.completed()  # raises unless the target lies on the hypersurface

    def completed(self) -> np.ndarray:
        """Full raw mass vector implied by the target."""
        weighted = complete_sigma(self.A, self.h[:-1] * self.sigma_target)
        return weighted / self.h


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-8
    max_iter: int = 30
    max_halvings: int = 20
    armijo: float = 1e-4
    det_tol: float = 1e-10


@dataclass(frozen=True, eq=False)
class InversionResult:
    beta: np.ndarray
    iterations: int
    residual_norm: float
    profile: RadialProfile
    converged: bool = True
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "history": self.history,
        }


def _forward(target: InversionTarget, head, opts):
    beta = np.append(head, 0.0)
    rep = solve_report(target.A, target.h, beta, opts)
    return rep, rep.masses.sigma[:-1] - target.sigma_target


def invert_sigma(target: InversionTarget, beta0=None, opts: SolveOptions | None = None,
                 newton: NewtonOptions | None = None) -> InversionResult:
    """Damped Newton for ``sigma_head(beta, 0) = target`` using the variational Jacobian.

    Steps are halved (Armijo on the Euclidean residual norm) up to
    ``max_halvings`` times. Trial points whose forward solve fails count as
    rejected.
    """
    newton = newton or NewtonOptions()
    n = target.A.n
    if n < 2:
        raise ValueError("inversion needs n >= 2; for n = 1 every beta is a scaling of the bubble")
    head = np.zeros(n - 1) if beta0 is None else np.asarray(beta0, dtype=float).reshape(-1)
    try:
        rep, F = _forward(target, head, opts)
    except SolverError as exc:
        raise SolveFailed(f"SolveFailed at initial guess: {exc}") from exc
    history = []
    for it in range(newton.max_iter + 1):
        fnorm = float(np.abs(F).max())
        history.append({"beta": head.tolist(), "residual": fnorm})
        if fnorm <= newton.tol:
            return InversionResult(beta=head, iterations=it, residual_norm=fnorm,
                                   profile=rep.profile, history=history)
        if it == newton.max_iter:
            break
        M = jacobian_sigma(rep.profile).M_reduced
        if abs(np.linalg.det(M)) < newton.det_tol:
            raise SingularJacobian(f"SingularJacobian: |det M| < {newton.det_tol:g} at beta={head}")
        step = np.linalg.solve(M, -F)
        f2 = float(np.linalg.norm(F))
        lam = 1.0
        for _ in range(newton.max_halvings + 1):
            trial = head + lam * step
            try:
                rep_t, F_t = _forward(target, trial, opts)
            except SolverError:
                lam *= 0.5
                continue
            if np.linalg.norm(F_t) <= (1 - newton.armijo * lam) * f2:
                break
            lam *= 0.5
        else:
            raise MaxIterations(f"MaxIterations: line search stalled at beta={head}, |F|={fnorm:.3e}")
        head, rep, F = trial, rep_t, F_t
    raise MaxIterations(
        f"MaxIterations: {newton.max_iter} Newton steps, best |F|={float(np.abs(F).max()):.3e}")


@dataclass
class SweepPoint:
    head: np.ndarray
    sigma: np.ndarray | None = None
    lambda_I: float = math.nan
    det_M: float = math.nan
    converged: bool = False
    error: str | None = None


@dataclass
class SweepReport:
    points: list
    min_ratio: float
    violations: list
    scaling_degenerate: bool

    def to_dict(self) -> dict:
        return {
            "n_points": len(self.points),
            "n_failed": sum(not p.converged for p in self.points),
            "min_ratio": self.min_ratio,
            "violations": [[i, j] for i, j in self.violations],
            "scaling_degenerate": self.scaling_degenerate,
        }


def _sweep_point(A, h, head, opts, full_beta) -> SweepPoint:
    pt = SweepPoint(head=head)
    beta = head if full_beta else np.append(head, 0.0)
    try:
        rep = solve_report(A, h, beta, opts)
        pt.sigma = rep.masses.sigma
        pt.lambda_I = rep.pi.lambda_I
        pt.det_M = jacobian_sigma(rep.profile).det_M_reduced if A.n > 1 else math.nan
        pt.converged = True
    except LiouvilleError as exc:
        pt.error = f"SolveFailed: {exc}"
    return pt


def injectivity_sweep(A: CoefficientMatrix, h, grid, opts: SolveOptions | None = None,
                      jobs: int = 1, image_tol: float = 1e-7, beta_tol: float = 1e-3) -> SweepReport:
    """Map every grid point to its masses and look for collisions.

    For ``n >= 2`` grid points are ``(beta_1..beta_{n-1})`` with ``beta_n = 0``.
    For ``n = 1`` they are the full one-entry ``beta``; all images coincide by
    scaling and the report is flagged ``scaling_degenerate`` instead of
    reporting violations.
    """
    n = A.n
    h = np.ones(n) if h is None else np.asarray(h, dtype=float)
    full_beta = n == 1
    dim = 1 if full_beta else n - 1
    heads = [np.atleast_1d(np.asarray(g, dtype=float)).reshape(-1) for g in grid]
    for g in heads:
        if g.shape != (dim,):
            raise ValueError(f"grid points must have {dim} entries")
    for i, j in itertools.combinations(range(len(heads)), 2):
        if np.array_equal(heads[i], heads[j]):
            raise DuplicateGridPoint(f"DuplicateGridPoint: entries {i} and {j} coincide")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(lambda g: _sweep_point(A, h, g, opts, full_beta), heads))
    else:
        points = [_sweep_point(A, h, g, opts, full_beta) for g in heads]
    ok = [k for k, p in enumerate(points) if p.converged]
    min_ratio, violations = math.inf, []
    for i, j in itertools.combinations(ok, 2):
        db = float(np.linalg.norm(points[i].head - points[j].head))
        ds = float(np.linalg.norm(points[i].sigma - points[j].sigma))
        min_ratio = min(min_ratio, ds / db)
        if not full_beta and ds < image_tol and db > beta_tol:
            violations.append((i, j))
    return SweepReport(points=points, min_ratio=min_ratio, violations=violations,
                       scaling_degenerate=full_beta)


def continuation_solve(A: CoefficientMatrix, h, beta, eps_path, opts: SolveOptions | None = None,
                       jobs: int = 1) -> list:
    """Solve with ``A + eps I`` along ``eps_path``.

    Every perturbed matrix is validated up front; the first inadmissible ``eps``
    raises :class:`InadmissiblePerturbedMatrix`. Failed solves are returned as
    the exception instance in place of a report.
    """
    eps_path = [float(e) for e in eps_path]
    if any(e < 0 for e in eps_path):
        raise ValueError("eps must be nonnegative")
    mats = []
    for e in eps_path:
        try:
            mats.append(A.shifted(e))
        except LiouvilleError as exc:
            raise InadmissiblePerturbedMatrix(
                f"InadmissiblePerturbedMatrix: eps={e}: {exc}") from exc

    def run(k):
        try:
            return solve_report(mats[k], h, beta, opts, eps=eps_path[k])
        except SolverError as exc:
            return SolveFailed(f"SolveFailed at eps={eps_path[k]}: {exc}")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, range(len(eps_path))))
    return [run(k) for k in range(len(eps_path))]


def continuation_gaps(reports) -> list:
    """``|sigma^eps - sigma^last|`` for each report, the last entry being the reference."""
    ref = reports[-1]
    if not isinstance(ref, SolveReport):
        return [math.nan] * len(reports)
    return [float(np.linalg.norm(r.masses.sigma - ref.masses.sigma))
            if isinstance(r, SolveReport) else math.nan for r in reports]
