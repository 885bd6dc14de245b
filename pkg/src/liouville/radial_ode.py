"""Radial shooting for entire solutions of the Liouville system.

We integrate

    u_i'' + u_i'/r + sum_j a_ij h_j exp(u_j) = 0,   u_i(0) = beta_i, u_i'(0) = 0

in the log radius ``t = ln r``. With ``rho_i = r u_i'`` the system becomes the
regular autonomous-in-r^2 problem

    du_i/dt = rho_i,   drho_i/dt = -sum_j a_ij h_j exp(u_j + 2t),

and ``v_i = u_i + 2t`` satisfies ``v_i'' = -sum_j a_ij h_j exp(v_j)``.

Constant weights can be absorbed: ``beta_j -> beta_j + ln h_j`` maps the weighted
problem onto ``h = 1`` with masses ``h_j sigma_j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .coeff import CoefficientMatrix
from .errors import BlowupInFiniteRadius, NoDecayBeforeTmax, OutOfRange, StepUnderflow

V_CEILING = 700.0


@dataclass(frozen=True)
class SolveOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_start: float = -12.0
    t_max: float = 60.0
    slope_margin: float = 0.05
    tail_tol: float = 1e-9
    # linearized solves: integrate jointly with the base system instead of
    # interpolating the base dense output
    joint_variational: bool = False
    # uniform log-radius spacing used by the quadratures
    quad_dt: float = 1.0 / 256
    # cap on the log-radius step; keeps the dense output accurate in the far field
    max_step: float = math.inf

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "slope_margin", "tail_tol", "quad_dt", "max_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")
        if not self.t_start < 0 < self.t_max:
            raise ValueError("need t_start < 0 < t_max")

    def refined(self, factor: float = 100.0) -> "SolveOptions":
        """Copy with both integration tolerances divided by ``factor``."""
        return SolveOptions(**{**self.to_dict(), "rel_tol": self.rel_tol / factor,
                               "abs_tol": self.abs_tol / factor})

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial solution sampled on the integrator's log-radius grid.

    ``v[k, i] = u_i(e^t_k) + 2 t_k`` and ``vprime[k, i] = r u_i'(r) + 2``.
    """

    A: CoefficientMatrix
    h: np.ndarray
    beta: np.ndarray
    opts: SolveOptions
    grid: np.ndarray
    v: np.ndarray
    vprime: np.ndarray
    converged: bool
    R_cut: float
    classification: str
    nfev: int
    _dense: object = field(repr=False)

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def t_start(self) -> float:
        return float(self.grid[0])

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])

    @property
    def coupling(self) -> np.ndarray:
        """The ODE coefficients a_ij h_j."""
        return self.A.a * self.h

    @property
    def u(self) -> np.ndarray:
        return self.v - 2.0 * self.grid[:, None]

    @property
    def rup(self) -> np.ndarray:
        return self.vprime - 2.0

    def curvature_at_origin(self) -> np.ndarray:
        """K_i = sum_j a_ij h_j exp(beta_j), so that u_i = beta_i - K_i r^2/4 + O(r^4)."""
        return self.coupling @ np.exp(self.beta)

    def state(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(u, r u') at log radii ``t`` (scalar or 1-d array), shape (n,) or (n, len(t)).

        Below the first grid point the Taylor seed is used.
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        if np.any(tt > self.t_end + 1e-12):
            raise OutOfRange(f"OutOfRange: t={tt.max()} beyond t_end={self.t_end}")
        y = np.empty((2 * self.n, tt.size))
        inside = tt >= self.t_start
        if inside.any():
            y[:, inside] = self._dense(np.minimum(tt[inside], self.t_end))
        if (~inside).any():
            r2 = np.exp(2 * tt[~inside])
            K = self.curvature_at_origin()[:, None]
            y[: self.n, ~inside] = self.beta[:, None] - K * r2 / 4
            y[self.n :, ~inside] = -K * r2 / 2
        u, rho = y[: self.n], y[self.n :]
        if scalar:
            return u[:, 0], rho[:, 0]
        return u, rho


def _seed_start(coupling: np.ndarray, beta: np.ndarray, opts: SolveOptions) -> float:
    # dropped quartic term of the Taylor seed: c4_i r^4, c4 = (C (e^beta * K))_i / 64
    K = coupling @ np.exp(beta)
    c4 = np.abs(coupling @ (np.exp(beta) * K)).max() / 64.0
    if c4 == 0:
        return opts.t_start
    t_quartic = 0.25 * math.log(opts.abs_tol / c4)
    return min(opts.t_start, t_quartic)


def solve_radial(A: CoefficientMatrix, h, beta, opts: SolveOptions | None = None) -> RadialProfile:
    """Shoot the radial IVP from r ~ 0 until the solution has certified decay.

    The integration stops at the first log radius where every ``r u_i'`` is at
    most ``-(2 + slope_margin)`` and each estimated tail mass
    ``exp(v_i) / (-r u_i' - 2)`` is below ``tail_tol``.

    Raises
    ------
    BlowupInFiniteRadius
        some ``v_i`` exceeded the overflow ceiling.
    NoDecayBeforeTmax
        ``t_max`` was reached first and every ``a_ii > 0``. With a zero diagonal
        entry a non-converged profile classified ``"outside-or-undecided"`` is
        returned instead.
    StepUnderflow
        the integrator could not make progress.
    """
    opts = opts or SolveOptions()
    n = A.n
    h = np.ones(n) if h is None else np.asarray(h, dtype=float).reshape(-1)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if h.shape != (n,) or beta.shape != (n,):
        raise ValueError(f"h and beta must have {n} entries")
    if np.any(h <= 0):
        raise ValueError("weights h_j must be positive")
    C = A.a * h
    t0 = _seed_start(C, beta, opts)
    K = C @ np.exp(beta)
    r2 = math.exp(2 * t0)
    y0 = np.concatenate([beta - K * r2 / 4, -K * r2 / 2])
    delta, tail_tol = opts.slope_margin, opts.tail_tol

    def rhs(t, y):
        return np.concatenate([y[n:], -C @ np.exp(y[:n] + 2 * t)])

    def decayed(t, y):
        rho = y[n:]
        slack = np.max(rho + 2 + delta)
        if slack > 0:
            return slack
        tail = np.exp(y[:n] + 2 * t) / (-rho - 2)
        return math.log(max(tail.max(), 1e-300)) - math.log(tail_tol)

    decayed.terminal = True
    decayed.direction = -1

    def blowup(t, y):
        return V_CEILING - np.max(y[:n] + 2 * t)

    blowup.terminal = True

    sol = solve_ivp(rhs, (t0, opts.t_max), y0, method="DOP853", rtol=opts.rel_tol,
                    atol=opts.abs_tol, max_step=opts.max_step, events=[decayed, blowup],
                    dense_output=True)
    if sol.status == -1:
        raise StepUnderflow(f"StepUnderflow: {sol.message}")
    if sol.t_events[1].size:
        raise BlowupInFiniteRadius(
            f"BlowupInFiniteRadius: v exceeded {V_CEILING} at t={sol.t_events[1][0]:.4g}")
    converged = bool(sol.t_events[0].size)
    if not converged and np.all(np.diag(A.a) > 0):
        rho = sol.y[n:, -1]
        raise NoDecayBeforeTmax(
            f"NoDecayBeforeTmax: t_max={opts.t_max} reached with r u' = {rho.tolist()}")
    t = sol.t
    u, rho = sol.y[:n].T, sol.y[n:].T
    return RadialProfile(
        A=A, h=h, beta=beta, opts=opts, grid=t,
        v=u + 2 * t[:, None], vprime=rho + 2,
        converged=converged, R_cut=float(math.exp(t[-1])),
        classification="converged" if converged else "outside-or-undecided",
        nfev=int(sol.nfev), _dense=sol.sol,
    )


def evaluate_profile(p: RadialProfile, r):
    """Return ``(u, r u')`` at radius ``r`` in ``[0, R_cut]``.

    Uses the integrator's dense output; ``r = 0`` gives ``(beta, 0)``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > p.R_cut * (1 + 1e-12)):
        raise OutOfRange(f"OutOfRange: r must lie in [0, {p.R_cut:.6g}]")
    with np.errstate(divide="ignore"):
        t = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)
    t = np.minimum(t, p.t_end)
    return p.state(t)
