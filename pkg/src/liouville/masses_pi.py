"""Mass vectors, far-field tail fits and membership in the mass hypersurface."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .coeff import CoefficientMatrix, PiResidual, pi_residual
from .errors import NotConverged, TailDominates
from .radial_ode import RadialProfile, SolveOptions, solve_radial

TAIL_FRACTION_MAX = 1e-3


def uniform_grid(t_lo: float, t_hi: float, dt: float) -> np.ndarray:
    """Uniform grid with an even number of intervals and spacing at most ``dt``."""
    m = max(2, math.ceil((t_hi - t_lo) / dt))
    m += m % 2
    return np.linspace(t_lo, t_hi, m + 1)


def log_integral(p: RadialProfile, weight, t_hi: float | None = None) -> np.ndarray:
    """Integrate ``exp(v_i(t)) * weight_i(t)`` over ``[t_start, t_hi]`` by composite Simpson.

    ``weight`` is ``None`` (plain masses) or a callable mapping a 1-d array of log
    radii to an (n, len) array.
    """
    t_hi = p.t_end if t_hi is None else t_hi
    t = uniform_grid(p.t_start, t_hi, p.opts.quad_dt)
    u, _ = p.state(t)
    f = np.exp(u + 2 * t)
    if weight is not None:
        f = f * weight(t)
    return simpson(f, x=t, axis=1)


def origin_mass(p: RadialProfile, r: float | None = None) -> np.ndarray:
    """int_0^r exp(u_i) s ds from the Taylor seed, default ``r = exp(t_start)``."""
    r = math.exp(p.t_start) if r is None else r
    K = p.curvature_at_origin()
    return np.exp(p.beta) * (r**2 / 2 - K * r**4 / 16)


def partial_masses(p: RadialProfile, r: float, weight=None, init=None) -> np.ndarray:
    """``int_0^r exp(u_i) w_i s ds`` for ``0 < r <= R_cut``.

    ``weight`` maps log radii to an (n, len) array; ``init`` is its value at the
    origin (needed only when ``weight`` is given).
    """
    t_hi = min(math.log(r), p.t_end)
    w0 = 1.0 if weight is None else np.asarray(init, dtype=float)
    if t_hi <= p.t_start:
        return origin_mass(p, math.exp(t_hi)) * w0
    return origin_mass(p) * w0 + log_integral(p, weight, t_hi=t_hi)


@dataclass(frozen=True)
class TailFit:
    m_hat: np.ndarray
    c_hat: np.ndarray
    window: tuple[float, float]
    fit_residual: float


def _require_converged(p: RadialProfile):
    if not p.converged:
        raise NotConverged(f"NotConverged: profile classified {p.classification!r}")


def tail_fit(p: RadialProfile, samples: int = 65) -> TailFit:
    """Fit ``u_i ~ -m_hat_i ln r + c_hat_i`` over the last decade before ``R_cut``.

    ``m_hat_i`` is the terminal slope ``-(r u_i')(R_cut)``; ``c_hat_i`` is the
    least-squares constant of ``u_i + m_hat_i ln r`` on the window.
    """
    _require_converged(p)
    t_hi = p.t_end
    t_lo = max(p.t_start, t_hi - math.log(10.0))
    t = np.linspace(t_lo, t_hi, samples)
    u, _ = p.state(t)
    m_hat = -p.rup[-1]
    resid = u + m_hat[:, None] * t
    c_hat = resid.mean(axis=1)
    dev = float(np.abs(resid - c_hat[:, None]).max())
    return TailFit(m_hat=m_hat, c_hat=c_hat, window=(math.exp(t_lo), math.exp(t_hi)),
                   fit_residual=dev)


@dataclass(frozen=True)
class MassVector:
    """Raw masses ``sigma_i = int_0^inf exp(u_i) s ds`` plus derived quantities.

    ``weighted`` is ``h * sigma``; it satisfies ``m = A weighted`` and is the
    vector that enters the Lambda polynomials.
    """

    sigma: np.ndarray
    weighted: np.ndarray
    m: np.ndarray
    finite_part: np.ndarray
    tail_part: np.ndarray

    @property
    def tail_fraction(self) -> np.ndarray:
        return self.tail_part / self.finite_part


def compute_masses(p: RadialProfile, fit: TailFit | None = None) -> MassVector:
    _require_converged(p)
    fit = fit or tail_fit(p)
    finite = log_integral(p, None) + origin_mass(p)
    k = fit.m_hat - 2
    tail = np.exp(fit.c_hat + (2 - fit.m_hat) * p.t_end) / k
    if np.any(tail > TAIL_FRACTION_MAX * finite):
        raise TailDominates(
            f"TailDominates: tail/finite = {(tail / finite).max():.3e} > {TAIL_FRACTION_MAX:g}")
    sigma = finite + tail
    weighted = p.h * sigma
    return MassVector(sigma=sigma, weighted=weighted, m=p.A.a @ weighted,
                      finite_part=finite, tail_part=tail)


def check_pi(p: RadialProfile) -> PiResidual:
    return pi_residual(p.A, compute_masses(p).weighted)


def mass_report(p: RadialProfile) -> dict:
    mv = compute_masses(p)
    pr = pi_residual(p.A, mv.weighted)
    return {
        "sigma": mv.sigma.tolist(),
        "m": mv.m.tolist(),
        "lambda_I": pr.lambda_I,
        "min_proper_lambda": pr.min_proper_lambda,
        "tail_fraction": mv.tail_fraction.tolist(),
    }


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Everything produced by one forward solve."""

    profile: RadialProfile
    masses: MassVector
    pi: PiResidual
    fit: TailFit
    eps: float = 0.0

    @property
    def diagnostics(self) -> dict:
        p = self.profile
        return {
            "converged": p.converged,
            "classification": p.classification,
            "t_start": p.t_start,
            "t_end": p.t_end,
            "R_cut": p.R_cut,
            "steps": len(p.grid) - 1,
            "nfev": p.nfev,
            "tail_fit_residual": self.fit.fit_residual,
        }

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "beta": self.profile.beta.tolist(),
            "sigma": self.masses.sigma.tolist(),
            "m": self.masses.m.tolist(),
            "m_hat": self.fit.m_hat.tolist(),
            "lambda_I": self.pi.lambda_I,
            "min_proper_lambda": self.pi.min_proper_lambda,
            "tail_fraction": self.masses.tail_fraction.tolist(),
            "diagnostics": self.diagnostics,
        }


def solve_report(A: CoefficientMatrix, h, beta, opts: SolveOptions | None = None,
                 eps: float = 0.0) -> SolveReport:
    p = solve_radial(A, h, beta, opts)
    _require_converged(p)
    fit = tail_fit(p)
    mv = compute_masses(p, fit)
    return SolveReport(profile=p, masses=mv, pi=pi_residual(A, mv.weighted), fit=fit, eps=eps)
