"""Linearized (variational) solutions along a radial profile and the shooting Jacobian.

A linearized solution solves ``(r phi_i')' + sum_j a_ij h_j exp(u_j) r phi_j = 0``.
In the log radius with ``chi_i = r phi_i'``:

    dphi_i/dt = chi_i,    dchi_i/dt = -sum_j a_ij h_j exp(v_j(t)) phi_j.

The solution with ``phi(0) = (2, ..., 2)`` is ``r u' + 2``; the solutions with unit
initial data are the derivatives ``du/dbeta_m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotConverged, OutOfRange
from .masses_pi import TailFit, log_integral, tail_fit
from .radial_ode import RadialProfile


@dataclass(frozen=True, eq=False)
class LinearizedProfile:
    base: RadialProfile
    init: np.ndarray
    grid: np.ndarray
    phi: np.ndarray
    rphip: np.ndarray
    _dense: object = field(repr=False)

    def state(self, t):
        """(phi, r phi') at log radii ``t``; Taylor seed below the first grid point."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        n = self.base.n
        if np.any(tt > self.grid[-1] + 1e-12):
            raise OutOfRange(f"OutOfRange: t={tt.max()} beyond {self.grid[-1]}")
        y = np.empty((2 * n, tt.size))
        inside = tt >= self.grid[0]
        if inside.any():
            y[:, inside] = self._dense(np.minimum(tt[inside], self.grid[-1]))
        if (~inside).any():
            r2 = np.exp(2 * tt[~inside])
            L = self._origin_curvature()[:, None]
            y[:n, ~inside] = self.init[:, None] - L * r2 / 4
            y[n:, ~inside] = -L * r2 / 2
        if scalar:
            return y[:n, 0], y[n:, 0]
        return y[:n], y[n:]

    def _origin_curvature(self) -> np.ndarray:
        return self.base.coupling @ (np.exp(self.base.beta) * self.init)


def _require_converged(p: RadialProfile):
    if not p.converged:
        raise NotConverged(f"NotConverged: base profile classified {p.classification!r}")


def solve_linearized(p: RadialProfile, init, joint: bool | None = None) -> LinearizedProfile:
    """Regular linearized solution along ``p`` with ``phi(0) = init``, ``phi'(0) = 0``.

    By default the base profile is read from its dense output; with ``joint`` (or
    ``p.opts.joint_variational``) the nonlinear system is re-integrated alongside.
    """
    _require_converged(p)
    n = p.n
    init = np.asarray(init, dtype=float).reshape(-1)
    if init.shape != (n,):
        raise ValueError(f"init must have {n} entries")
    joint = p.opts.joint_variational if joint is None else joint
    C = p.coupling
    t0, t1 = p.t_start, p.t_end
    r2 = math.exp(2 * t0)
    L = C @ (np.exp(p.beta) * init)
    seed = np.concatenate([init - L * r2 / 4, -L * r2 / 2])
    opts = p.opts

    if joint:
        u0, rho0 = p.state(t0)

        def rhs(t, y):
            e = np.exp(y[:n] + 2 * t)
            return np.concatenate([y[n:2 * n], -C @ e, y[3 * n:], -C @ (e * y[2 * n:3 * n])])

        y0 = np.concatenate([u0, rho0, seed])
        sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=opts.rel_tol,
                        atol=opts.abs_tol, max_step=opts.max_step, dense_output=True)
        dense_full = sol.sol

        def dense(t):
            return dense_full(t)[2 * n:]

        Y = sol.y[2 * n:]
    else:
        def rhs(t, y):
            u, _ = p.state(t)
            return np.concatenate([y[n:], -C @ (np.exp(u + 2 * t) * y[:n])])

        sol = solve_ivp(rhs, (t0, t1), seed, method="DOP853", rtol=opts.rel_tol,
                        atol=opts.abs_tol, max_step=opts.max_step, dense_output=True)
        dense = sol.sol
        Y = sol.y
    if sol.status != 0:
        raise NotConverged(f"NotConverged: linearized solve failed: {sol.message}")
    return LinearizedProfile(base=p, init=init, grid=sol.t, phi=Y[:n].T, rphip=Y[n:].T,
                             _dense=dense)


def weighted_mass(phi: LinearizedProfile, fit: TailFit | None = None):
    """``int_0^inf exp(u_i) phi_i s ds`` with far-field correction, and a tail bound.

    Beyond ``R_cut`` the linearized solution is affine in ``ln r`` and
    ``exp(v_i)`` decays like ``r^(2 - m_hat_i)``; integrating that model gives the
    correction. The returned band is the cruder bound
    ``e^c R^(2-m) (ln R + 1/(m-2)) / (m-2)`` times ``max |phi|, |r phi'|``.
    """
    p = phi.base
    fit = fit or tail_fit(p)
    body = log_integral(p, lambda t: phi.state(t)[0])
    r0 = math.exp(p.t_start)
    body += np.exp(p.beta) * phi.init * r0**2 / 2
    k = fit.m_hat - 2
    T = p.t_end
    edge = np.exp(fit.c_hat + (2 - fit.m_hat) * T)
    ph, ch = phi.state(T)
    correction = edge * (ph / k + ch / k**2)
    scale = np.maximum(np.abs(ph), np.abs(ch))
    band = edge * (abs(T) + 1 / k) / k * np.maximum(scale, 1.0)
    return body + correction, band


@dataclass(frozen=True)
class KernelCheck:
    deviation: float
    orthogonality: np.ndarray

    @property
    def orthogonality_residual(self) -> float:
        return float(np.abs(self.orthogonality).max())


def kernel_check(p: RadialProfile) -> KernelCheck:
    """Compare the ``init = 2`` linearized solution with ``r u' + 2`` on the base grid."""
    _require_converged(p)
    phi = solve_linearized(p, np.full(p.n, 2.0))
    t = p.grid
    ph, _ = phi.state(t)
    dev = float(np.abs(ph - p.vprime.T).max())
    orth, _ = weighted_mass(phi)
    return KernelCheck(deviation=dev, orthogonality=orth)


@dataclass(frozen=True, eq=False)
class VariationalBasis:
    """Unit-data linearized solutions and the mass Jacobian.

    ``dsigma[i, m]`` is the derivative of the raw mass ``sigma_i`` with respect
    to ``beta_m``; ``M_reduced`` is its leading ``(n-1) x (n-1)`` block.
    """

    base: RadialProfile
    psi: list
    dsigma: np.ndarray
    tail_band: np.ndarray
    M_reduced: np.ndarray
    log_growth: np.ndarray

    @property
    def det_M_reduced(self) -> float:
        if self.M_reduced.size == 0:
            return 1.0
        return float(np.linalg.det(self.M_reduced))

    def constraint_residual(self, m) -> np.ndarray:
        """sum_i (m_i - 2) h_i dsigma[i, col] for every column (zero on the hypersurface)."""
        m = np.asarray(m, dtype=float)
        return ((m - 2) * self.base.h) @ self.dsigma


def jacobian_sigma(p: RadialProfile) -> VariationalBasis:
    _require_converged(p)
    n = p.n
    fit = tail_fit(p)
    psi, cols, bands, growth = [], [], [], []
    for m in range(n):
        lin = solve_linearized(p, np.eye(n)[m])
        col, band = weighted_mass(lin, fit)
        psi.append(lin)
        cols.append(col)
        bands.append(band)
        lr = np.maximum(1.0, lin.grid)  # ln r, floored at 1
        growth.append(np.abs(lin.phi).max(axis=1) / lr)
    dsigma = np.column_stack(cols)
    return VariationalBasis(
        base=p, psi=psi, dsigma=dsigma, tail_band=np.column_stack(bands),
        M_reduced=dsigma[: n - 1, : n - 1].copy(),
        log_growth=np.array([g.max() for g in growth]),
    )


def jacobian_report(p: RadialProfile, basis: VariationalBasis | None = None,
                    kc: KernelCheck | None = None) -> dict:
    basis = basis or jacobian_sigma(p)
    kc = kc or kernel_check(p)
    return {
        "dsigma": basis.dsigma.tolist(),
        "det_M_reduced": basis.det_M_reduced,
        "kernel_deviation": kc.deviation,
        "orthogonality_residual": np.abs(kc.orthogonality).tolist(),
    }
