"""Pohozaev identities on balls, evaluated as residuals along radial profiles.

Radial reduction of the nonlinear identity (constant weights, ball ``B_R``):
on the circle ``|x| = R`` we have ``x . nu = R``, ``d_nu u = u'(R)``,
``x . grad u = R u'(R)`` and ``grad u_i . grad u_j = u_i' u_j'``. The boundary
integrand is therefore

    R sum_i h_i e^{u_i} + sum_ij a^ij (R u_i' u_j' - R u_i' u_j' / 2)

and integrating over the circle (length ``2 pi R``) gives

    4 pi sum_i h_i int_0^R e^{u_i} s ds
        = 2 pi R^2 [ sum_i h_i e^{u_i(R)} + 1/2 sum_ij a^ij u_i'(R) u_j'(R) ].

For the linearized system ``-sum_j a^ij (r phi_j')' = h_i e^{u_i} phi_i r``,
multiplying by ``r u_i'``, summing and integrating by parts twice (using
``sum_i a^ij (r u_i')' = -r h_j e^{u_j}``) leaves

    sum_i (R^2 h_i phi_i(R) e^{u_i(R)} - 2 int_0^R s h_i e^{u_i} phi_i ds)
        + sum_ij a^ij (R phi_j'(R)) (R u_i'(R)) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .masses_pi import partial_masses
from .radial_ode import RadialProfile
from .variational import LinearizedProfile


def _log_radius(p: RadialProfile, R: float) -> float:
    if not 0 < R <= p.R_cut * (1 + 1e-12):
        raise OutOfRange(f"OutOfRange: R={R} not in (0, {p.R_cut:.6g}]")
    return min(math.log(R), p.t_end)


def pohozaev_sides(p: RadialProfile, R: float) -> tuple[float, float]:
    """Both sides of the nonlinear identity on ``B_R``."""
    tR = _log_radius(p, R)
    u, rho = p.state(tR)
    ev = np.exp(u + 2 * tR)  # R^2 e^{u(R)}
    lhs = 4 * math.pi * float(p.h @ partial_masses(p, math.exp(tR)))
    rhs = 2 * math.pi * float(p.h @ ev + 0.5 * rho @ p.A.a_inv @ rho)
    return lhs, rhs


def nonlinear_residual(p: RadialProfile, R: float) -> float:
    lhs, rhs = pohozaev_sides(p, R)
    return lhs - rhs


def linear_residual(p: RadialProfile, phi: LinearizedProfile, R: float) -> float:
    tR = _log_radius(p, R)
    u, rho = p.state(tR)
    ph, chi = phi.state(tR)
    ev = np.exp(u + 2 * tR)
    Q = partial_masses(p, math.exp(tR), weight=lambda t: phi.state(t)[0], init=phi.init)
    first = float(p.h @ (ev * ph - 2 * Q))
    return first + float(rho @ p.A.a_inv @ chi)


@dataclass(frozen=True)
class PohozaevTrace:
    radii: list
    nonlinear_residual: list
    linear_residual: list

    def rows(self):
        for k, R in enumerate(self.radii):
            lin = self.linear_residual[k] if self.linear_residual else float("nan")
            yield R, self.nonlinear_residual[k], lin


def pohozaev_trace(p: RadialProfile, radii, phi: LinearizedProfile | None = None) -> PohozaevTrace:
    radii = [float(R) for R in radii]
    nl = [nonlinear_residual(p, R) for R in radii]
    lin = [linear_residual(p, phi, R) for R in radii] if phi is not None else []
    return PohozaevTrace(radii=radii, nonlinear_residual=nl, linear_residual=lin)


def far_field_limit(p: RadialProfile, lambda_I: float) -> float:
    """Residual at ``R_cut`` minus its ``R -> inf`` value ``pi * Lambda_I``.

    As ``R -> inf`` the left side tends to ``4 pi sum h_i sigma_i`` and the
    right side to ``pi sum a^ij m_i m_j``, so the residual converges to
    ``pi * Lambda_I`` of the weighted masses.
    """
    return nonlinear_residual(p, p.R_cut) - math.pi * lambda_I
