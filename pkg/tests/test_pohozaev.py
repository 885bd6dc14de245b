import math

import numpy as np
import pytest
from scipy.integrate import quad

from liouville import evaluate_profile, jacobian_sigma, pohozaev_trace, solve_linearized
from liouville.errors import OutOfRange
from liouville.pohozaev import far_field_limit, linear_residual, nonlinear_residual, pohozaev_sides


def planar_sides(p, R, n_theta=64, n_r=160):
    """Both sides of the planar identity on B_R, assembled in Cartesian coordinates.

    Area integral on a polar product grid (Gauss-Legendre in r, trapezoid in
    theta); boundary gradients from central differences of u(x, y).
    """
    theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = R * (x + 1) / 2
    w = w * R / 2
    u_r, _ = evaluate_profile(p, r)
    area = 2 * np.pi * ((p.h @ np.exp(u_r)) * r * w).sum()
    lhs = 2 * area

    def u_xy(X, Y):
        return evaluate_profile(p, np.hypot(X, Y))[0]

    d = 1e-5 * R
    total = 0.0
    Ainv = p.A.a_inv
    for th in theta:
        X, Y = R * math.cos(th), R * math.sin(th)
        gx = (u_xy(X + d, Y) - u_xy(X - d, Y)) / (2 * d)
        gy = (u_xy(X, Y + d) - u_xy(X, Y - d)) / (2 * d)
        nx, ny = math.cos(th), math.sin(th)
        dnu = gx * nx + gy * ny
        xgrad = X * gx + Y * gy
        dots = np.outer(gx, gx) + np.outer(gy, gy)
        integrand = R * (p.h @ np.exp(u_xy(X, Y))) + (Ainv * np.outer(dnu, xgrad)).sum() \
            - 0.5 * R * (Ainv * dots).sum()
        total += integrand
    rhs = total * (2 * np.pi * R / n_theta)
    return lhs, rhs


@pytest.mark.parametrize("R", [0.5, 3.0, 12.0])
@pytest.mark.parametrize("name", ["sym2", "mixed3"])
def test_radial_sides_match_planar_oracle(request, name, R):
    p = request.getfixturevalue(name).profile
    lhs, rhs = pohozaev_sides(p, R)
    olhs, orhs = planar_sides(p, R)
    assert lhs == pytest.approx(olhs, rel=1e-6)
    assert rhs == pytest.approx(orhs, rel=1e-6)


def test_linear_identity_on_closed_forms():
    # scalar bubble and its kernel solution, integrated by adaptive quadrature
    def u(s):
        return -2 * math.log1p(s * s / 8)

    def phi(s):
        return 2 - 4 * s * s / (8 + s * s)

    for R in (0.7, 4.0, 30.0):
        Q, _ = quad(lambda s: s * math.exp(u(s)) * phi(s), 0, R, epsabs=0, epsrel=1e-12, limit=200)
        rup = -4 * R * R / (8 + R * R)
        rphip = -64 * R * R / (8 + R * R) ** 2
        res = R * R * phi(R) * math.exp(u(R)) - 2 * Q + rphip * rup
        assert abs(res) < 1e-12


def test_residuals_small(report):
    p = report.profile
    basis = jacobian_sigma(p)
    kernel = solve_linearized(p, np.full(p.n, 2.0))
    for R in (1.0, 5.0, p.R_cut):
        assert abs(nonlinear_residual(p, R)) < 1e-5
        assert abs(linear_residual(p, basis.psi[0], R)) < 1e-5
        assert abs(linear_residual(p, kernel, R)) < 1e-5


def test_far_field_limit(report):
    assert abs(far_field_limit(report.profile, report.pi.lambda_I)) < 1e-6


def test_trace_rows(sym2):
    p = sym2.profile
    tr = pohozaev_trace(p, [1.0, 2.0])
    rows = list(tr.rows())
    assert [r[0] for r in rows] == [1.0, 2.0]
    assert all(math.isnan(r[2]) for r in rows)
    tr = pohozaev_trace(p, [1.0], solve_linearized(p, [1.0, 0.0]))
    assert len(tr.linear_residual) == 1


@pytest.mark.parametrize("factor", [-1.0, 0.0, 2.0])
def test_radius_out_of_range(sym2, factor):
    p = sym2.profile
    with pytest.raises(OutOfRange):
        nonlinear_residual(p, factor * p.R_cut)
