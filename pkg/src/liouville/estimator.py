"""scikit-learn style wrapper around the shooting map ``beta -> sigma``."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .coeff import validate_matrix
from .masses_pi import solve_report
from .radial_ode import SolveOptions
from .shooting import InversionTarget, NewtonOptions, invert_sigma
from .variational import jacobian_sigma


class MassMap(TransformerMixin, BaseEstimator):
    """Map initial data to masses of entire radial solutions.

    With ``normalize=True`` each row of ``X`` holds ``beta_1..beta_{n-1}`` and
    ``u_n(0) = 0`` is implied; otherwise rows are full ``n``-vectors. ``transform``
    returns the raw masses ``sigma`` (``n`` columns) and ``inverse_transform``
    recovers normalized initial data from the first ``n - 1`` masses.

    ``fit`` only validates the parameters; nothing is learned from ``X``.
    """

    def __init__(self, A=None, h=None, normalize=True, rel_tol=1e-10, abs_tol=1e-12,
                 t_start=-12.0, t_max=60.0, slope_margin=0.05, tail_tol=1e-9):
        self.A = A
        self.h = h
        self.normalize = normalize
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.t_start = t_start
        self.t_max = t_max
        self.slope_margin = slope_margin
        self.tail_tol = tail_tol

    def fit(self, X=None, y=None):
        if self.A is None:
            raise ValueError("MassMap needs the interaction matrix A")
        self.coeff_ = validate_matrix(self.A)
        n = self.coeff_.n
        self.h_ = np.ones(n) if self.h is None else np.asarray(self.h, dtype=float).reshape(n)
        if self.normalize and n == 1:
            raise ValueError("normalize=True leaves no free initial value for n = 1")
        self.opts_ = SolveOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                  t_start=self.t_start, t_max=self.t_max,
                                  slope_margin=self.slope_margin, tail_tol=self.tail_tol)
        self.n_features_in_ = n - 1 if self.normalize else n
        if X is not None:
            self._check_X(X)
        return self

    def _check_X(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def _betas(self, X):
        X = self._check_X(X)
        if self.normalize:
            X = np.hstack([X, np.zeros((X.shape[0], 1))])
        return X

    def transform(self, X):
        check_is_fitted(self, "coeff_")
        return np.array([solve_report(self.coeff_, self.h_, b, self.opts_).masses.sigma
                         for b in self._betas(X)])

    def jacobian(self, X):
        """Mass Jacobians ``d sigma_i / d beta_m``, shape (n_samples, n, n)."""
        check_is_fitted(self, "coeff_")
        out = []
        for b in self._betas(X):
            p = solve_report(self.coeff_, self.h_, b, self.opts_).profile
            out.append(jacobian_sigma(p).dsigma)
        return np.array(out)

    def inverse_transform(self, S, beta0=None):
        check_is_fitted(self, "coeff_")
        n = self.coeff_.n
        if n < 2:
            raise ValueError("inverse_transform needs n >= 2")
        S = check_array(S, dtype=float)
        if S.shape[1] not in (n - 1, n):
            raise ValueError(f"S must have {n - 1} or {n} columns")
        rows = []
        for s in S:
            target = InversionTarget(s[: n - 1], self.coeff_, self.h_)
            res = invert_sigma(target, beta0, self.opts_, NewtonOptions())
            rows.append(res.beta if self.normalize else np.append(res.beta, 0.0))
        return np.array(rows)
